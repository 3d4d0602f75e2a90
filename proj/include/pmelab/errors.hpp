#pragma once

#include <stdexcept>
#include <string>

namespace pmelab {

// Error classes map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  verification = 1,
  schema = 2,
  regime = 3,
  numerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parameter outside the admissible set; carries the name of the violated constraint.
class ConstraintError : public Error {
 public:
  ConstraintError(std::string constraint, const std::string& detail)
      : Error(ErrorKind::regime, constraint + ": " + detail), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

class NotApplicableError : public Error {
 public:
  explicit NotApplicableError(const std::string& what) : Error(ErrorKind::regime, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorKind::schema, what) {}
};

// Thrown by lower-barrier constructors when the datum is not yet positive on the required ball.
class WaitingRequired : public Error {
 public:
  WaitingRequired(double radius, const std::string& what)
      : Error(ErrorKind::regime, what), radius_(radius) {}
  double required_radius() const noexcept { return radius_; }

 private:
  double radius_;
};

}  // namespace pmelab
