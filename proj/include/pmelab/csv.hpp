#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace pmelab {

using CsvCell = std::variant<double, long long, std::string>;

// Comma-separated output with a header row; doubles are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header, bool append = false);
  void row(const std::vector<double>& values);
  void row_cells(const std::vector<CsvCell>& cells);

 private:
  std::ofstream out_;
};

std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<double> column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

}  // namespace pmelab
