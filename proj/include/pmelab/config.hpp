#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/geometry.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

struct GeometryConfig {
  std::string kind = "euclidean";  // ModelKind name or "curvature"
  int n = 3;
  double r_max = 200;
  std::map<std::string, double> params;  // closed-form parameters
  // curvature profile (kind = curvature)
  std::string branch = "upper";
  double Q = 1, mu = 0, R = 1, D = 0;
};

struct PdeConfig {
  double m = 2;
  DatumShape datum = DatumShape::box;
  double support = 1;  // datum support radius
  double sup = 1;      // datum sup
};

struct RunConfig {
  double T = 1e4;
  double t_first = 1e-2;
  int samples = 61;
  int N = 4000;
  Grading grading = Grading::uniform;
  double R_max = 0;  // 0 = derived from the upper barrier
  Integrator integrator = Integrator::rkl2;
  double cfl = 0.4;
  double time_accuracy = 0.01;
  bool store_fields = true;
};

struct VerifyConfig {
  std::vector<std::string> barriers{"upper"};  // upper, lower
  std::string regime = "auto";
  double residual_tol = 1e-6;
  int residual_points = 2000;
  int residual_times = 25;
  bool sandwich = true;
  bool fit = true;
  double fit_window = 0.6;
  double alpha_tol = 0;  // > 0 turns the fit into a verification
  double beta_tol = 0;
  double waiting_threshold = 1e-10;  // relative to the datum sup
};

struct OutputConfig {
  std::string dir = "out";
  bool psi = false;
  bool rho = false;
  bool fields = false;
  int fields_stride = 10;
};

struct ExperimentConfig {
  GeometryConfig geometry;
  PdeConfig pde;
  RunConfig run;
  VerifyConfig verify;
  OutputConfig output;
  std::string source;  // path the config was read from
};

// INI with sections geometry, pde, run, verify, output. Unknown sections or keys raise SchemaError
// naming the key; values that fail their constraint raise SchemaError too.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::string& path);
std::string schema_text();

ModelFunction build_geometry(const GeometryConfig& g);

}  // namespace pmelab
