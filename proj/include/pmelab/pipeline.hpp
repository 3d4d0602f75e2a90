#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmelab/asymptotics.hpp"
#include "pmelab/barriers.hpp"
#include "pmelab/config.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

enum class LogLevel { error, warn, info, debug };
LogLevel log_level_from_string(const std::string& s);
void set_log_level(LogLevel l);
void log_msg(LogLevel l, const std::string& msg);

// Regime implied by the geometry's large-r class. Throws NotApplicableError for mu > 1.
RegimeKind detect_regime(const ModelFunction& psi);
// Resolves verify.regime against the geometry; a mismatch is a ConstraintError.
RegimeKind resolve_regime(const ExperimentConfig& c, const ModelFunction& psi);

// Curvature profiles bracketing the geometry's curvature from below (upper) and above (lower).
struct Comparison {
  double Q_up = 0, Q_lo = 0, D = 0, mu = 0, R = 1;
  std::optional<ModelFunction> psi_up;
  std::optional<ModelFunction> psi_lo;  // built for mu in [0, 1] only
};
Comparison comparison_profiles(const ModelFunction& psi);

BarrierSpec build_upper(RegimeKind regime, const ModelFunction& psi, const Comparison& cmp, double m,
                        const DatumStats& datum);
// Lower spec for the given datum; WaitingRequired propagates.
BarrierSpec build_lower(RegimeKind regime, const ModelFunction& psi, const Comparison& cmp, double m,
                        const DatumStats& datum);

// Picks the sample (at or after the first one positive on the required ball) whose lower spec has the
// smallest log t0, and returns that spec with time_origin set.
struct LowerChoice {
  bool found = false;
  BarrierSpec spec;
  std::size_t sample = 0;
  double t_wait = 0;
  double inf = 0;
  double R_required = 0;
};
LowerChoice choose_lower(const Trajectory& traj, RegimeKind regime, const ModelFunction& psi,
                         const Comparison& cmp, double m, double threshold);

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct PipelineResult {
  RegimeKind regime = RegimeKind::qh_subcritical;
  std::vector<BarrierSpec> specs;
  std::vector<ResidualReport> residuals;
  std::optional<SandwichReport> sandwich;
  std::optional<RegimePrediction> prediction;
  std::optional<ExponentFit> fit;
  std::vector<Check> checks;
  bool ok() const;
  int exit_code() const;  // 0 or 1; other classes are thrown
  std::string summary() const;
};

// Output files, each written when its stage runs: traj.csv, barriers.txt, residual.csv, fits.csv,
// fit.txt, sandwich.txt, summary.txt, and optionally psi.csv, rho.csv, fields.csv.
PipelineResult run_pipeline(const ExperimentConfig& c, const std::string& out_dir);

// Standalone stages.
void stage_geometry(const ExperimentConfig& c, const std::string& out_dir);
void stage_transform(const ExperimentConfig& c, const std::string& out_dir);
Trajectory stage_simulate(const ExperimentConfig& c, const ModelFunction& psi, const std::string& out_dir,
                          double R_max_hint = 0);
// Residual sweep of every spec in a barrier dump (blocks separated by blank lines).
std::vector<BarrierSpec> read_spec_file(const std::string& path);
std::vector<ResidualReport> stage_verify_barriers(const ExperimentConfig& c, const std::vector<BarrierSpec>& specs,
                                                  const std::string& out_dir);
ExponentFit stage_fit(const std::string& traj_csv, double m, const std::optional<RegimePrediction>& pred,
                      const std::string& out_dir, double window = 0.6, bool append = false);

void write_residuals_csv(const std::vector<BarrierSpec>& specs, const std::vector<ResidualReport>& reps,
                         const std::string& path);

}  // namespace pmelab
