#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pmelab/barriers.hpp"
#include "pmelab/chvar.hpp"
#include "pmelab/geometry.hpp"

namespace pmelab {

enum class Grading { uniform, graded };
std::string to_string(Grading g);
Grading grading_from_string(const std::string& s);

// Radial measure: area density A(r) on spheres and the mass integral of the control volumes.
// Manifold: A = psi^{n-1}. Weighted Euclidean: A = s^{n-1}, mass density rho s^{n-1}.
struct RadialMeasure {
  std::function<double(double)> log_area;
  std::function<double(double, double)> log_mass;  // log of the integral over [a, b]
  double omega = 1.0;                              // sphere area factor
  double r_limit = 0.0;                            // largest admissible radius (0: unbounded)
  std::string label;
};
RadialMeasure manifold_measure(const ModelFunction& psi);
RadialMeasure weighted_measure(const WeightProfile& rho, int n);

// Node-centred control volumes: node i owns [r_{i-1/2}, r_{i+1/2}], node N is the Dirichlet wall.
struct Grid {
  std::vector<double> r;
  std::vector<double> log_vol;  // log of the local control-volume integral (no omega)
  std::vector<double> a_plus;   // A(r_{i+1/2}) / (dr_{i+1/2} V_i)
  std::vector<double> a_minus;  // A(r_{i-1/2}) / (dr_{i-1/2} V_i)
  double omega = 1.0;
  Grading grading = Grading::uniform;
  std::string measure;
  std::function<double(double, double)> log_mass;

  std::size_t nodes() const { return r.size(); }
  double R_max() const { return r.back(); }
  double cell_mass_weight(std::size_t i) const;  // omega V_i
  double min_spacing() const;
};

// Graded grids put 80% of the nodes uniformly on [0, band_end] and stretch the rest geometrically.
Grid make_grid(double R_max, int N, Grading grading, const RadialMeasure& measure, double band_end = 0.0);

struct RadialField {
  std::shared_ptr<const Grid> grid;
  std::vector<double> u;
  double t = 0.0;
};

enum class DatumShape { box, bump };
std::string to_string(DatumShape d);
DatumShape datum_shape_from_string(const std::string& s);
// box: M on [0, R]; bump: M (1 - (r/R)^2)^2 on [0, R].
RadialField make_datum(std::shared_ptr<const Grid> grid, DatumShape shape, double R, double M);
DatumStats datum_stats(DatumShape shape, double R, double M);

struct Diagnostics {
  double sup_norm = 0.0;
  double support_radius = 0.0;
  double mass = 0.0;
  double volume = 0.0;  // measure of the ball of radius support_radius
};
// eps_support < 0 means the relative default 1e-9 * sup; 0 counts every positive value.
Diagnostics diagnostics(const RadialField& u, double eps_support = -1.0);

struct TrajectorySample {
  double t = 0.0;
  Diagnostics diag;
  std::vector<double> u;  // empty unless fields are stored
};

struct Trajectory {
  std::shared_ptr<const Grid> grid;
  std::vector<TrajectorySample> samples;
  double initial_mass = 0.0;
  long steps = 0;
  long stage_evaluations = 0;
  double clipped_mass = 0.0;
  bool domain_exhausted = false;
  double exhausted_at = 0.0;
};

std::vector<double> geometric_schedule(double t_first, double T, int count);

enum class Integrator { euler, rkl2 };
std::string to_string(Integrator i);
Integrator integrator_from_string(const std::string& s);

struct SolverOptions {
  Integrator integrator = Integrator::rkl2;
  double cfl = 0.4;
  double time_accuracy = 0.01;  // super-step length relative to t
  int max_stages = 4000;
  bool parallel = true;
  bool store_fields = true;
  int max_halvings = 30;
  double eps_support = -1.0;
};

Trajectory evolve(const RadialField& u0, double m, const std::vector<double>& sample_times,
                  const SolverOptions& opts = {});

struct SandwichReport {
  long checked = 0;
  long lower_violations = 0;
  long upper_violations = 0;
  double worst_lower = 0.0;  // largest (lower - delta - u), positive means violated
  double worst_upper = 0.0;  // largest (u - upper - delta)
  double worst_lower_t = 0.0, worst_upper_t = 0.0;
  double t_start = 0.0;
  double r_floor = 0.0;
  bool lower_vacuous = false;
  bool pass() const { return lower_violations == 0 && upper_violations == 0; }
  std::string to_text() const;
};

// Lower spec may be null (vacuous). Barrier clocks start at spec.time_origin.
SandwichReport sandwich_check(const Trajectory& traj, const BarrierSpec* lower, const BarrierSpec& upper,
                              double t_start);

// First sample time at which u > threshold on all nodes with r <= radius, and the inf there.
struct WaitingReport {
  bool found = false;
  double t = 0.0;
  double inf = 0.0;
  std::size_t sample = 0;
};
WaitingReport waiting_time(const Trajectory& traj, double radius, double threshold);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_fields_csv(const Trajectory& traj, const std::string& path, int stride = 1);

}  // namespace pmelab
