#pragma once

#include <functional>
#include <vector>

namespace pmelab {

// Dense solution of psi'' = w(r) psi obtained with an embedded Dormand-Prince 5(4)
// integrator. The state is kept renormalised: psi = exp(log_scale) * y, so that
// exponentially growing solutions remain representable far beyond the double range.
class LinearOdeSolution {
 public:
  struct Node {
    double r;
    double y;    // scaled psi
    double dy;   // scaled psi'
    double w;    // coefficient at r
    double log_scale;
  };

  struct Local {
    double log_psi;
    double g;  // psi'/psi
    double w;  // psi''/psi
  };

  LinearOdeSolution() = default;
  LinearOdeSolution(std::vector<Node> nodes, std::function<double(double)> w);

  double r_begin() const { return nodes_.front().r; }
  double r_end() const { return nodes_.back().r; }
  std::size_t steps() const { return nodes_.size() - 1; }
  const std::vector<Node>& nodes() const { return nodes_; }

  // Quintic Hermite continuous extension using (psi, psi', w psi) at both step ends.
  Local evaluate(double r) const;

 private:
  std::vector<Node> nodes_;
  std::function<double(double)> w_;
};

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_initial = 1e-6;
  double h_min_factor = 1e-14;
  std::size_t max_steps = 20'000'000;
};

// Integrates psi'' = w psi from r0 with (psi, psi') = (psi0, dpsi0) up to r_end.
// `breakpoints` are radii where w is not smooth; the integrator lands on each exactly.
// Throws NumericalError on step-size underflow, naming the last accepted radius.
LinearOdeSolution integrate_linear_second_order(const std::function<double(double)>& w, double r0,
                                                double psi0, double dpsi0, double r_end,
                                                std::vector<double> breakpoints,
                                                const OdeOptions& opts = {});

}  // namespace pmelab
