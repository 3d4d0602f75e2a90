// pmelab: configuration-driven runner for the porous medium experiments.
#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>

#include "pmelab/asymptotics.hpp"
#include "pmelab/config.hpp"
#include "pmelab/csv.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pmelab;

namespace {

std::string out_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PMELAB_OUT"); env && *env) return env;
  return ".";
}

// --out-dir wins outright; otherwise the config's output.dir under the default root.
std::string resolve_out(const std::string& flag, const ExperimentConfig& c) {
  if (!flag.empty()) return flag;
  return (fs::path(out_root("")) / c.output.dir).string();
}

RegimePrediction predict_cli(const std::string& regime, int n, double m, std::optional<double> mu,
                             std::optional<double> Q, std::optional<double> nu) {
  if (regime == "qh") return predict_qh(n, m, mu.value_or(0.0));
  if (regime == "qe") {
    if (Q) return predict(RegimeKind::qe_critical, n, m, *Q);
    return predict(RegimeKind::qe_subcritical, n, m, 0.0);
  }
  const RegimeKind k = regime_kind_from_string(regime);
  double param = 0;
  if (k == RegimeKind::qh_subcritical || k == RegimeKind::qh_critical) param = mu.value_or(k == RegimeKind::qh_critical ? 1 : 0);
  if (k == RegimeKind::qe_critical) {
    if (!Q) throw SchemaError("--Q is required for qe_critical");
    param = *Q;
  }
  if (k == RegimeKind::weighted) param = nu.value_or(0.0);
  return predict(k, n, m, param);
}

int run_one(const std::string& cfg_path, const std::string& out_dir) {
  const auto cfg = load_config(cfg_path);
  const auto res = run_pipeline(cfg, out_dir);
  std::cout << res.summary();
  return res.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmelab: porous medium equation on model manifolds"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  std::string log_level = "warn";
  std::string out_flag;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--log-level", log_level, "error, warn, info or debug");
  app.add_option("--out-dir", out_flag, "output directory (default: $PMELAB_OUT / output.dir)");

  std::string cfg_path;
  auto* run = app.add_subcommand("run", "full pipeline from a config");
  run->add_option("--config,config", cfg_path, "config file")->required();

  auto* geo = app.add_subcommand("build-geometry", "write psi.csv and geometry.txt");
  geo->add_option("--config,config", cfg_path, "config file")->required();

  auto* tr = app.add_subcommand("transform", "write rho.csv for the change of variables");
  tr->add_option("--config,config", cfg_path, "config file")->required();

  std::string spec_path;
  auto* vb = app.add_subcommand("verify-barriers", "residual sweep of a barrier dump");
  vb->add_option("--config,config", cfg_path, "config file (geometry and run blocks)")->required();
  vb->add_option("--spec", spec_path, "barrier dump (default: <out-dir>/barriers.txt)");

  auto* sim = app.add_subcommand("simulate", "solve and write traj.csv");
  sim->add_option("--config,config", cfg_path, "config file")->required();

  std::string traj_path, regime;
  double m = 2, window = 0.6;
  int n = 3;
  std::optional<double> mu, Q, nu;
  bool ledger = false;
  auto* fit = app.add_subcommand("fit", "fit sup-norm exponents from a trajectory CSV");
  fit->add_option("--traj", traj_path, "CSV with columns t and sup_norm (default: <out-dir>/traj.csv)");
  fit->add_option("--m", m, "PME exponent")->check(CLI::PositiveNumber);
  fit->add_option("--window", window, "fraction of the log t range used");
  fit->add_option("--regime", regime, "regime for the prediction column");
  fit->add_option("--n", n, "dimension");
  fit->add_option("--mu", mu);
  fit->add_option("--Q", Q);
  fit->add_option("--nu", nu);
  fit->add_flag("--append", ledger, "append to fits.csv instead of rewriting it");

  auto* pr = app.add_subcommand("predict", "predicted exponents and laws");
  pr->add_option("--regime", regime, "qh, qe, or a full regime name")->required();
  pr->add_option("--n", n, "dimension");
  pr->add_option("--m", m, "PME exponent");
  pr->add_option("--mu", mu);
  pr->add_option("--Q", Q);
  pr->add_option("--nu", nu);

  std::vector<std::string> sweep_cfgs;
  auto* sw = app.add_subcommand("sweep", "run several configs concurrently");
  sw->add_option("--config,config", sweep_cfgs, "config files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_log_level(log_level_from_string(log_level));
    if (threads > 0) omp_set_num_threads(threads);

    if (*run) return run_one(cfg_path, resolve_out(out_flag, load_config(cfg_path)));

    if (*geo) {
      const auto c = load_config(cfg_path);
      stage_geometry(c, resolve_out(out_flag, c));
      return 0;
    }
    if (*tr) {
      const auto c = load_config(cfg_path);
      stage_transform(c, resolve_out(out_flag, c));
      return 0;
    }
    if (*vb) {
      const auto c = load_config(cfg_path);
      const auto out = resolve_out(out_flag, c);
      const auto specs = read_spec_file(spec_path.empty() ? (fs::path(out) / "barriers.txt").string() : spec_path);
      const auto reps = stage_verify_barriers(c, specs, out);
      bool ok = true;
      for (std::size_t i = 0; i < specs.size(); ++i) {
        const bool pass = reps[i].verdict == Verdict::pass;
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << to_string(specs[i].regime) << " : " << reps[i].violations
                  << " violations, " << reps[i].unresolved << " unresolved of " << reps[i].sampled << "\n";
      }
      return ok ? 0 : 1;
    }
    if (*sim) {
      const auto c = load_config(cfg_path);
      const auto psi = build_geometry(c.geometry);
      const auto k = resolve_regime(c, psi);
      double hint = 0;
      if (c.run.R_max <= 0) {
        std::optional<Comparison> cmp;
        if (k == RegimeKind::qh_subcritical || k == RegimeKind::qh_critical) cmp = comparison_profiles(psi);
        const auto up = build_upper(k, psi, cmp ? *cmp : Comparison{}, c.pde.m,
                                    datum_stats(c.pde.datum, c.pde.support, c.pde.sup));
        hint = 1.1 * support_radius(up, c.run.T);
      }
      const auto traj = stage_simulate(c, psi, resolve_out(out_flag, c), hint);
      std::cout << "samples = " << traj.samples.size() << "\nsteps = " << traj.steps << "\n";
      return 0;
    }
    if (*fit) {
      const std::string out = out_root(out_flag);
      const std::string path = traj_path.empty() ? (fs::path(out) / "traj.csv").string() : traj_path;
      std::optional<RegimePrediction> pred;
      if (!regime.empty()) pred = predict_cli(regime, n, m, mu, Q, nu);
      const auto f = stage_fit(path, m, pred, out, window, ledger);
      std::cout << f.to_text();
      return 0;
    }
    if (*pr) {
      std::cout << predict_cli(regime, n, m, mu, Q, nu).to_text();
      return 0;
    }
    if (*sw) {
      const int jobs = static_cast<int>(sweep_cfgs.size());
      const int total = threads > 0 ? threads : omp_get_max_threads();
      const int inner = std::max(1, total / std::max(1, jobs));
      std::vector<std::future<int>> fut;
      for (const auto& p : sweep_cfgs) {
        fut.push_back(std::async(std::launch::async, [&, p] {
          omp_set_num_threads(inner);
          const auto c = load_config(p);
          const auto base = out_flag.empty() ? resolve_out("", c) : out_flag;
          const auto dir = (fs::path(base) / fs::path(p).stem()).string();
          return run_pipeline(c, dir).exit_code();
        }));
      }
      int worst = 0;
      for (std::size_t i = 0; i < fut.size(); ++i) {
        int code;
        try {
          code = fut[i].get();
        } catch (const Error& e) {
          std::cerr << sweep_cfgs[i] << ": " << e.what() << "\n";
          code = static_cast<int>(e.kind());
        }
        std::cout << sweep_cfgs[i] << " : exit " << code << "\n";
        worst = std::max(worst, code);
      }
      return worst;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numerical);
  }
  return 0;
}
