#include "pmelab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "pmelab/asymptotics.hpp"
#include "pmelab/errors.hpp"

namespace pmelab {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"geometry", {"kind", "n", "r_max", "a1", "alpha", "A", "c", "branch", "Q", "mu", "R", "D"}},
      {"pde", {"m", "datum", "support", "sup"}},
      {"run", {"T", "t_first", "samples", "N", "grading", "R_max", "integrator", "cfl", "time_accuracy",
               "store_fields"}},
      {"verify", {"barriers", "regime", "residual_tol", "residual_points", "residual_times", "sandwich", "fit",
                  "fit_window", "alpha_tol", "beta_tol", "waiting_threshold"}},
      {"output", {"dir", "psi", "rho", "fields", "fields_stride"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& sec, const std::string& key) const {
    auto s = tree_.get_child_optional(sec);
    if (!s) return std::nullopt;
    auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  double num(const std::string& sec, const std::string& key, double def) const {
    auto v = raw(sec, key);
    if (!v) return def;
    double x = 0;
    const auto* b = v->data();
    const auto* e = b + v->size();
    auto [p, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || p != e) throw SchemaError(sec + "." + key + ": not a number: '" + *v + "'");
    return x;
  }

  int integer(const std::string& sec, const std::string& key, int def) const {
    const double x = num(sec, key, def);
    if (x != static_cast<double>(static_cast<long long>(x)) || x > 2e9 || x < -2e9)
      throw SchemaError(sec + "." + key + ": not an integer");
    return static_cast<int>(x);
  }

  bool flag(const std::string& sec, const std::string& key, bool def) const {
    auto v = raw(sec, key);
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw SchemaError(sec + "." + key + ": not a boolean: '" + *v + "'");
  }

  std::string str(const std::string& sec, const std::string& key, const std::string& def) const {
    return raw(sec, key).value_or(def);
  }

 private:
  const pt::ptree& tree_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw SchemaError(key + ": " + what);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw SchemaError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  // First offending key in file order.
  const auto& sch = schema();
  for (const auto& [sec, body] : tree) {
    auto it = sch.find(sec);
    if (it == sch.end()) {
      if (body.empty()) throw SchemaError(sec + ": key outside a section");
      throw SchemaError(sec + ": unknown section");
    }
    for (const auto& [key, val] : body) {
      if (!it->second.count(key)) throw SchemaError(sec + "." + key + ": unknown key");
      (void)val;
    }
  }

  Reader r(tree);
  ExperimentConfig c;
  c.source = source;

  auto& g = c.geometry;
  g.kind = r.str("geometry", "kind", g.kind);
  g.n = r.integer("geometry", "n", g.n);
  g.r_max = r.num("geometry", "r_max", g.r_max);
  for (const char* p : {"a1", "alpha", "A", "c"})
    if (auto v = r.raw("geometry", p)) g.params[p] = r.num("geometry", p, 0);
  g.branch = r.str("geometry", "branch", g.branch);
  g.Q = r.num("geometry", "Q", g.Q);
  g.mu = r.num("geometry", "mu", g.mu);
  g.R = r.num("geometry", "R", g.R);
  g.D = r.num("geometry", "D", g.D);
  require(g.n >= 2, "geometry.n", "must be at least 2");
  require(g.r_max > 0, "geometry.r_max", "must be positive");
  require(g.kind == "curvature" || g.kind == "euclidean" || g.kind == "hyperbolic_sinh" || g.kind == "type_I" ||
              g.kind == "type_II" || g.kind == "type_IV",
          "geometry.kind", "unknown kind '" + g.kind + "'");
  require(g.branch == "upper" || g.branch == "lower", "geometry.branch", "must be upper or lower");

  auto& p = c.pde;
  p.m = r.num("pde", "m", p.m);
  try {
    p.datum = datum_shape_from_string(r.str("pde", "datum", "box"));
  } catch (const SchemaError&) {
    throw SchemaError("pde.datum: must be box or bump");
  }
  p.support = r.num("pde", "support", p.support);
  p.sup = r.num("pde", "sup", p.sup);
  require(p.m > 1, "pde.m", "must exceed 1");
  require(p.support > 0, "pde.support", "must be positive");
  require(p.sup > 0, "pde.sup", "must be positive");

  auto& u = c.run;
  u.T = r.num("run", "T", u.T);
  u.t_first = r.num("run", "t_first", u.t_first);
  u.samples = r.integer("run", "samples", u.samples);
  u.N = r.integer("run", "N", u.N);
  try {
    u.grading = grading_from_string(r.str("run", "grading", "uniform"));
    u.integrator = integrator_from_string(r.str("run", "integrator", "rkl2"));
  } catch (const SchemaError& e) {
    throw SchemaError(std::string("run: ") + e.what());
  }
  u.R_max = r.num("run", "R_max", u.R_max);
  u.cfl = r.num("run", "cfl", u.cfl);
  u.time_accuracy = r.num("run", "time_accuracy", u.time_accuracy);
  u.store_fields = r.flag("run", "store_fields", u.store_fields);
  require(u.T > 0, "run.T", "must be positive");
  require(u.t_first > 0 && u.t_first < u.T, "run.t_first", "must lie in (0, T)");
  require(u.samples >= 2, "run.samples", "need at least 2");
  require(u.N >= 100, "run.N", "need at least 100 cells");
  require(u.R_max >= 0, "run.R_max", "must be nonnegative");
  require(u.cfl > 0 && u.cfl <= 1, "run.cfl", "must lie in (0, 1]");
  require(u.time_accuracy > 0, "run.time_accuracy", "must be positive");

  auto& v = c.verify;
  if (auto b = r.raw("verify", "barriers")) v.barriers = *b == "none" ? std::vector<std::string>{} : split_list(*b);
  for (const auto& b : v.barriers)
    require(b == "upper" || b == "lower", "verify.barriers", "entries must be upper or lower");
  v.regime = r.str("verify", "regime", v.regime);
  v.residual_tol = r.num("verify", "residual_tol", v.residual_tol);
  v.residual_points = r.integer("verify", "residual_points", v.residual_points);
  v.residual_times = r.integer("verify", "residual_times", v.residual_times);
  v.sandwich = r.flag("verify", "sandwich", v.sandwich);
  v.fit = r.flag("verify", "fit", v.fit);
  v.fit_window = r.num("verify", "fit_window", v.fit_window);
  v.alpha_tol = r.num("verify", "alpha_tol", v.alpha_tol);
  v.beta_tol = r.num("verify", "beta_tol", v.beta_tol);
  v.waiting_threshold = r.num("verify", "waiting_threshold", v.waiting_threshold);
  require(v.residual_tol > 0, "verify.residual_tol", "must be positive");
  require(v.residual_points >= 100, "verify.residual_points", "need at least 100");
  require(v.residual_times >= 2, "verify.residual_times", "need at least 2");
  require(v.fit_window > 0 && v.fit_window <= 1, "verify.fit_window", "must lie in (0, 1]");
  require(v.alpha_tol >= 0, "verify.alpha_tol", "must be nonnegative");
  require(v.beta_tol >= 0, "verify.beta_tol", "must be nonnegative");
  require(v.waiting_threshold > 0, "verify.waiting_threshold", "must be positive");
  if (v.regime != "auto") {
    try {
      (void)regime_kind_from_string(v.regime);
    } catch (const SchemaError&) {
      throw SchemaError("verify.regime: unknown regime '" + v.regime + "'");
    }
  }

  auto& o = c.output;
  o.dir = r.str("output", "dir", o.dir);
  o.psi = r.flag("output", "psi", o.psi);
  o.rho = r.flag("output", "rho", o.rho);
  o.fields = r.flag("output", "fields", o.fields);
  o.fields_stride = r.integer("output", "fields_stride", o.fields_stride);
  require(o.fields_stride >= 1, "output.fields_stride", "must be at least 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string schema_text() {
  std::ostringstream os;
  for (const auto& [sec, keys] : schema()) {
    os << "[" << sec << "]\n";
    for (const auto& k : keys) os << "  " << k << "\n";
  }
  return os.str();
}

ModelFunction build_geometry(const GeometryConfig& g) {
  if (g.kind == "curvature") {
    const auto prof = g.branch == "upper" ? CurvatureProfile::upper(g.Q, g.mu, g.R)
                                          : CurvatureProfile::lower(g.Q, g.mu, g.R, g.D);
    return solve_psi_from_curvature(prof, g.r_max, g.n);
  }
  return make_closed_form(model_kind_from_string(g.kind), g.params, g.n, g.r_max);
}

}  // namespace pmelab
