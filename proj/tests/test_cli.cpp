#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pmelab/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

std::string cli() {
  const char* p = std::getenv("PMELAB_CLI");
  REQUIRE_MESSAGE(p != nullptr, "PMELAB_CLI must point at the pmelab binary");
  return p;
}

Result sh(const std::string& args) {
  const std::string cmd = cli() + " " + args + " 2>&1";
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t k = fread(buf.data(), 1, buf.size(), f)) out.append(buf.data(), k);
  const int st = pclose(f);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("pmelab_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kFlat = R"([geometry]
kind = euclidean
n = 3

[pde]
m = 2
support = 1
sup = 1

[run]
T = 300
t_first = 0.1
samples = 21
N = 400
R_max = 8

[verify]
barriers = upper, lower
)";

}  // namespace

TEST_CASE("predict prints the subcritical exponents") {
  auto r = sh("predict --regime qh --mu 0.5 --n 3 --m 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("alpha = 1\n") != std::string::npos);
  CHECK(r.out.find("beta = 0.3333333333333333") != std::string::npos);
}

TEST_CASE("exit codes by error class") {
  const auto d = scratch("codes");
  SUBCASE("usage errors are schema errors") { CHECK(sh("run").code == 2); }
  SUBCASE("unknown key names the key") {
    const auto p = write(d / "bad.cfg", std::string(kFlat) + "\n[output]\nbogus = 3\n");
    auto r = sh("run " + p.string() + " --out-dir " + (d / "o").string());
    CHECK(r.code == 2);
    CHECK(r.out.find("output.bogus") != std::string::npos);
  }
  SUBCASE("first offending key in file order") {
    const auto p = write(d / "bad2.cfg", "[pde]\nm = 2\nzeta = 1\n[run]\nalpha = 2\n");
    auto r = sh("run " + p.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("pde.zeta") != std::string::npos);
  }
  SUBCASE("bad value") {
    const auto p = write(d / "bad3.cfg", "[pde]\nm = two\n");
    CHECK(sh("run " + p.string()).code == 2);
  }
  SUBCASE("regime refused") { CHECK(sh("predict --regime qh --mu 1.5").code == 3); }
  SUBCASE("regime mismatch with the geometry") {
    const auto p = write(d / "mis.cfg", std::string(kFlat) + "regime = qh_subcritical\n");
    CHECK(sh("run " + p.string() + " --out-dir " + (d / "o").string()).code == 3);
  }
  SUBCASE("verification failure") {
    const auto p = write(d / "tight.cfg", std::string(kFlat) + "alpha_tol = 1e-9\n");
    auto r = sh("run " + p.string() + " --out-dir " + (d / "o").string());
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL") != std::string::npos);
  }
  SUBCASE("numerical failure") {
    const auto p = write(d / "short.csv", "t,sup_norm\n1,1\n2,0.5\n3,0.3\n");
    CHECK(sh("fit --traj " + p.string() + " --m 2 --out-dir " + d.string()).code == 4);
  }
  SUBCASE("missing prerequisite file") {
    CHECK(sh("fit --traj " + (d / "nope.csv").string() + " --m 2").code == 2);
  }
}

TEST_CASE("run writes its artifacts and verify-barriers passes on them") {
  const auto d = scratch("run");
  const auto cfg = write(d / "flat.cfg", kFlat);
  const auto out = d / "out";
  auto r = sh("run " + cfg.string() + " --out-dir " + out.string());
  CHECK(r.code == 0);
  for (const char* f : {"traj.csv", "barriers.txt", "residual.csv", "fits.csv", "sandwich.txt", "summary.txt"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  auto v = sh("verify-barriers " + cfg.string() + " --out-dir " + out.string());
  CHECK(v.code == 0);
  CHECK(v.out.find("PASS qe_barenblatt_upper") != std::string::npos);
  CHECK(v.out.find("FAIL") == std::string::npos);
}

TEST_CASE("identical configs give byte-identical outputs") {
  const auto d = scratch("det");
  const auto cfg = write(d / "flat.cfg", kFlat);
  REQUIRE(sh("run " + cfg.string() + " --out-dir " + (d / "a").string()).code == 0);
  REQUIRE(sh("--threads 1 run " + cfg.string() + " --out-dir " + (d / "b").string()).code == 0);
  for (const char* f : {"traj.csv", "barriers.txt", "residual.csv", "fits.csv", "summary.txt"})
    CHECK_MESSAGE(slurp(d / "a" / f) == slurp(d / "b" / f), f);
}

TEST_CASE("PMELAB_OUT sets the default output root") {
  const auto d = scratch("env");
  const auto cfg = write(d / "flat.cfg", std::string(kFlat) + "\n[output]\ndir = sub\n");
  const std::string cmd = "PMELAB_OUT=" + d.string() + " " + cli() + " build-geometry " + cfg.string() + " >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(d / "sub" / "psi.csv"));
}

TEST_CASE("transform on flat space gives a unit weight") {
  const auto d = scratch("tr");
  const auto cfg = write(d / "flat.cfg", kFlat);
  REQUIRE(sh("transform " + cfg.string() + " --out-dir " + d.string()).code == 0);
  auto tab = pmelab::read_csv((d / "rho.csv").string());
  const auto rho = tab.column("rho");
  REQUIRE(rho.size() > 10);
  for (double v : rho) CHECK(v == doctest::Approx(1).epsilon(1e-8));
}

TEST_CASE("fit recovers a synthetic law") {
  const auto d = scratch("fit");
  std::ostringstream os;
  os << "t,sup_norm\n";
  os.precision(17);
  for (int i = 0; i < 40; ++i) {
    const double t = std::pow(10.0, 1 + 5.0 * i / 39);
    os << t << "," << std::pow(t, -0.6) << "\n";
  }
  const auto p = write(d / "traj.csv", os.str());
  auto r = sh("fit --traj " + p.string() + " --m 2 --regime qe_subcritical --n 3 --out-dir " + d.string());
  CHECK(r.code == 0);
  auto tab = pmelab::read_csv((d / "fits.csv").string());
  REQUIRE(tab.rows.size() == 1);
  CHECK(tab.column("alpha_fit")[0] == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(tab.column("alpha_pred")[0] == doctest::Approx(0.6).epsilon(1e-12));
  sh("fit --traj " + p.string() + " --m 2 --regime qe_subcritical --append --out-dir " + d.string());
  CHECK(pmelab::read_csv((d / "fits.csv").string()).rows.size() == 2);
}

TEST_CASE("sweep runs configs side by side") {
  const auto d = scratch("sweep");
  const auto a = write(d / "a.cfg", kFlat);
  const auto b = write(d / "b.cfg", kFlat);
  auto r = sh("sweep " + a.string() + " " + b.string() + " --out-dir " + (d / "o").string());
  CHECK(r.code == 0);
  CHECK(fs::exists(d / "o" / "a" / "traj.csv"));
  CHECK(slurp(d / "o" / "a" / "traj.csv") == slurp(d / "o" / "b" / "traj.csv"));
}
