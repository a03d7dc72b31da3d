#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fidelity/experiment.hpp"
#include "fidelity/serialization.hpp"

using namespace fidelity;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("fidelity_tests_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " + FIDELITY_CLI + " " + args + " > " + (scratch() / "stdout.txt").string() + " 2> " +
      (scratch() / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("presets match the figure captions") {
  struct Row {
    const char* name;
    int n;
    double k, eps;
    long traj;
  };
  const Row table[] = {{"fig1a", 1000, 0.95, 0.015, 1000}, {"fig1b", 1000, 0.95, 0.015, 1000},
                       {"fig1c", 1000, 0.95, 0.015, 1000}, {"fig2a", 200, 0.7, 0.02, 400},
                       {"fig2b", 200, 0.7, 0.02, 400},     {"fig3", 200, 0.7, 0.02, 200},
                       {"fig4", 100, 2.0, 0.03, 1000}};
  CHECK(preset_names().size() == 7);
  for (const auto& r : table) {
    CAPTURE(r.name);
    const auto c = preset_config(r.name);
    CHECK(c.params.n == r.n);
    CHECK(c.params.k == r.k);
    CHECK(c.params.epsilon == r.eps);
    CHECK(c.params.hbar == kTwoPi / r.n);
    CHECK(c.n_trajectories == r.traj);
    CHECK(c.t_max == 50);
    CHECK_NOTHROW(c.validate());
  }
  const double sig[] = {0.004, 0.16, 0.04};
  for (int i = 0; i < 3; ++i) {
    const auto g = std::get<spec::Gaussian>(preset_config(std::string("fig1") + char('a' + i)).spec);
    CHECK(g.Q == 0.7 * kPi);
    CHECK(g.P == 0.4 * kPi);
    CHECK(g.sigma == sig[i] * kPi);
  }
  const auto a = std::get<spec::CoherentPair>(preset_config("fig2a").spec);
  CHECK(a.Q1 == 0.4 * kPi);
  CHECK(a.Q2 == 1.2 * kPi);
  const auto b = std::get<spec::CoherentPair>(preset_config("fig2b").spec);
  CHECK(b.Q2 == 0.42 * kPi);
  const auto c = std::get<spec::IncoherentPair>(preset_config("fig3").spec);
  CHECK(c.Q1 == 0.4 * kPi);
  CHECK(c.Q2 == 0.42 * kPi);
  CHECK(std::holds_alternative<spec::RandomState>(preset_config("fig4").spec));

  using M = Method;
  CHECK(preset_config("fig1a").methods == std::vector<M>{M::exact, M::dr_general, M::dr_pos_form, M::dr_mom_form});
  CHECK(preset_config("fig2b").methods == std::vector<M>{M::exact, M::dr_general, M::dr_no_interference});
  CHECK(preset_config("fig4").methods == std::vector<M>{M::exact, M::dr_general});
  CHECK_THROWS_WITH_AS(preset_config("fig9"), doctest::Contains("fig1a"), ValidationError);
}

TEST_CASE("config serialization round trip") {
  for (const auto& name : preset_names()) {
    auto c = preset_config(name);
    c.seed = 0xFFFFFFFFFFFFFFFFull;
    c.momenta = MomentumSampling::grid;
    const auto j = config_to_json(c);
    const auto back = config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(config_to_json(back) == j);
    CHECK(back.params.hbar == c.params.hbar);
    CHECK(back.seed == c.seed);
    CHECK(spec_to_json(back.spec) == spec_to_json(c.spec));
    CHECK(back.spec.index() == c.spec.index());
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  rho(0, 1) = cplx(0.1, 0.05);
  rho(1, 0) = cplx(0.1, -0.05);
  const StateSpec dm = spec::DensityMatrix{rho};
  CHECK(std::get<spec::DensityMatrix>(spec_from_json(spec_to_json(dm))).rho == rho);
  for (double x : {0.7 * kPi, 0.42 * kPi, 1.0, 1e-3, 5.5}) CHECK(pi_units_to_radians(radians_to_pi_units(x)) == x);

  const auto j = nlohmann::json::parse(R"({"spec":{"type":"gaussian","Q":0.7,"P":0.4,"sigma":0.04}})");
  const auto c = config_from_json(j);
  CHECK(std::get<spec::Gaussian>(c.spec).Q == 0.7 * kPi);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"methods":["bogus"]})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"spec":{"type":"blob"}})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"t_max":"ten"})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse("[1,2]")), ValidationError);
}

TEST_CASE("validation of method and state combinations") {
  auto c = preset_config("fig4");
  c.methods = {Method::dr_pos_form};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.methods = {Method::dr_no_interference};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.methods = {Method::wigner_overlap};
  CHECK_NOTHROW(c.validate());
  c.methods = {};
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("CSV output") {
  auto c = preset_config("fig4");
  c.t_max = 5;
  c.n_trajectories = 50;
  const auto csv = format_csv(c, run_experiment(c));
  const auto ls = lines(csv);
  CHECK(ls.front() == "t,method,M,O_re,O_im,std_err,n_samples,seed");
  REQUIRE(ls.size() == 1 + 6 * 2);
  CHECK(ls[1].rfind("0,exact,1,1,0,0,100,1", 0) == 0);
  CHECK(ls[2].rfind("0,dr_general,1,1,0,", 0) == 0);
  CHECK(ls[3].rfind("1,exact,", 0) == 0);

  // Seventeen significant digits survive a text round trip.
  const auto r = run_experiment(c);
  const auto row = lines(format_csv(c, r))[5];
  std::vector<std::string> cells;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  CHECK(std::stod(cells[2]) == r.series[0].fidelity[2]);

  CHECK(sidecar_path("out/run.csv") == "out/run.json");
  CHECK(sidecar_path("run") == "run.json");
}

TEST_CASE("unperturbed experiment") {
  auto c = preset_config("fig1a");
  c.params = MapParams::make(1000, 0.95, 0.0);
  c.t_max = 20;
  c.n_trajectories = 100;
  for (const auto& s : run_experiment(c).series)
    for (double m : s.fidelity) CHECK(std::abs(m - 1.0) < 1e-10);
}

TEST_CASE("overrides") {
  auto c = preset_config("fig2a");
  ConfigOverrides o;
  o.n = 400;
  o.epsilon = 0.0;
  o.seed = 9;
  o.output_path = "x.csv";
  o.apply(c);
  CHECK(c.params.n == 400);
  CHECK(c.params.hbar == kTwoPi / 400);
  CHECK(c.params.k == 0.7);
  CHECK(c.seed == 9);
  CHECK(c.output_path == "x.csv");
  ConfigOverrides h;
  h.hbar = 0.01;
  h.apply(c);
  CHECK(c.params.hbar == 0.01);
  CHECK(c.params.n == 400);
}

TEST_CASE("diagnostics output") {
  DiagnosticsConfig d;
  d.params = MapParams::make(100, 2.0, 0.03);
  d.options.max_lag = 12;
  d.options.n_samples = 5000;
  const auto r = run_diagnostics(d);
  const auto ls = lines(format_diagnostics_csv(r));
  CHECK(ls.front() == "lag,C_W,C_V");
  CHECK(ls.size() == 14);
  for (const char* key : {"K_W", "K_V", "C_W_inf", "C_V_inf", "offdiag_rate_chaotic", "offdiag_rate_integrable"})
    CHECK(r.summary.contains(key));
  CHECK(std::abs(r.summary["C_W0"].get<double>() - 2.0) <= 3 * r.summary["C_W0_std_err"].get<double>());
  CHECK(std::abs(r.summary["C_V0"].get<double>() - 0.5) <= 3 * r.summary["C_V0_std_err"].get<double>());
}

TEST_CASE("command line") {
  const auto dir = scratch();
  const auto out = [&](const char* f) { return (dir / f).string(); };

  SUBCASE("preset runs are reproducible") {
    REQUIRE(cli("preset fig3 --seed 7 --out " + out("a.csv")) == 0);
    REQUIRE(cli("preset fig3 --seed 7 --workers 3 --out " + out("b.csv")) == 0);
    const auto a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(lines(a).size() == 1 + 51 * 2);
    const auto side = nlohmann::json::parse(slurp(dir / "a.json"));
    CHECK(side["version"] == std::string(kVersion));
    CHECK(side["config"]["seed"] == 7);
    CHECK(side["config"]["spec"]["type"] == "incoherent_pair");
  }
  SUBCASE("fig1a has four methods over t = 0..50") {
    REQUIRE(cli("preset fig1a --trajectories 50 --out " + out("f1.csv")) == 0);
    const auto ls = lines(slurp(dir / "f1.csv"));
    CHECK(ls.size() == 1 + 51 * 4);
    CHECK(ls.back().rfind("50,dr_mom_form,", 0) == 0);
  }
  SUBCASE("fig1a without perturbation") {
    REQUIRE(cli("preset fig1a --epsilon 0 --trajectories 20 --out " + out("f0.csv")) == 0);
    for (const auto& l : lines(slurp(dir / "f0.csv")))
      if (const auto at = l.find(",exact,"); at != std::string::npos) CHECK(std::abs(std::stod(l.substr(at + 7)) - 1.0) < 1e-10);
  }
  SUBCASE("seed precedence") {
    REQUIRE(cli("preset fig4 --t-max 3 --trajectories 10 --out " + out("s1.csv"), "FIDELITY_SEED=42") == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "s1.json"))["config"]["seed"] == 42);
    REQUIRE(cli("preset fig4 --t-max 3 --trajectories 10 --seed 5 --out " + out("s2.csv"), "FIDELITY_SEED=42") == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "s2.json"))["config"]["seed"] == 5);
    CHECK(cli("preset fig4 --out " + out("s3.csv"), "FIDELITY_SEED=abc") == 1);
  }
  SUBCASE("run from a config file") {
    std::ofstream(dir / "cfg.json") << R"({"params":{"n":64,"k":0.95,"epsilon":0.0},
      "spec":{"type":"gaussian","Q":0.5,"P":0.25,"sigma":0.1},"methods":["exact","dr_general","wigner_overlap"],
      "t_max":10,"n_trajectories":50,"seed":3})";
    REQUIRE(cli("run --config " + (dir / "cfg.json").string() + " --out " + out("r.csv")) == 0);
    const auto ls = lines(slurp(dir / "r.csv"));
    CHECK(ls.size() == 1 + 11 * 3);
    // Re-running the emitted sidecar config reproduces the CSV.
    REQUIRE(cli("run --config " + out("r.json") + " --out " + out("r2.csv")) == 0);
    CHECK(slurp(dir / "r.csv") == slurp(dir / "r2.csv"));
    // The sidecar of cfg.csv would be cfg.json itself.
    const auto before = slurp(dir / "cfg.json");
    CHECK(cli("run --config " + (dir / "cfg.json").string() + " --out " + out("cfg.csv")) == 1);
    CHECK(slurp(dir / "cfg.json") == before);
  }
  SUBCASE("exit codes") {
    CHECK(cli("preset nosuch") == 1);
    CHECK(slurp(dir / "stderr.txt").find("fig4") != std::string::npos);
    CHECK(cli("preset fig4 --out /nonexistent_dir/x/out.csv") == 2);
    CHECK(cli("run --config " + out("missing.json")) == 2);
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK(cli("run --config " + out("bad.json")) == 1);
    std::ofstream(dir / "mismatch.json") << R"({"spec":{"type":"random"},"methods":["dr_pos_form"]})";
    CHECK(cli("run --config " + out("mismatch.json") + " --out " + out("m.csv")) == 1);
    CHECK(cli("preset fig4 --n 1") == 1);
    CHECK(cli("preset fig4 --workers 0 --out " + out("w.csv")) == 1);
    CHECK(cli("frobnicate") == 1);
    CHECK(cli("--help") == 0);
  }
  SUBCASE("diagnostics") {
    REQUIRE(cli("diagnostics --k 2 --lags 10 --samples 2000 --out " + out("d.csv")) == 0);
    CHECK(lines(slurp(dir / "d.csv")).size() == 12);
    const auto s = nlohmann::json::parse(slurp(dir / "d.json"));
    CHECK(s.contains("K_W"));
    CHECK(s.contains("C_V_inf"));
    CHECK(cli("diagnostics --k 2 --lags -1 --out " + out("d2.csv")) == 1);
  }
}
