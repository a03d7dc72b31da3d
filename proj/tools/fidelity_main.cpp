// fidelity: command-line runner for echo-fidelity experiments.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fidelity/experiment.hpp"

using namespace fidelity;

namespace {

void add_overrides(CLI::App* cmd, ConfigOverrides& o, std::string& momenta) {
  cmd->add_option("--n", o.n, "Hilbert-space dimension");
  cmd->add_option("--k", o.k, "kick strength");
  cmd->add_option("--epsilon", o.epsilon, "perturbation strength");
  cmd->add_option("--hbar", o.hbar, "effective Planck constant (default 2*pi/n)");
  cmd->add_option("--t-max", o.t_max, "number of kicks");
  cmd->add_option("--trajectories", o.n_trajectories, "classical trajectories per DR curve");
  cmd->add_option("--seed", o.seed, "base random seed (overrides FIDELITY_SEED)");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--out", o.output_path, "output CSV path");
  cmd->add_option("--momenta", momenta, "momentum sampling: continuous or grid")
      ->check(CLI::IsMember({"continuous", "grid"}));
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("FIDELITY_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t pos = 0;
    const unsigned long long s = std::stoull(v, &pos);
    if (pos != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw ValidationError(std::string("FIDELITY_SEED is not an unsigned integer: '") + v + "'");
  }
}

// Precedence: command-line flag, then FIDELITY_SEED, then the file or preset.
void resolve(ExperimentConfig& c, ConfigOverrides o, const std::string& momenta) {
  if (!o.seed) o.seed = env_seed();
  if (!momenta.empty()) o.momenta = momenta == "grid" ? MomentumSampling::grid : MomentumSampling::continuous;
  o.apply(c);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

int execute(const ExperimentConfig& c) {
  const auto result = run_experiment(c);
  write_outputs(c, result);
  std::cerr << "wrote " << c.output_path << " and " << sidecar_path(c.output_path) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Echo fidelity of the perturbed quantum standard map: exact and semiclassical estimates"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  ConfigOverrides run_o;
  std::string run_momenta;
  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment described by a JSON config file");
  run->add_option("--config", config_path, "JSON config file")->required();
  add_overrides(run, run_o, run_momenta);

  ConfigOverrides preset_o;
  std::string preset_momenta;
  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "run a named figure preset");
  preset->add_option("name", preset_name, "preset name")->required();
  add_overrides(preset, preset_o, preset_momenta);
  auto* list = app.add_subcommand("presets", "list preset names");

  DiagnosticsConfig diag;
  int diag_n = diag.params.n;
  double diag_k = diag.params.k;
  double diag_eps = diag.params.epsilon;
  std::optional<double> diag_hbar;
  std::optional<std::uint64_t> diag_seed;
  auto* dg = app.add_subcommand("diagnostics", "potential correlators and diffusion sums");
  dg->add_option("--k", diag_k, "kick strength")->required();
  dg->add_option("--lags", diag.options.max_lag, "largest lag")->required();
  dg->add_option("--n", diag_n, "Hilbert-space dimension (sets default hbar)");
  dg->add_option("--epsilon", diag_eps, "perturbation strength used in the summary ratios");
  dg->add_option("--hbar", diag_hbar, "effective Planck constant");
  dg->add_option("--samples", diag.options.n_samples, "uniform phase-space samples");
  dg->add_option("--seed", diag_seed, "random seed (overrides FIDELITY_SEED)");
  dg->add_option("--workers", diag.options.workers, "worker threads");
  dg->add_option("--out", diag.output_path, "output CSV path");
  dg->add_flag("--time-reversed", diag.options.time_reversed, "correlate with backward-propagated trajectories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      ExperimentConfig c = load_config(config_path);
      resolve(c, run_o, run_momenta);
      std::error_code ec;
      if (std::filesystem::equivalent(config_path, sidecar_path(c.output_path), ec))
        throw ValidationError("output sidecar " + sidecar_path(c.output_path) + " would overwrite the input config");
      return execute(c);
    }
    if (*preset) {
      ExperimentConfig c = preset_config(preset_name);
      resolve(c, preset_o, preset_momenta);
      return execute(c);
    }
    if (*list) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (*dg) {
      diag.params = MapParams::make(diag_n, diag_k, diag_eps, diag_hbar.value_or(MapParams::default_hbar(diag_n)));
      if (!diag_seed) diag_seed = env_seed();
      if (diag_seed) diag.options.seed = *diag_seed;
      const auto r = run_diagnostics(diag);
      write_diagnostics(diag, r);
      std::cout << r.summary.dump(2) << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
