#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fidelity/comparison_methods.hpp"
#include "fidelity/dephasing_estimator.hpp"
#include "fidelity/types.hpp"

namespace fidelity {

inline constexpr std::string_view kVersion = "0.1.0";

struct ExperimentConfig {
  MapParams params = MapParams::make(100, 2.0, 0.03);
  StateSpec spec = spec::RandomState{};
  std::vector<Method> methods{Method::exact, Method::dr_general};
  int t_max = 50;
  long n_trajectories = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_path = "fidelity.csv";
  MomentumSampling momenta = MomentumSampling::continuous;

  /// Throws ValidationError for bad parameters or method/spec mismatches.
  void validate() const;
  EstimatorConfig estimator() const;
};

nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Flat overrides applied on top of a file or preset.
struct ConfigOverrides {
  std::optional<int> n;
  std::optional<double> k;
  std::optional<double> epsilon;
  std::optional<double> hbar;
  std::optional<int> t_max;
  std::optional<long> n_trajectories;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output_path;
  std::optional<MomentumSampling> momenta;

  void apply(ExperimentConfig& c) const;
};

const std::vector<std::string>& preset_names();
/// Throws ValidationError listing the valid names for an unknown preset.
ExperimentConfig preset_config(const std::string& name);

/// Computes one series for a method on the configured state.
FidelitySeries compute_method(Method method, const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<FidelitySeries> series;  // one per configured method, same order
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// CSV with header `t,method,M,O_re,O_im,std_err,n_samples,seed`, one row per
/// (t, method); floats with 17 significant digits.
std::string format_csv(const ExperimentConfig& config, const ExperimentResult& result);

/// Writes the CSV to config.output_path and the resolved-config JSON sidecar
/// next to it. Throws IoError when a file cannot be written.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result);
std::string sidecar_path(const std::string& csv_path);

struct DiagnosticsConfig {
  MapParams params = MapParams::make(100, 2.0, 0.03);
  CorrelatorOptions options;
  std::string output_path = "diagnostics.csv";
};

struct DiagnosticsResult {
  CorrelatorSeries w;
  CorrelatorSeries v;
  nlohmann::json summary;
};

DiagnosticsResult run_diagnostics(const DiagnosticsConfig& config);
std::string format_diagnostics_csv(const DiagnosticsResult& result);
void write_diagnostics(const DiagnosticsConfig& config, const DiagnosticsResult& result);

}  // namespace fidelity
