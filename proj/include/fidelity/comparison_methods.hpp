#pragma once

#include <cstdint>
#include <vector>

#include "fidelity/dephasing_estimator.hpp"
#include "fidelity/types.hpp"

namespace fidelity {

/// M^Wigner(t) = (2πħ) ∫ ρ_W(x₀) ρ_W(echo_t(x₀)), estimated as
///   purity · Σ_i ρ_W(echo_t(x_i)) / Σ_i ρ_W(x_i)
/// with x_i drawn from ρ_W. The t = 0 ratio is the exact purity (2πħ)∫ρ_W²:
/// 1 for a Gaussian, 1/n for the random state. Only nonnegative Wigner
/// functions (Gaussian, RandomState) are supported.
FidelitySeries wigner_overlap_fidelity(const StateSpec& spec, const EstimatorConfig& config, const MapParams& params);

enum class PotentialKind { W, V };

struct CorrelatorSeries {
  std::vector<int> lags;
  std::vector<double> values;
  std::vector<double> std_error;
  /// K = C(0)/2 + Σ_{t≥1} C(t), truncated at the last lag.
  double diffusion_sum = 0.0;
  /// C^∞ = mean of C over lags 0..L.
  double asymptotic_mean = 0.0;
};

struct CorrelatorOptions {
  int max_lag = 50;
  long n_samples = 10000;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Pair r(0) with r(-t) using the inverse map instead of r(t).
  bool time_reversed = false;
};

/// C(t) = ⟨δU[r(t)] δU[r(0)]⟩ over uniform (Liouville) initial conditions and
/// the unperturbed map, with δU the potential minus its ensemble mean.
CorrelatorSeries potential_correlator(PotentialKind which, const CorrelatorOptions& options, const MapParams& params);

}  // namespace fidelity
