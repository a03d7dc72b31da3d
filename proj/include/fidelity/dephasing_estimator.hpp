#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fidelity/phase_space.hpp"
#include "fidelity/types.hpp"

namespace fidelity {

struct EstimatorConfig {
  long n_trajectories = 1000;
  std::uint64_t seed = 0;
  int t_max = 50;
  /// CoherentPair only: keep the interference column of the Wigner function.
  bool interference = true;
  int workers = 1;
  /// Conjugate-coordinate sampling for delta-supported states.
  MomentumSampling momenta = MomentumSampling::continuous;

  void validate() const;
};

/// Dephasing representation O(t) = ∫ ρ_W exp(-iΔS_t/ħ): importance-weighted,
/// signed, self-normalized mean over n_trajectories Wigner samples; each
/// trajectory is propagated once to t_max. CoherentPair and IncoherentPair
/// use the column decomposition with common momenta.
FidelitySeries dr_fidelity(const StateSpec& spec, const EstimatorConfig& config, const MapParams& params);

/// Position state |Q⟩: uniform p₀ at fixed q = Q (same path as dr_fidelity).
FidelitySeries dr_position_form(double Q, const EstimatorConfig& config, const MapParams& params);

/// Gaussian treated as localized in position: ΔS_t(Q, p₀), p₀ from the
/// momentum marginal.
FidelitySeries dr_gaussian_pos_localized(double Q, double P, double sigma, const EstimatorConfig& config,
                                         const MapParams& params);

/// Gaussian treated as localized in momentum: ΔS_t(q₀, P), q₀ from the
/// position marginal.
FidelitySeries dr_gaussian_mom_localized(double Q, double P, double sigma, const EstimatorConfig& config,
                                         const MapParams& params);

/// Per-term means of the coherent-pair decomposition, all over the same p₀.
struct CoherentPairTerms {
  FidelitySeries total;
  std::vector<cplx> first;         // O₁(t)
  std::vector<cplx> second;        // O₂(t)
  std::vector<cplx> interference;  // O_int(t)
};

/// O = ½[O₁ + O₂ + 2·O_int] with O_int = ⟨cos((Q1-Q2)p₀/ħ) exp(-iΔS_t(Q̄, p₀)/ħ)⟩.
/// With config.interference off the O_int term is dropped.
CoherentPairTerms dr_coherent_pair_terms(double Q1, double Q2, const EstimatorConfig& config,
                                         const MapParams& params);
FidelitySeries dr_coherent_pair(double Q1, double Q2, const EstimatorConfig& config, const MapParams& params);

/// Equal-weight mixture of |Q1⟩ and |Q2⟩; identical to dr_coherent_pair with
/// interference off.
FidelitySeries dr_incoherent_pair(double Q1, double Q2, const EstimatorConfig& config, const MapParams& params);

/// Completely random state: uniform torus sampling.
FidelitySeries dr_random_state(const EstimatorConfig& config, const MapParams& params);

/// Builds a series from per-sample contributions. `terms` is time-major
/// (terms[t * N + i]); `weights` holds the signed weights s_i w_i.
FidelitySeries summarize_ensemble(Method method, std::span<const cplx> terms, std::span<const double> weights,
                                  int t_max);

}  // namespace fidelity
