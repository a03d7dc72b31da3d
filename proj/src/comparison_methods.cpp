#include "fidelity/comparison_methods.hpp"

#include <cmath>

#include "fidelity/classical_dynamics.hpp"
#include "fidelity/parallel.hpp"
#include "fidelity/phase_space.hpp"
#include "fidelity/rng.hpp"

namespace fidelity {

FidelitySeries wigner_overlap_fidelity(const StateSpec& spec, const EstimatorConfig& config, const MapParams& params) {
  config.validate();
  params.validate();
  double purity = 1.0;
  if (std::holds_alternative<spec::RandomState>(spec)) {
    purity = 1.0 / params.n;
  } else if (!std::holds_alternative<spec::Gaussian>(spec)) {
    throw ValidationError("wigner_overlap: signed Wigner overlap not supported for spec '" + spec_type_name(spec) +
                          "' (requires a nonnegative pointwise Wigner function)");
  }
  const WignerSampler sampler(spec, params);
  const auto n = static_cast<std::size_t>(config.n_trajectories);
  const auto nt = static_cast<std::size_t>(config.t_max) + 1;
  std::vector<cplx> terms(n * nt);
  std::vector<double> weights(n);
  parallel_for(n, config.workers, [&](std::size_t i) {
    Engine eng = sample_stream(config.seed, i);
    const TorusPoint x0 = sampler.draw(eng).point;
    const double w0 = wigner_eval(spec, x0, params);
    weights[i] = w0;
    terms[i] = w0;
    for (std::size_t t = 1; t < nt; ++t) terms[t * n + i] = wigner_eval(spec, echo_endpoint(x0, static_cast<int>(t), params), params);
  });
  auto out = summarize_ensemble(Method::wigner_overlap, terms, weights, config.t_max);
  for (std::size_t t = 0; t < nt; ++t) {
    out.amplitude[t] = purity * out.amplitude[t].real();
    out.fidelity[t] = out.amplitude[t].real();
    // M^Wigner is a real overlap, not a squared amplitude.
    out.std_error[t] = purity * out.amplitude_std_error[t];
    out.amplitude_std_error[t] = out.std_error[t];
  }
  return out;
}

CorrelatorSeries potential_correlator(PotentialKind which, const CorrelatorOptions& options, const MapParams& params) {
  params.validate();
  if (options.max_lag < 0) throw ValidationError("correlator: max_lag must be >= 0");
  if (options.n_samples < 2) throw ValidationError("correlator: need at least 2 samples");
  const auto n = static_cast<std::size_t>(options.n_samples);
  const auto nl = static_cast<std::size_t>(options.max_lag) + 1;
  auto potential = [&](double q) { return which == PotentialKind::W ? potentials::W(q, params.k) : potentials::V(q); };

  // values[t * n + i] = U(q_i(±t))
  std::vector<double> values(n * nl);
  const std::uint64_t tag = options.time_reversed ? 1 : 0;
  parallel_for(n, options.workers, [&](std::size_t i) {
    Engine eng = sample_stream(options.seed, i, tag);
    TorusPoint x{kTwoPi * uniform01(eng), kTwoPi * uniform01(eng)};
    values[i] = potential(x.q);
    for (std::size_t t = 1; t < nl; ++t) {
      x = options.time_reversed ? inverse_map_step(x, params, false) : map_step(x, params, false);
      values[t * n + i] = potential(x.q);
    }
  });

  const double mean = pairwise_sum(std::span<const double>(values)) / static_cast<double>(values.size());
  CorrelatorSeries out;
  out.lags.resize(nl);
  out.values.resize(nl);
  out.std_error.resize(nl);
  std::vector<double> prod(n);
  for (std::size_t t = 0; t < nl; ++t) {
    for (std::size_t i = 0; i < n; ++i) prod[i] = (values[t * n + i] - mean) * (values[i] - mean);
    const double c = pairwise_sum(std::span<const double>(prod)) / static_cast<double>(n);
    double var = 0.0;
    for (double v : prod) var += (v - c) * (v - c);
    var /= static_cast<double>(n - 1);
    out.lags[t] = static_cast<int>(t);
    out.values[t] = c;
    out.std_error[t] = std::sqrt(var / static_cast<double>(n));
  }
  out.diffusion_sum = 0.5 * out.values[0];
  double total = 0.0;
  for (std::size_t t = 0; t < nl; ++t) {
    if (t > 0) out.diffusion_sum += out.values[t];
    total += out.values[t];
  }
  out.asymptotic_mean = total / static_cast<double>(nl);
  return out;
}

}  // namespace fidelity
