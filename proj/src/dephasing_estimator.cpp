#include "fidelity/dephasing_estimator.hpp"

#include <cmath>

#include "fidelity/classical_dynamics.hpp"
#include "fidelity/parallel.hpp"
#include "fidelity/rng.hpp"

namespace fidelity {

namespace {

// Per-sample contribution generator: fills row[0..t_max] with s·w·phase and
// returns the signed weight s·w.
template <class Gen>
FidelitySeries run_ensemble(Method method, const EstimatorConfig& config, const MapParams& params, Gen&& gen) {
  config.validate();
  params.validate();
  const auto n = static_cast<std::size_t>(config.n_trajectories);
  const auto nt = static_cast<std::size_t>(config.t_max) + 1;
  std::vector<cplx> terms(n * nt);
  std::vector<double> weights(n);
  parallel_for(n, config.workers, [&](std::size_t i) {
    Engine eng = sample_stream(config.seed, i);
    std::vector<cplx> row(nt);
    weights[i] = gen(eng, row);
    for (std::size_t t = 0; t < nt; ++t) terms[t * n + i] = row[t];
  });
  return summarize_ensemble(method, terms, weights, config.t_max);
}

void fill_phases(TorusPoint start, double signed_weight, const MapParams& params, std::vector<cplx>& row) {
  const auto ds = action_series(start, static_cast<int>(row.size()) - 1, params);
  for (std::size_t t = 0; t < row.size(); ++t) row[t] = std::polar(signed_weight, -ds[t] / params.hbar);
}

}  // namespace

void EstimatorConfig::validate() const {
  if (n_trajectories < 1) throw ValidationError("estimator: n_trajectories must be >= 1");
  if (t_max < 0) throw ValidationError("estimator: t_max must be >= 0");
  if (workers < 1) throw ValidationError("estimator: workers must be >= 1");
}

FidelitySeries summarize_ensemble(Method method, std::span<const cplx> terms, std::span<const double> weights,
                                  int t_max) {
  const std::size_t n = weights.size();
  const auto nt = static_cast<std::size_t>(t_max) + 1;
  if (n == 0 || terms.size() != n * nt) throw EstimationError("summarize_ensemble: no samples");
  const double wsum = pairwise_sum(weights);
  if (!(std::abs(wsum) > 0.0) || !std::isfinite(wsum))
    throw EstimationError("summarize_ensemble: zero effective sample weight");
  const double wbar = wsum / static_cast<double>(n);

  FidelitySeries out;
  out.method = method;
  out.n_samples = static_cast<long>(n);
  out.times.resize(nt);
  out.amplitude.resize(nt);
  out.fidelity.resize(nt);
  out.std_error.resize(nt);
  out.amplitude_std_error.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto col = terms.subspan(t * n, n);
    const cplx o = pairwise_sum(col) / wsum;
    // Ratio-estimator residuals r_i = (y_i - O w_i) / w̄.
    double vre = 0.0, vim = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx r = (col[i] - o * weights[i]) / wbar;
      vre += r.real() * r.real();
      vim += r.imag() * r.imag();
      cov += r.real() * r.imag();
    }
    const double dof = n > 1 ? static_cast<double>(n - 1) : 1.0;
    vre /= dof;
    vim /= dof;
    cov /= dof;
    const double nn = static_cast<double>(n);
    const double var_m = 4.0 * (o.real() * o.real() * vre + o.imag() * o.imag() * vim + 2.0 * o.real() * o.imag() * cov);
    out.times[t] = static_cast<int>(t);
    out.amplitude[t] = o;
    out.fidelity[t] = std::norm(o);
    out.std_error[t] = n > 1 ? std::sqrt(std::max(var_m, 0.0) / nn) : 0.0;
    out.amplitude_std_error[t] = n > 1 ? std::sqrt((vre + vim) / nn) : 0.0;
  }
  return out;
}

FidelitySeries dr_fidelity(const StateSpec& spec, const EstimatorConfig& config, const MapParams& params) {
  if (const auto* c = std::get_if<spec::CoherentPair>(&spec)) return dr_coherent_pair(c->Q1, c->Q2, config, params);
  if (const auto* c = std::get_if<spec::IncoherentPair>(&spec)) return dr_incoherent_pair(c->Q1, c->Q2, config, params);
  const WignerSampler sampler(spec, params, config.momenta);
  return run_ensemble(Method::dr_general, config, params, [&](Engine& eng, std::vector<cplx>& row) {
    const SignedSample s = sampler.draw(eng);
    const double sw = s.sign * s.importance_weight;
    fill_phases(s.point, sw, params, row);
    return sw;
  });
}

FidelitySeries dr_position_form(double Q, const EstimatorConfig& config, const MapParams& params) {
  auto out = dr_fidelity(spec::PositionState{Q}, config, params);
  out.method = Method::dr_pos_form;
  return out;
}

FidelitySeries dr_gaussian_pos_localized(double Q, double P, double sigma, const EstimatorConfig& config,
                                         const MapParams& params) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian: sigma must be > 0");
  const double sd_p = params.hbar / (sigma * std::sqrt(2.0));
  return run_ensemble(Method::dr_pos_form, config, params, [&](Engine& eng, std::vector<cplx>& row) {
    const double p0 = normal(eng, P, sd_p);
    fill_phases(TorusPoint::wrapped(Q, p0), 1.0, params, row);
    return 1.0;
  });
}

FidelitySeries dr_gaussian_mom_localized(double Q, double P, double sigma, const EstimatorConfig& config,
                                         const MapParams& params) {
  if (!(sigma > 0.0)) throw ValidationError("gaussian: sigma must be > 0");
  const double sd_q = sigma / std::sqrt(2.0);
  return run_ensemble(Method::dr_mom_form, config, params, [&](Engine& eng, std::vector<cplx>& row) {
    const double q0 = normal(eng, Q, sd_q);
    fill_phases(TorusPoint::wrapped(q0, P), 1.0, params, row);
    return 1.0;
  });
}

CoherentPairTerms dr_coherent_pair_terms(double Q1, double Q2, const EstimatorConfig& config,
                                         const MapParams& params) {
  config.validate();
  params.validate();
  const double q1 = snapped_position(Q1, params);
  const double q2 = snapped_position(Q2, params);
  if (q1 == q2) throw ValidationError("coherent pair: Q1 and Q2 coincide on the grid (degenerate superposition)");
  const double qm = wrap_angle(0.5 * (q1 + q2));
  const double separation = (q1 - q2) / params.hbar;
  const bool with_interference = config.interference;

  const auto n = static_cast<std::size_t>(config.n_trajectories);
  const auto nt = static_cast<std::size_t>(config.t_max) + 1;
  std::vector<cplx> total(n * nt), first(n * nt), second(n * nt), inter(n * nt);
  std::vector<double> weights(n);

  parallel_for(n, config.workers, [&](std::size_t i) {
    Engine eng = sample_stream(config.seed, i);
    double p0 = 0.0;
    if (config.momenta == MomentumSampling::grid) {
      p0 = params.cell() * std::uniform_int_distribution<int>(0, params.n - 1)(eng);
    } else {
      p0 = kTwoPi * uniform01(eng);
    }
    const double c = std::cos(separation * p0);
    const auto s1 = action_series({q1, p0}, config.t_max, params);
    const auto s2 = action_series({q2, p0}, config.t_max, params);
    const auto sm = action_series({qm, p0}, config.t_max, params);
    const double ci = with_interference ? c : 0.0;
    // Σ weights must reproduce Σ totals bit-for-bit at ε = 0.
    weights[i] = 0.5 * 1.0 + 0.5 * 1.0 + ci * 1.0;
    for (std::size_t t = 0; t < nt; ++t) {
      const cplx f1 = std::polar(1.0, -s1[t] / params.hbar);
      const cplx f2 = std::polar(1.0, -s2[t] / params.hbar);
      const cplx fm = std::polar(1.0, -sm[t] / params.hbar);
      const std::size_t k = t * n + i;
      first[k] = f1;
      second[k] = f2;
      inter[k] = c * fm;
      const cplx tot = 0.5 * f1 + 0.5 * f2 + ci * fm;
      total[k] = tot;
    }
  });

  CoherentPairTerms out;
  out.total = summarize_ensemble(with_interference ? Method::dr_general : Method::dr_no_interference, total,
                                 weights, config.t_max);
  out.first.resize(nt);
  out.second.resize(nt);
  out.interference.resize(nt);
  const double nn = static_cast<double>(n);
  for (std::size_t t = 0; t < nt; ++t) {
    out.first[t] = pairwise_sum(std::span<const cplx>(first).subspan(t * n, n)) / nn;
    out.second[t] = pairwise_sum(std::span<const cplx>(second).subspan(t * n, n)) / nn;
    out.interference[t] = pairwise_sum(std::span<const cplx>(inter).subspan(t * n, n)) / nn;
  }
  return out;
}

FidelitySeries dr_coherent_pair(double Q1, double Q2, const EstimatorConfig& config, const MapParams& params) {
  return dr_coherent_pair_terms(Q1, Q2, config, params).total;
}

FidelitySeries dr_incoherent_pair(double Q1, double Q2, const EstimatorConfig& config, const MapParams& params) {
  EstimatorConfig off = config;
  off.interference = false;
  // The two columns may coincide for a mixture; the pair path needs distinct
  // columns only for the interference term.
  if (snapped_position(Q1, params) == snapped_position(Q2, params)) {
    auto out = dr_fidelity(spec::PositionState{Q1}, off, params);
    out.method = Method::dr_no_interference;
    return out;
  }
  return dr_coherent_pair_terms(Q1, Q2, off, params).total;
}

FidelitySeries dr_random_state(const EstimatorConfig& config, const MapParams& params) {
  return dr_fidelity(spec::RandomState{}, config, params);
}

}  // namespace fidelity
