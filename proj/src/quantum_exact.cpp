#include "fidelity/quantum_exact.hpp"

#include <fftw3.h>

#include <cmath>
#include <iostream>
#include <mutex>

#include "fidelity/classical_dynamics.hpp"
#include "fidelity/parallel.hpp"

namespace fidelity {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

QuantumState normalized(Eigen::VectorXcd v) {
  const double nrm = v.norm();
  if (!(nrm > 0.0)) throw ValidationError("cannot normalize a zero state");
  v /= nrm;
  return QuantumState{std::move(v)};
}

}  // namespace

double MixedState::total_weight() const {
  double s = 0.0;
  for (const auto& c : components) s += c.weight;
  return s;
}

Eigen::MatrixXcd MixedState::density_matrix() const {
  if (components.empty()) return {};
  const auto n = components.front().state.amplitudes.size();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& c : components) rho += c.weight * c.state.amplitudes * c.state.amplitudes.adjoint();
  return rho;
}

int snap_position(double Q, const MapParams& params) {
  const double x = wrap_angle(Q) / params.cell();
  const long long j = std::llround(x);
  if (std::abs(x - static_cast<double>(j)) > 1e-9) {
    std::cerr << "warning: position " << Q << " snapped to grid index " << ((j % params.n + params.n) % params.n)
              << " (displacement " << (x - static_cast<double>(j)) << " cells)\n";
  }
  return static_cast<int>(((j % params.n) + params.n) % params.n);
}

int snap_momentum(double P, const MapParams& params) {
  const double x = P / params.hbar;
  const long long l = std::llround(x);
  if (std::abs(x - static_cast<double>(l)) > 1e-9) {
    std::cerr << "warning: momentum " << P << " snapped to grid index " << l << "\n";
  }
  return static_cast<int>(((l % params.n) + params.n) % params.n);
}

int signed_momentum_index(int l, int n) { return l >= (n + 1) / 2 ? l - n : l; }

QuantumState position_state(int j, int n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  v[j] = 1.0;
  return QuantumState{std::move(v)};
}

PreparedState make_state(const StateSpec& spec, const MapParams& params) {
  validate_spec(spec, params);
  const int n = params.n;
  return std::visit(
      overloaded{
          [&](const spec::PositionState& s) -> PreparedState {
            return position_state(snap_position(s.Q, params), n);
          },
          [&](const spec::MomentumState& s) -> PreparedState {
            const int l = snap_momentum(s.P, params);
            const double p = params.hbar * l;
            Eigen::VectorXcd v(n);
            for (int j = 0; j < n; ++j) v[j] = std::polar(1.0 / std::sqrt(double(n)), p * params.cell() * j / params.hbar);
            return QuantumState{std::move(v)};
          },
          [&](const spec::Gaussian& s) -> PreparedState {
            Eigen::VectorXcd v(n);
            const double s2 = s.sigma * s.sigma;
            for (int j = 0; j < n; ++j) {
              cplx acc = 0.0;
              for (int m = -3; m <= 3; ++m) {
                const double x = params.cell() * j - s.Q + kTwoPi * m;
                acc += std::exp(cplx(-x * x / (2.0 * s2), s.P * x / params.hbar));
              }
              v[j] = acc;
            }
            return normalized(std::move(v));
          },
          [&](const spec::CoherentPair& s) -> PreparedState {
            const int j1 = snap_position(s.Q1, params);
            const int j2 = snap_position(s.Q2, params);
            if (j1 == j2) throw ValidationError("coherent pair: Q1 and Q2 coincide on the grid (degenerate superposition)");
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
            v[j1] = 1.0 / std::sqrt(2.0);
            v[j2] = 1.0 / std::sqrt(2.0);
            return QuantumState{std::move(v)};
          },
          [&](const spec::IncoherentPair& s) -> PreparedState {
            const int j1 = snap_position(s.Q1, params);
            const int j2 = snap_position(s.Q2, params);
            MixedState m;
            m.components.push_back({0.5, position_state(j1, n)});
            m.components.push_back({0.5, position_state(j2, n)});
            return m;
          },
          [&](const spec::RandomState&) -> PreparedState {
            MixedState m;
            m.components.reserve(n);
            for (int j = 0; j < n; ++j) m.components.push_back({1.0 / n, position_state(j, n)});
            return m;
          },
          [&](const spec::DensityMatrix& s) -> PreparedState {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.rho);
            MixedState m;
            double total = 0.0;
            for (int i = n - 1; i >= 0; --i) {
              const double w = es.eigenvalues()[i];
              if (w <= 1e-14) continue;
              m.components.push_back({w, QuantumState{es.eigenvectors().col(i)}});
              total += w;
            }
            for (auto& c : m.components) c.weight /= total;
            return m;
          },
      },
      spec);
}

Eigen::MatrixXcd density_matrix_of(const StateSpec& spec, const MapParams& params) {
  if (const auto* dm = std::get_if<spec::DensityMatrix>(&spec)) {
    validate_spec(spec, params);
    return dm->rho;
  }
  const PreparedState st = make_state(spec, params);
  if (const auto* pure = std::get_if<QuantumState>(&st)) return pure->amplitudes * pure->amplitudes.adjoint();
  return std::get<MixedState>(st).density_matrix();
}

struct SplitOperatorPropagator::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(int n) {
    std::vector<fftw_complex> scratch(static_cast<std::size_t>(n));
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_1d(n, scratch.data(), scratch.data(), FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward = fftw_plan_dft_1d(n, scratch.data(), scratch.data(), FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SplitOperatorPropagator::SplitOperatorPropagator(const MapParams& params)
    : params_((params.validate(), params)), plans_(std::make_unique<Plans>(params.n)) {
  const int n = params_.n;
  const double hbar = params_.hbar;
  drift_.resize(n);
  kick_plain_.resize(n);
  kick_perturbed_.resize(n);
  for (int l = 0; l < n; ++l) {
    const double p = hbar * signed_momentum_index(l, n);
    drift_[l] = std::polar(1.0 / n, -p * p / (2.0 * hbar));
  }
  for (int j = 0; j < n; ++j) {
    const double q = params_.cell() * j;
    const double w = potentials::W(q, params_.k);
    kick_plain_[j] = std::polar(1.0, -w / hbar);
    kick_perturbed_[j] = std::polar(1.0, -(w + params_.epsilon * potentials::V(q)) / hbar);
  }
}

SplitOperatorPropagator::~SplitOperatorPropagator() = default;
SplitOperatorPropagator::SplitOperatorPropagator(SplitOperatorPropagator&&) noexcept = default;
SplitOperatorPropagator& SplitOperatorPropagator::operator=(SplitOperatorPropagator&&) noexcept = default;

void SplitOperatorPropagator::step(Eigen::VectorXcd& psi, bool use_perturbation, Direction direction) const {
  if (psi.size() != params_.n) throw ValidationError("propagator: state dimension mismatch");
  auto* data = reinterpret_cast<fftw_complex*>(psi.data());
  const Eigen::VectorXcd& kick = use_perturbation ? kick_perturbed_ : kick_plain_;
  if (direction == Direction::forward) {
    fftw_execute_dft(plans_->forward, data, data);
    psi.array() *= drift_.array();
    fftw_execute_dft(plans_->backward, data, data);
    psi.array() *= kick.array();
  } else {
    psi.array() *= kick.array().conjugate();
    fftw_execute_dft(plans_->forward, data, data);
    psi.array() *= drift_.array().conjugate();
    fftw_execute_dft(plans_->backward, data, data);
  }
}

QuantumState evolve_step(const QuantumState& state, const MapParams& params, bool use_perturbation,
                         Direction direction) {
  SplitOperatorPropagator prop(params);
  QuantumState out = state;
  prop.step(out.amplitudes, use_perturbation, direction);
  return out;
}

std::vector<cplx> pure_fidelity_amplitude(const QuantumState& psi, int t_max, const SplitOperatorPropagator& prop) {
  std::vector<cplx> out(static_cast<std::size_t>(t_max) + 1);
  Eigen::VectorXcd plain = psi.amplitudes;
  Eigen::VectorXcd perturbed = psi.amplitudes;
  out[0] = perturbed.dot(plain);
  for (int t = 1; t <= t_max; ++t) {
    prop.step(plain, false, Direction::forward);
    prop.step(perturbed, true, Direction::forward);
    out[static_cast<std::size_t>(t)] = perturbed.dot(plain);  // ⟨ψ^ε(t)|ψ⁰(t)⟩
  }
  return out;
}

FidelitySeries exact_fidelity(const StateSpec& spec, int t_max, const MapParams& params, int workers) {
  if (t_max < 0) throw ValidationError("exact_fidelity: t_max must be >= 0");
  const PreparedState st = make_state(spec, params);

  MixedState mixed;
  if (const auto* pure = std::get_if<QuantumState>(&st)) {
    mixed.components.push_back({1.0, *pure});
  } else {
    mixed = std::get<MixedState>(st);
  }

  const std::size_t nc = mixed.components.size();
  std::vector<std::vector<cplx>> per_component(nc);
  const std::size_t nw = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), nc));
  // One propagator per worker chunk: contiguous chunks of components.
  const std::size_t chunk = (nc + nw - 1) / nw;
  parallel_for(nw, static_cast<int>(nw), [&](std::size_t w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(nc, lo + chunk);
    if (lo >= hi) return;
    SplitOperatorPropagator prop(params);
    for (std::size_t i = lo; i < hi; ++i)
      per_component[i] = pure_fidelity_amplitude(mixed.components[i].state, t_max, prop);
  });

  FidelitySeries out;
  out.method = Method::exact;
  out.n_samples = static_cast<long>(nc);
  const std::size_t nt = static_cast<std::size_t>(t_max) + 1;
  out.times.resize(nt);
  out.amplitude.assign(nt, cplx{});
  out.fidelity.resize(nt);
  out.std_error.assign(nt, 0.0);
  out.amplitude_std_error.assign(nt, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    out.times[t] = static_cast<int>(t);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < nc; ++i) acc += mixed.components[i].weight * per_component[i][t];
    out.amplitude[t] = t == 0 ? cplx(1.0, 0.0) : acc;
    out.fidelity[t] = std::norm(out.amplitude[t]);
  }
  return out;
}

}  // namespace fidelity
