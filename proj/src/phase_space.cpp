#include "fidelity/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fidelity/quantum_exact.hpp"

namespace fidelity {

namespace {

double gaussian_wigner(const spec::Gaussian& g, TorusPoint x, double hbar) {
  // Sum over winding images; σ in the supported range makes |m| > 3 negligible.
  double acc = 0.0;
  const double s2 = g.sigma * g.sigma;
  const double ps2 = s2 / (hbar * hbar);
  for (int mq = -3; mq <= 3; ++mq) {
    const double dq = x.q - g.Q + kTwoPi * mq;
    const double fq = std::exp(-dq * dq / s2);
    if (fq == 0.0) continue;
    for (int mp = -3; mp <= 3; ++mp) {
      const double dp = x.p - g.P + kTwoPi * mp;
      acc += fq * std::exp(-dp * dp * ps2);
    }
  }
  return acc / (kPi * hbar);
}

// Unsmoothed half-integer lattice kernel:
//   (1/2n) Σ_x ρ[x, (a-x) mod n] exp(-iπ b (2x - a)/n)
// Its marginals live on the even rows/columns and it carries ghost images
// at a + n, b + n.
double lattice_kernel(const Eigen::MatrixXcd& rho, int a, int b) {
  const int n = static_cast<int>(rho.rows());
  const int twon = 2 * n;
  a = ((a % twon) + twon) % twon;
  b = ((b % twon) + twon) % twon;
  double acc = 0.0;
  for (int x = 0; x < n; ++x) {
    const int y = ((a - x) % n + n) % n;
    const cplx r = rho(x, y);
    if (r == cplx{}) continue;
    // (2x - a) b mod 2n keeps the phase argument small
    const long long m = ((static_cast<long long>(2 * x - a) * b) % twon + twon) % twon;
    const double phase = -kPi * static_cast<double>(m) / n;
    acc += r.real() * std::cos(phase) - r.imag() * std::sin(phase);
  }
  return acc / twon;
}

}  // namespace

double discrete_wigner_entry(const Eigen::MatrixXcd& rho, int a, int b) {
  // Averaging each entry with its lower neighbours in q and p cancels the
  // alternating ghost images and spreads each Planck cell over two half-cells.
  return 0.25 * (lattice_kernel(rho, a, b) + lattice_kernel(rho, a - 1, b) + lattice_kernel(rho, a, b - 1) +
                 lattice_kernel(rho, a - 1, b - 1));
}

Eigen::MatrixXd discrete_wigner(const Eigen::MatrixXcd& rho, const MapParams& params) {
  const int n = params.n;
  if (rho.rows() != n || rho.cols() != n) throw ValidationError("discrete_wigner: matrix dimension must equal n");
  const double asym = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw ValidationError("discrete_wigner: density matrix is not Hermitian");
  const cplx tr = rho.trace();
  if (std::abs(tr - cplx(1.0, 0.0)) > 1e-10) throw ValidationError("discrete_wigner: trace must be 1");

  const int twon = 2 * n;
  Eigen::MatrixXd raw(twon, twon);
  // raw(a, b) = (1/2n) e^{iπab/n} Σ_x f_a(x) e^{-2πi b x/n}; the inner sum
  // is an n-periodic DFT in b, so evaluate it once for b in [0, n).
  std::vector<cplx> twiddle(static_cast<std::size_t>(twon));
  for (int m = 0; m < twon; ++m) twiddle[m] = std::polar(1.0, -kPi * m / n);
  std::vector<cplx> f(static_cast<std::size_t>(n));
  std::vector<cplx> dft(static_cast<std::size_t>(n));
  for (int a = 0; a < twon; ++a) {
    for (int x = 0; x < n; ++x) f[x] = rho(x, ((a - x) % n + n) % n);
    for (int b = 0; b < n; ++b) {
      cplx s = 0.0;
      for (int x = 0; x < n; ++x) s += f[x] * twiddle[(2LL * x * b) % twon];
      dft[b] = s;
    }
    for (int b = 0; b < twon; ++b) {
      const cplx phase = twiddle[((-static_cast<long long>(a) * b) % twon + twon) % twon];
      raw(a, b) = (phase * dft[b % n]).real() / twon;
    }
  }
  Eigen::MatrixXd out(twon, twon);
  for (int a = 0; a < twon; ++a) {
    const int am = (a + twon - 1) % twon;
    for (int b = 0; b < twon; ++b) {
      const int bm = (b + twon - 1) % twon;
      out(a, b) = 0.25 * (raw(a, b) + raw(am, b) + raw(a, bm) + raw(am, bm));
    }
  }
  return out;
}

std::pair<int, int> discrete_wigner_cell(TorusPoint point, int n) {
  const double half = kPi / n;
  const int twon = 2 * n;
  auto idx = [&](double x) {
    int i = static_cast<int>(std::floor(wrap_angle(x) / half)) + 1;
    return ((i % twon) + twon) % twon;
  };
  return {idx(point.q), idx(point.p)};
}

double wigner_eval(const StateSpec& spec, TorusPoint point, const MapParams& params) {
  validate_spec(spec, params);
  if (std::holds_alternative<spec::PositionState>(spec) || std::holds_alternative<spec::MomentumState>(spec))
    throw ValidationError("wigner_eval: delta-distribution not pointwise evaluable; use sample_wigner");
  if (const auto* g = std::get_if<spec::Gaussian>(&spec)) return gaussian_wigner(*g, point, params.hbar);
  if (std::holds_alternative<spec::RandomState>(spec)) return 1.0 / (kTwoPi * kTwoPi);

  const Eigen::MatrixXcd rho = density_matrix_of(spec, params);
  const auto [a, b] = discrete_wigner_cell(point, params.n);
  const double half = kPi / params.n;
  return discrete_wigner_entry(rho, a, b) / (half * half);
}

double snapped_position(double Q, const MapParams& params) {
  return params.cell() * snap_position(Q, params);
}

double snapped_momentum(double P, const MapParams& params) {
  return wrap_angle(params.hbar * snap_momentum(P, params));
}

WignerSampler::WignerSampler(const StateSpec& spec, const MapParams& params, MomentumSampling momenta)
    : params_(params), momenta_(momenta) {
  validate_spec(spec, params);
  if (const auto* s = std::get_if<spec::PositionState>(&spec)) {
    kind_ = Kind::position;
    q1_ = snapped_position(s->Q, params);
  } else if (const auto* s = std::get_if<spec::MomentumState>(&spec)) {
    kind_ = Kind::momentum;
    p0_ = snapped_momentum(s->P, params);
  } else if (const auto* s = std::get_if<spec::Gaussian>(&spec)) {
    kind_ = Kind::gaussian;
    q1_ = s->Q;
    p0_ = s->P;
    sigma_ = s->sigma;
  } else if (std::holds_alternative<spec::RandomState>(spec)) {
    kind_ = Kind::random;
  } else if (const auto* s = std::get_if<spec::IncoherentPair>(&spec)) {
    kind_ = Kind::incoherent_pair;
    q1_ = snapped_position(s->Q1, params);
    q2_ = snapped_position(s->Q2, params);
  } else if (const auto* s = std::get_if<spec::CoherentPair>(&spec)) {
    kind_ = Kind::coherent_pair;
    q1_ = snapped_position(s->Q1, params);
    q2_ = snapped_position(s->Q2, params);
    if (q1_ == q2_) throw ValidationError("coherent pair: Q1 and Q2 coincide on the grid (degenerate superposition)");
    pair_separation_ = (q1_ - q2_) / params.hbar;
    pair_mass_ = 1.0 + 2.0 / kPi;
  } else {
    const auto& dm = std::get<spec::DensityMatrix>(spec);
    *this = from_grid(discrete_wigner(dm.rho, params), params);
  }
}

WignerSampler WignerSampler::from_grid(const Eigen::MatrixXd& grid, const MapParams& params) {
  const int twon = 2 * params.n;
  if (grid.rows() != twon || grid.cols() != twon) throw ValidationError("WignerSampler: grid must be 2n x 2n");
  const Eigen::MatrixXd mag = grid.cwiseAbs();
  if (!(mag.maxCoeff() > std::numeric_limits<double>::min()))
    throw EstimationError("WignerSampler: degenerate distribution (all Wigner cells vanish)");
  WignerSampler s;
  s.kind_ = Kind::grid;
  s.params_ = params;
  s.grid_ = grid;
  s.grid_mass_ = mag.sum();
  // Cumulative masses over the column-major flat index a + 2n·b.
  s.cdf_.resize(static_cast<std::size_t>(mag.size()));
  std::partial_sum(mag.data(), mag.data() + mag.size(), s.cdf_.begin());
  return s;
}

double WignerSampler::uniform_conjugate(Engine& eng) const {
  if (momenta_ == MomentumSampling::grid) {
    const int l = std::uniform_int_distribution<int>(0, params_.n - 1)(eng);
    return params_.cell() * l;
  }
  return kTwoPi * uniform01(eng);
}

SignedSample WignerSampler::draw(Engine& eng) const {
  SignedSample s;
  switch (kind_) {
    case Kind::position:
      s.point = {q1_, uniform_conjugate(eng)};
      break;
    case Kind::momentum:
      s.point = {uniform_conjugate(eng), p0_};
      break;
    case Kind::gaussian: {
      // |ψ(q)|² has variance σ²/2, the momentum marginal ħ²/(2σ²).
      const double q = normal(eng, q1_, sigma_ / std::sqrt(2.0));
      const double p = normal(eng, p0_, params_.hbar / (sigma_ * std::sqrt(2.0)));
      s.point = TorusPoint::wrapped(q, p);
      break;
    }
    case Kind::random:
      s.point = {kTwoPi * uniform01(eng), kTwoPi * uniform01(eng)};
      break;
    case Kind::incoherent_pair: {
      const bool first = uniform01(eng) < 0.5;
      s.component = first ? 0 : 1;
      s.point = {first ? q1_ : q2_, uniform_conjugate(eng)};
      break;
    }
    case Kind::coherent_pair: {
      // Mass ½ on each position column and 2/π on |cos((Q1-Q2)p/ħ)| at the midpoint.
      s.importance_weight = pair_mass_;
      const double u = uniform01(eng) * pair_mass_;
      if (u < 0.5) {
        s.component = 0;
        s.point = {q1_, uniform_conjugate(eng)};
      } else if (u < 1.0) {
        s.component = 1;
        s.point = {q2_, uniform_conjugate(eng)};
      } else {
        s.component = 2;
        double p = 0.0;
        double c = 0.0;
        do {
          p = uniform_conjugate(eng);
          c = std::cos(pair_separation_ * p);
        } while (uniform01(eng) >= std::abs(c));
        s.point = {wrap_angle(0.5 * (q1_ + q2_)), p};
        s.sign = c < 0.0 ? -1.0 : 1.0;
      }
      break;
    }
    case Kind::grid: {
      const int twon = 2 * params_.n;
      const double u = uniform01(eng) * cdf_.back();
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      const int flat = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), std::ssize(cdf_) - 1));
      const int a = flat % twon;
      const int b = flat / twon;
      const double half = kPi / params_.n;
      const double q = (a - 1 + uniform01(eng)) * half;
      const double p = (b - 1 + uniform01(eng)) * half;
      s.point = TorusPoint::wrapped(q, p);
      s.sign = grid_(a, b) < 0.0 ? -1.0 : 1.0;
      s.importance_weight = grid_mass_;
      break;
    }
  }
  return s;
}

SignedSample sample_wigner(const StateSpec& spec, const MapParams& params, Engine& eng, MomentumSampling momenta) {
  return WignerSampler(spec, params, momenta).draw(eng);
}

}  // namespace fidelity
