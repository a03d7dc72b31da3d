#include <doctest.h>

#include <random>

#include "fidelity/phase_space.hpp"
#include "fidelity/quantum_exact.hpp"
#include "oracles.hpp"

using namespace fidelity;

namespace {

// Midpoint quadrature of f over the torus on an m×m grid.
template <class F>
double torus_quadrature(int m, F&& f) {
  const double h = kTwoPi / m;
  double acc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) acc += f((i + 0.5) * h, (j + 0.5) * h);
  return acc * h * h;
}

}  // namespace

TEST_CASE("pointwise Wigner values") {
  const auto p = MapParams::make(1000, 0.95, 0.015);
  CHECK(wigner_eval(spec::RandomState{}, {1.0, 2.0}, p) == doctest::Approx(1.0 / (4 * kPi * kPi)));
  const spec::Gaussian g{0.7 * kPi, 0.4 * kPi, 0.04 * kPi};
  CHECK(wigner_eval(g, {g.Q, g.P}, p) == doctest::Approx(1.0 / (kPi * p.hbar)).epsilon(1e-12));
  CHECK_THROWS_AS(wigner_eval(spec::PositionState{1.0}, {1.0, 0.0}, p), ValidationError);
  CHECK_THROWS_AS(wigner_eval(spec::MomentumState{0.0}, {1.0, 0.0}, p), ValidationError);
}

TEST_CASE("Wigner normalization and marginals") {
  const auto p = MapParams::make(100, 0.95, 0.015);
  const spec::Gaussian g{0.7 * kPi, 0.4 * kPi, 0.5};
  const double total = torus_quadrature(512, [&](double q, double pp) { return wigner_eval(g, {q, pp}, p); });
  CHECK(std::abs(total - 1.0) < 1e-6);
  CHECK(std::abs(torus_quadrature(64, [&](double q, double pp) {
                   return wigner_eval(spec::RandomState{}, {q, pp}, p);
                 }) -
                 1.0) < 1e-12);

  // ∫dp ρ_W(q,p) against the analytic position density of the periodized packet.
  for (int j = 0; j < p.n; ++j) {
    const double q = p.cell() * j;
    double marginal = 0.0;
    const int m = 512;
    for (int i = 0; i < m; ++i) marginal += wigner_eval(g, {q, (i + 0.5) * kTwoPi / m}, p);
    marginal *= kTwoPi / m;
    double analytic = 0.0;
    for (int w = -3; w <= 3; ++w) {
      const double x = q - g.Q + kTwoPi * w;
      analytic += std::exp(-x * x / (g.sigma * g.sigma));
    }
    analytic /= g.sigma * std::sqrt(kPi);
    CHECK(std::abs(marginal - analytic) < 1e-8);
  }

  // A pointwise-evaluable signed state: the coherent pair through the lattice.
  const auto p8 = MapParams::make(8, 0.95, 0.015);
  const spec::CoherentPair pair{p8.cell() * 1, p8.cell() * 4};
  const double pair_total = torus_quadrature(160, [&](double q, double pp) { return wigner_eval(pair, {q, pp}, p8); });
  CHECK(std::abs(pair_total - 1.0) < 1e-6);
}

TEST_CASE("discrete Wigner on random density matrices") {
  std::mt19937_64 eng(2024);
  for (int n : {4, 8, 16}) {
    const auto p = MapParams::make(n, 1.0, 0.0);
    for (int trial = 0; trial < 20; ++trial) {
      const auto rho = oracle::random_density(n, eng);
      const auto grid = discrete_wigner(rho, p);
      REQUIRE(grid.rows() == 2 * n);
      double imag = 0.0, dev = 0.0;
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) {
          const cplx ref = oracle::smoothed_kernel(rho, a, b);
          imag = std::max(imag, std::abs(ref.imag()));
          dev = std::max(dev, std::abs(ref.real() - grid(a, b)));
          if (a == 3 && b == 5) CHECK(std::abs(discrete_wigner_entry(rho, a, b) - grid(a, b)) < 1e-13);
        }
      CHECK(imag < 1e-12);
      CHECK(dev < 1e-12);
      CHECK(std::abs(grid.sum() - 1.0) < 1e-12);
      const auto mom = oracle::momentum_probabilities(rho);
      for (int x = 0; x < n; ++x) {
        CHECK(std::abs(grid.row(2 * x).sum() + grid.row(2 * x + 1).sum() - rho(x, x).real()) < 1e-10);
        CHECK(std::abs(grid.col(2 * x).sum() + grid.col(2 * x + 1).sum() - mom[x]) < 1e-10);
      }
    }
  }
}

TEST_CASE("discrete Wigner special states") {
  const int n = 10;
  const auto p = MapParams::make(n, 1.0, 0.0);
  SUBCASE("position state sits on its column pair") {
    const auto grid = discrete_wigner(density_matrix_of(spec::PositionState{3 * p.cell()}, p), p);
    for (int a = 0; a < 2 * n; ++a) {
      const double col = grid.row(a).sum();
      if (a == 6 || a == 7) {
        CHECK(col == doctest::Approx(0.5));
      } else {
        CHECK(grid.row(a).cwiseAbs().maxCoeff() < 1e-14);
      }
    }
  }
  SUBCASE("maximally mixed state is uniform") {
    const auto grid = discrete_wigner(Eigen::MatrixXcd::Identity(n, n) / double(n), p);
    CHECK((grid.array() - 1.0 / (4.0 * n * n)).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("random pure state marginals") {
    std::mt19937_64 eng(4);
    const auto psi = oracle::random_state(n, eng);
    const Eigen::MatrixXcd rho = psi * psi.adjoint();
    const auto grid = discrete_wigner(rho, p);
    const auto mom = oracle::momentum_probabilities(rho);
    for (int x = 0; x < n; ++x) {
      CHECK(std::abs(grid.row(2 * x).sum() + grid.row(2 * x + 1).sum() - std::norm(psi[x])) < 1e-10);
      CHECK(std::abs(grid.col(2 * x).sum() + grid.col(2 * x + 1).sum() - mom[x]) < 1e-10);
    }
  }
  SUBCASE("cell lookup") {
    CHECK(discrete_wigner_cell({0.0, 0.0}, n) == std::pair{1, 1});
    CHECK(discrete_wigner_cell({kTwoPi - 1e-9, 3 * p.cell()}, n) == std::pair{0, 7});
  }
  SUBCASE("invalid matrices") {
    CHECK_THROWS_AS(discrete_wigner(Eigen::MatrixXcd::Identity(n, n), p), ValidationError);
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(n, n) / double(n);
    bad(1, 0) = cplx(0, 0.2);
    CHECK_THROWS_AS(discrete_wigner(bad, p), ValidationError);
    CHECK_THROWS_AS(discrete_wigner(Eigen::MatrixXcd::Identity(3, 3) / 3.0, p), ValidationError);
    CHECK_THROWS_AS(WignerSampler::from_grid(Eigen::MatrixXd::Zero(2 * n, 2 * n), p), EstimationError);
  }
}

TEST_CASE("sampler examples") {
  const auto p = MapParams::make(200, 0.7, 0.02);
  SUBCASE("position state keeps q fixed") {
    const WignerSampler s(spec::PositionState{0.4 * kPi}, p);
    Engine eng = sample_stream(1, 0);
    for (int i = 0; i < 1000; ++i) CHECK(s.draw(eng).point.q == snapped_position(0.4 * kPi, p));
  }
  SUBCASE("gaussian sample mean") {
    const spec::Gaussian g{kPi, kPi, 0.3};
    const WignerSampler s(g, p);
    Engine eng = sample_stream(2, 0);
    const int m = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < m; ++i) {
      const double q = s.draw(eng).point.q;
      sum += q;
      sq += (q - kPi) * (q - kPi);
    }
    CHECK(std::abs(sum / m - kPi) < 3 * (g.sigma / std::sqrt(2.0)) / std::sqrt(double(m)));
    CHECK(std::abs(sq / m / (g.sigma * g.sigma / 2) - 1.0) < 0.02);
  }
  SUBCASE("random state is uniform") {
    const WignerSampler s(spec::RandomState{}, p);
    Engine eng = sample_stream(3, 0);
    std::vector<int> bins(100, 0);
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
      const auto x = s.draw(eng).point;
      bins[std::min(9, int(x.q / kTwoPi * 10)) * 10 + std::min(9, int(x.p / kTwoPi * 10))]++;
    }
    double chi2 = 0.0;
    for (int b : bins) chi2 += (b - m / 100.0) * (b - m / 100.0) / (m / 100.0);
    CHECK(chi2 < 134.64);  // χ²₉₉ at the 99% level
  }
  SUBCASE("grid momenta") {
    const WignerSampler s(spec::PositionState{0.4 * kPi}, p, MomentumSampling::grid);
    Engine eng = sample_stream(4, 0);
    for (int i = 0; i < 200; ++i) {
      const double l = s.draw(eng).point.p / p.hbar;
      CHECK(std::abs(l - std::round(l)) < 1e-9);
    }
  }
}

TEST_CASE("signed samplers are unbiased") {
  const auto p = MapParams::make(8, 0.95, 0.015);
  std::mt19937_64 meng(77);
  const std::vector<StateSpec> specs{spec::PositionState{2 * p.cell()},
                                     spec::MomentumState{3 * p.hbar},
                                     spec::Gaussian{2.0, 3.5, 0.7},
                                     spec::RandomState{},
                                     spec::IncoherentPair{1 * p.cell(), 5 * p.cell()},
                                     spec::CoherentPair{2 * p.cell(), 3 * p.cell()},
                                     spec::DensityMatrix{oracle::random_density(8, meng)}};
  const std::array<std::function<double(double, double)>, 3> gs{[](double, double) { return 1.0; },
                                                                [](double q, double) { return std::cos(q); },
                                                                [](double, double pp) { return std::cos(pp); }};

  auto expected = [&](const StateSpec& s, int gi) -> double {
    const double c1 = 2 * p.cell(), c2 = 3 * p.cell();
    if (const auto* ps = std::get_if<spec::PositionState>(&s)) return std::array{1.0, std::cos(ps->Q), 0.0}[gi];
    if (const auto* ms = std::get_if<spec::MomentumState>(&s)) return std::array{1.0, 0.0, std::cos(ms->P)}[gi];
    if (const auto* ip = std::get_if<spec::IncoherentPair>(&s))
      return std::array{1.0, 0.5 * (std::cos(ip->Q1) + std::cos(ip->Q2)), 0.0}[gi];
    if (std::holds_alternative<spec::CoherentPair>(s)) {
      // Adjacent grid columns: ⟨cos p̂⟩ = Re⟨ψ|e^{ip̂}|ψ⟩ = 1/2, the one-cell shift.
      return std::array{1.0, 0.5 * (std::cos(c1) + std::cos(c2)), 0.5}[gi];
    }
    if (std::holds_alternative<spec::RandomState>(s)) return gi == 0 ? 1.0 : 0.0;
    // Gaussian and density matrix: quadrature of the pointwise function.
    return torus_quadrature(256, [&](double q, double pp) { return wigner_eval(s, {q, pp}, p) * gs[gi](q, pp); });
  };

  for (const auto& s : specs) {
    CAPTURE(spec_type_name(s));
    const WignerSampler sampler(s, p);
    Engine eng = sample_stream(99, 0);
    const int m = 1000000;
    std::array<double, 3> sum{}, sq{};
    for (int i = 0; i < m; ++i) {
      const auto x = sampler.draw(eng);
      for (int gi = 0; gi < 3; ++gi) {
        const double v = x.sign * x.importance_weight * gs[gi](x.point.q, x.point.p);
        sum[gi] += v;
        sq[gi] += v * v;
      }
    }
    for (int gi = 0; gi < 3; ++gi) {
      CAPTURE(gi);
      const double mean = sum[gi] / m;
      const double se = std::sqrt(std::max(sq[gi] / m - mean * mean, 0.0) / m);
      const double ref = expected(s, gi);
      // Deterministic columns have zero spread, leaving only summation rounding.
      CHECK(std::abs(mean - ref) <= 4 * se + 1e-9);
    }
  }
}
