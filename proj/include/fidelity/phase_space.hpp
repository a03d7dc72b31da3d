#pragma once

#include <utility>
#include <vector>

#include "fidelity/rng.hpp"
#include "fidelity/types.hpp"

namespace fidelity {

/// A phase-space draw from the proposal |ρ_W| with the sign and importance
/// weight needed for E[sign · weight · f(point)] = ∫ ρ_W f.
struct SignedSample {
  TorusPoint point;
  double sign = 1.0;
  double importance_weight = 1.0;
  /// CoherentPair only: 0/1 for the two position columns, 2 for the
  /// interference column at the midpoint.
  int component = 0;
};

enum class MomentumSampling { continuous, grid };

/// Wigner function ρ_W(q, p), normalized to unit integral over the torus.
/// Gaussian: analytic with winding images; RandomState: 1/(2π)²; pair states
/// and density matrices: the discrete transform cell containing the point.
/// Position and momentum eigenstates are delta-supported and throw.
double wigner_eval(const StateSpec& spec, TorusPoint point, const MapParams& params);

/// Discrete Wigner function on the 2n×2n half-integer lattice. Entry (a, b)
/// is the quasi-probability mass of the half-cell with q in
/// [(a-1)π/n, aπ/n) and p in [(b-1)π/n, bπ/n) (mod 2π); the grid sums to 1.
/// Position-basis probability of grid point x is the sum of columns 2x and
/// 2x+1; momentum probability of ħl is the sum of rows 2l and 2l+1.
Eigen::MatrixXd discrete_wigner(const Eigen::MatrixXcd& rho, const MapParams& params);

/// Half-integer lattice cell (column, row) containing a torus point.
std::pair<int, int> discrete_wigner_cell(TorusPoint point, int n);

/// Single lattice entry of discrete_wigner, O(n).
double discrete_wigner_entry(const Eigen::MatrixXcd& rho, int a, int b);

/// Prepared sampler for one state; draws are pure functions of the engine.
class WignerSampler {
 public:
  WignerSampler(const StateSpec& spec, const MapParams& params,
                MomentumSampling momenta = MomentumSampling::continuous);

  /// Sampler over an explicit discrete Wigner grid. Throws EstimationError if
  /// every entry is numerically zero.
  static WignerSampler from_grid(const Eigen::MatrixXd& grid, const MapParams& params);

  SignedSample draw(Engine& eng) const;

 private:
  WignerSampler() = default;
  double uniform_conjugate(Engine& eng) const;

  enum class Kind { position, momentum, gaussian, random, incoherent_pair, coherent_pair, grid };
  Kind kind_ = Kind::random;
  MapParams params_{};
  MomentumSampling momenta_ = MomentumSampling::continuous;
  double q1_ = 0.0, q2_ = 0.0, p0_ = 0.0, sigma_ = 1.0;
  double pair_separation_ = 0.0;  // (Q1 - Q2)/ħ
  double pair_mass_ = 1.0;        // ∫|ρ_W| for the coherent pair
  Eigen::MatrixXd grid_;
  double grid_mass_ = 1.0;
  std::vector<double> cdf_;
};

/// One draw; builds a WignerSampler on every call (use WignerSampler in loops).
SignedSample sample_wigner(const StateSpec& spec, const MapParams& params, Engine& eng,
                           MomentumSampling momenta = MomentumSampling::continuous);

/// Snapped grid coordinates used consistently by the classical estimators.
double snapped_position(double Q, const MapParams& params);
double snapped_momentum(double P, const MapParams& params);

}  // namespace fidelity
