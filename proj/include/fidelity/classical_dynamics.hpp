#pragma once

#include <vector>

#include "fidelity/types.hpp"

namespace fidelity {

/// Kick potential W(q) = -k cos q and perturbation shape V(q) = -cos 2q.
namespace potentials {
inline double W(double q, double k) { return -k * std::cos(q); }
inline double dW(double q, double k) { return k * std::sin(q); }
inline double V(double q) { return -std::cos(2.0 * q); }
inline double dV(double q) { return 2.0 * std::sin(2.0 * q); }
}  // namespace potentials

struct TrajectoryRecord {
  TorusPoint initial;
  TorusPoint current;
  int steps_taken = 0;
  /// Accumulated action difference -ε Σ V(q_j) along the unperturbed orbit.
  double delta_S = 0.0;
};

/// One step of the standard map: drift q' = q + p, then kick at q'.
TorusPoint map_step(TorusPoint x, const MapParams& params, bool use_perturbation);

/// Exact algebraic inverse of map_step.
TorusPoint inverse_map_step(TorusPoint x, const MapParams& params, bool use_perturbation);

/// Propagates `steps` unperturbed steps, accumulating ΔS with V evaluated at
/// the post-drift (kick) position.
TrajectoryRecord propagate_with_action(TorusPoint start, int steps, const MapParams& params);

/// ΔS_t for t = 0..t_max along one unperturbed trajectory (size t_max + 1).
std::vector<double> action_series(TorusPoint start, int t_max, const MapParams& params);

/// t forward unperturbed steps followed by t inverse perturbed steps.
TorusPoint echo_endpoint(TorusPoint start, int t, const MapParams& params);

}  // namespace fidelity
