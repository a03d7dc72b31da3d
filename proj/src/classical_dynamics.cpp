#include "fidelity/classical_dynamics.hpp"

namespace fidelity {

TorusPoint map_step(TorusPoint x, const MapParams& params, bool use_perturbation) {
  const double q = wrap_angle(x.q + x.p);
  double force = potentials::dW(q, params.k);
  if (use_perturbation) force += params.epsilon * potentials::dV(q);
  return {q, wrap_angle(x.p - force)};
}

TorusPoint inverse_map_step(TorusPoint x, const MapParams& params, bool use_perturbation) {
  double force = potentials::dW(x.q, params.k);
  if (use_perturbation) force += params.epsilon * potentials::dV(x.q);
  const double p = wrap_angle(x.p + force);
  return {wrap_angle(x.q - p), p};
}

TrajectoryRecord propagate_with_action(TorusPoint start, int steps, const MapParams& params) {
  if (steps < 0) throw ValidationError("propagate_with_action: negative step count");
  TrajectoryRecord rec{start, start, 0, 0.0};
  double sum_v = 0.0;
  for (int j = 0; j < steps; ++j) {
    rec.current = map_step(rec.current, params, false);
    sum_v += potentials::V(rec.current.q);
  }
  rec.steps_taken = steps;
  rec.delta_S = -params.epsilon * sum_v;
  return rec;
}

std::vector<double> action_series(TorusPoint start, int t_max, const MapParams& params) {
  if (t_max < 0) throw ValidationError("action_series: negative t_max");
  std::vector<double> out(static_cast<std::size_t>(t_max) + 1, 0.0);
  TorusPoint x = start;
  double sum_v = 0.0;
  for (int t = 1; t <= t_max; ++t) {
    x = map_step(x, params, false);
    sum_v += potentials::V(x.q);
    out[static_cast<std::size_t>(t)] = -params.epsilon * sum_v;
  }
  return out;
}

TorusPoint echo_endpoint(TorusPoint start, int t, const MapParams& params) {
  if (t < 0) throw ValidationError("echo_endpoint: negative step count");
  TorusPoint x = start;
  for (int j = 0; j < t; ++j) x = map_step(x, params, false);
  for (int j = 0; j < t; ++j) x = inverse_map_step(x, params, true);
  return x;
}

}  // namespace fidelity
