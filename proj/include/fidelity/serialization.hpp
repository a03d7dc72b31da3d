#pragma once

#include <json.hpp>

#include "fidelity/types.hpp"

namespace fidelity {

/// JSON form of a StateSpec. Angles are written in units of π
/// ({"type":"gaussian","Q":0.7,"P":0.4,"sigma":0.004} is Q = 0.7π);
/// density matrices as {"type":"density_matrix","re":[[...]],"im":[[...]]}.
nlohmann::json spec_to_json(const StateSpec& s);
StateSpec spec_from_json(const nlohmann::json& j);

/// Radians -> units of π, choosing the representation that parses back to
/// exactly the same radian value.
double radians_to_pi_units(double radians);
double pi_units_to_radians(double units);

}  // namespace fidelity
