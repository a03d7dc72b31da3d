#include "fidelity/serialization.hpp"

#include <cmath>

namespace fidelity {

using nlohmann::json;

double pi_units_to_radians(double units) { return units * kPi; }

double radians_to_pi_units(double radians) {
  double y = radians / kPi;
  if (pi_units_to_radians(y) == radians) return y;
  for (double dir : {1.0, -1.0}) {
    double c = y;
    for (int i = 0; i < 4; ++i) {
      c = std::nextafter(c, dir * INFINITY);
      if (pi_units_to_radians(c) == radians) return c;
    }
  }
  return y;
}

namespace {

double angle(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ValidationError(std::string("state spec: missing numeric field '") + key + "'");
  return pi_units_to_radians(j.at(key).get<double>());
}

}  // namespace

json spec_to_json(const StateSpec& s) {
  json j;
  j["type"] = spec_type_name(s);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, spec::PositionState>) {
          j["Q"] = radians_to_pi_units(v.Q);
        } else if constexpr (std::is_same_v<T, spec::MomentumState>) {
          j["P"] = radians_to_pi_units(v.P);
        } else if constexpr (std::is_same_v<T, spec::Gaussian>) {
          j["Q"] = radians_to_pi_units(v.Q);
          j["P"] = radians_to_pi_units(v.P);
          j["sigma"] = radians_to_pi_units(v.sigma);
        } else if constexpr (std::is_same_v<T, spec::CoherentPair> || std::is_same_v<T, spec::IncoherentPair>) {
          j["Q1"] = radians_to_pi_units(v.Q1);
          j["Q2"] = radians_to_pi_units(v.Q2);
        } else if constexpr (std::is_same_v<T, spec::DensityMatrix>) {
          json re = json::array(), im = json::array();
          for (Eigen::Index r = 0; r < v.rho.rows(); ++r) {
            json rr = json::array(), ii = json::array();
            for (Eigen::Index c = 0; c < v.rho.cols(); ++c) {
              rr.push_back(v.rho(r, c).real());
              ii.push_back(v.rho(r, c).imag());
            }
            re.push_back(rr);
            im.push_back(ii);
          }
          j["re"] = re;
          j["im"] = im;
        }
      },
      s);
  return j;
}

StateSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ValidationError("state spec: expected an object with a string 'type'");
  const auto type = j.at("type").get<std::string>();
  if (type == "position") return spec::PositionState{angle(j, "Q")};
  if (type == "momentum") return spec::MomentumState{angle(j, "P")};
  if (type == "gaussian") return spec::Gaussian{angle(j, "Q"), angle(j, "P"), angle(j, "sigma")};
  if (type == "coherent_pair") return spec::CoherentPair{angle(j, "Q1"), angle(j, "Q2")};
  if (type == "incoherent_pair") return spec::IncoherentPair{angle(j, "Q1"), angle(j, "Q2")};
  if (type == "random") return spec::RandomState{};
  if (type == "density_matrix") {
    if (!j.contains("re") || !j.at("re").is_array()) throw ValidationError("density_matrix: missing 're' rows");
    const auto& re = j.at("re");
    const auto n = static_cast<Eigen::Index>(re.size());
    const json im = j.value("im", json::array());
    Eigen::MatrixXcd rho(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (!re[r].is_array() || static_cast<Eigen::Index>(re[r].size()) != n)
        throw ValidationError("density_matrix: 're' must be square");
      for (Eigen::Index c = 0; c < n; ++c) {
        const double imag = im.empty() ? 0.0 : im.at(r).at(c).get<double>();
        rho(r, c) = cplx(re[r][c].get<double>(), imag);
      }
    }
    return spec::DensityMatrix{rho};
  }
  throw ValidationError("state spec: unknown type '" + type + "'");
}

}  // namespace fidelity
