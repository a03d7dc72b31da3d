#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace fidelity {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised for malformed inputs: bad parameters, non-Hermitian matrices,
/// unsupported spec/method combinations.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an estimator cannot produce a result (e.g. zero weight).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduce an angle to [0, 2π).
inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round back up to exactly 2π
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Perturbed standard map on the [0,2π)² torus quantized in an n-dimensional
/// Hilbert space.
struct MapParams {
  int n = 0;
  double k = 0.0;
  double epsilon = 0.0;
  double hbar = 0.0;

  /// Default convention: n Planck cells of area 2πħ tile the (2π)² torus.
  static double default_hbar(int n) { return kTwoPi / static_cast<double>(n); }

  static MapParams make(int n, double k, double epsilon) {
    return make(n, k, epsilon, default_hbar(n));
  }
  static MapParams make(int n, double k, double epsilon, double hbar) {
    MapParams p{n, k, epsilon, hbar};
    p.validate();
    return p;
  }

  void validate() const {
    if (n < 2) throw ValidationError("MapParams: n must be >= 2");
    if (!(hbar > 0.0) || !std::isfinite(hbar))
      throw ValidationError("MapParams: hbar must be positive and finite");
    if (!std::isfinite(k) || !std::isfinite(epsilon))
      throw ValidationError("MapParams: k and epsilon must be finite");
  }

  /// Position grid spacing 2π/n.
  double cell() const { return kTwoPi / static_cast<double>(n); }
};

struct TorusPoint {
  double q = 0.0;
  double p = 0.0;

  static TorusPoint wrapped(double q, double p) { return {wrap_angle(q), wrap_angle(p)}; }
};

namespace spec {

struct PositionState {
  double Q;
};
struct MomentumState {
  double P;
};
struct Gaussian {
  double Q;
  double P;
  double sigma;
};
struct CoherentPair {
  double Q1;
  double Q2;
};
struct IncoherentPair {
  double Q1;
  double Q2;
};
struct RandomState {};
struct DensityMatrix {
  Eigen::MatrixXcd rho;
};

}  // namespace spec

/// Declarative initial state. Angles are in radians.
using StateSpec = std::variant<spec::PositionState, spec::MomentumState, spec::Gaussian,
                               spec::CoherentPair, spec::IncoherentPair, spec::RandomState,
                               spec::DensityMatrix>;

/// Short discriminator used in JSON and diagnostics ("position", "gaussian", ...).
std::string spec_type_name(const StateSpec& s);

/// Checks the per-variant invariants (sigma > 0, density matrix Hermitian,
/// unit trace, positive semidefinite, dimension n). Throws ValidationError.
void validate_spec(const StateSpec& s, const MapParams& params);

enum class Method { exact, dr_general, dr_pos_form, dr_mom_form, dr_no_interference, wigner_overlap };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Per-step fidelity record for one method.
struct FidelitySeries {
  Method method = Method::exact;
  std::vector<int> times;
  std::vector<cplx> amplitude;
  std::vector<double> fidelity;
  /// Standard error of M(t), propagated from the complex-mean covariance.
  std::vector<double> std_error;
  /// Standard error of the complex mean O(t), sqrt(var_re + var_im)/sqrt(N).
  std::vector<double> amplitude_std_error;
  long n_samples = 0;

  std::size_t size() const { return times.size(); }
};

}  // namespace fidelity
