#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "fidelity/types.hpp"

namespace fidelity {

/// Amplitudes in the position basis q_j = 2πj/n.
struct QuantumState {
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
  int dim() const { return static_cast<int>(amplitudes.size()); }
};

/// Convex decomposition ρ = Σ w_i |ψ_i⟩⟨ψ_i|.
struct MixedState {
  struct Component {
    double weight;
    QuantumState state;
  };
  std::vector<Component> components;

  double total_weight() const;
  Eigen::MatrixXcd density_matrix() const;
};

using PreparedState = std::variant<QuantumState, MixedState>;

enum class Direction { forward, backward };

/// Grid index of the position basis state nearest to Q. Writes a warning to
/// stderr if Q is off-grid.
int snap_position(double Q, const MapParams& params);
/// Integer momentum index l (P ≈ ħ l, l in [0, n)) nearest to P.
int snap_momentum(double P, const MapParams& params);
/// Signed momentum index for FFT slot l: symmetric grid -n/2 ... n/2-1.
int signed_momentum_index(int l, int n);

QuantumState position_state(int j, int n);

PreparedState make_state(const StateSpec& spec, const MapParams& params);

/// Density matrix of any spec (pure specs give |ψ⟩⟨ψ|).
Eigen::MatrixXcd density_matrix_of(const StateSpec& spec, const MapParams& params);

/// Quantized standard map U = exp(-i[W + εV]/ħ) · F⁻¹ exp(-i p²/2ħ) F.
/// Holds FFTW plans and precomputed phase tables; one instance per thread.
class SplitOperatorPropagator {
 public:
  explicit SplitOperatorPropagator(const MapParams& params);
  ~SplitOperatorPropagator();
  SplitOperatorPropagator(SplitOperatorPropagator&&) noexcept;
  SplitOperatorPropagator& operator=(SplitOperatorPropagator&&) noexcept;
  SplitOperatorPropagator(const SplitOperatorPropagator&) = delete;
  SplitOperatorPropagator& operator=(const SplitOperatorPropagator&) = delete;

  /// In place; psi must have dimension n.
  void step(Eigen::VectorXcd& psi, bool use_perturbation, Direction direction) const;

  const MapParams& params() const { return params_; }

 private:
  struct Plans;
  MapParams params_;
  std::unique_ptr<Plans> plans_;
  Eigen::VectorXcd drift_;  // includes the 1/n FFT normalization
  Eigen::VectorXcd kick_plain_;
  Eigen::VectorXcd kick_perturbed_;
};

QuantumState evolve_step(const QuantumState& state, const MapParams& params, bool use_perturbation,
                         Direction direction);

/// O(t) = Σ_i w_i ⟨ψ_i^ε(t)|ψ_i^0(t)⟩ and M(t) = |O(t)|² for t = 0..t_max.
/// Mixed-state components are evolved concurrently on `workers` threads.
FidelitySeries exact_fidelity(const StateSpec& spec, int t_max, const MapParams& params, int workers = 1);

/// Fidelity amplitude series of one pure state (used by exact_fidelity).
std::vector<cplx> pure_fidelity_amplitude(const QuantumState& psi, int t_max, const SplitOperatorPropagator& prop);

}  // namespace fidelity
