#include "fidelity/types.hpp"

#include <Eigen/Eigenvalues>

namespace fidelity {

std::string spec_type_name(const StateSpec& s) {
  static constexpr const char* names[] = {"position", "momentum", "gaussian", "coherent_pair",
                                          "incoherent_pair", "random", "density_matrix"};
  return names[s.index()];
}

void validate_spec(const StateSpec& s, const MapParams& params) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (const auto* g = std::get_if<spec::Gaussian>(&s)) {
    if (!(g->sigma > 0.0) || !finite(g->sigma)) throw ValidationError("gaussian: sigma must be > 0");
    if (!finite(g->Q) || !finite(g->P)) throw ValidationError("gaussian: Q and P must be finite");
  } else if (const auto* dm = std::get_if<spec::DensityMatrix>(&s)) {
    const auto& rho = dm->rho;
    if (rho.rows() != params.n || rho.cols() != params.n)
      throw ValidationError("density_matrix: dimension must equal n");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw ValidationError("density_matrix: not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-10) throw ValidationError("density_matrix: trace must be 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw ValidationError("density_matrix: not positive semidefinite");
  } else if (const auto* c = std::get_if<spec::CoherentPair>(&s)) {
    if (!finite(c->Q1) || !finite(c->Q2)) throw ValidationError("coherent_pair: positions must be finite");
  } else if (const auto* c = std::get_if<spec::IncoherentPair>(&s)) {
    if (!finite(c->Q1) || !finite(c->Q2)) throw ValidationError("incoherent_pair: positions must be finite");
  } else if (const auto* p = std::get_if<spec::PositionState>(&s)) {
    if (!finite(p->Q)) throw ValidationError("position: Q must be finite");
  } else if (const auto* m = std::get_if<spec::MomentumState>(&s)) {
    if (!finite(m->P)) throw ValidationError("momentum: P must be finite");
  }
}

std::string to_string(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::dr_general: return "dr_general";
    case Method::dr_pos_form: return "dr_pos_form";
    case Method::dr_mom_form: return "dr_mom_form";
    case Method::dr_no_interference: return "dr_no_interference";
    case Method::wigner_overlap: return "wigner_overlap";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::exact, Method::dr_general, Method::dr_pos_form, Method::dr_mom_form,
                   Method::dr_no_interference, Method::wigner_overlap}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown method tag: " + s);
}

}  // namespace fidelity
