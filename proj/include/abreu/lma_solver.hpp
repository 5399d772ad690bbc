#pragma once

// Linearized Monge-Ampere solver: U^{ij} w_ij = f, w = psi on the boundary.

#include <cmath>
#include <string>

#include "abreu/discrete_ops.hpp"
#include "abreu/linalg.hpp"

namespace abreu {

enum class OperatorForm { nondivergence, divergence };

struct LMAReport {
  bool ok = false;
  double min_eigenvalue = 0.0;
  int worst_node = -1;
  double linear_residual = 0.0;
  double residual = 0.0;          // ||L w - f||_inf at interior nodes
  bool diagonally_dominant = false;
  double dominance_defect = 0.0;  // max over rows of sum|offdiag| - |diag|, relative to |diag|
  double sup_w = 0.0;
  double sup_psi = 0.0;
  double abp_term = 0.0;          // ||f / d^{1/2}||_{L^2}, d = det U
  std::string message;
};

struct LMAResult {
  ScalarField w;
  LMAReport report;
};

/// Dirichlet solve with boundary values taken from the boundary entries of `psi`.
inline LMAResult solve_lma(const DomainPtr& dd, const TensorField& U, const ScalarField& f, const ScalarField& psi,
                           OperatorForm form = OperatorForm::nondivergence) {
  LMAResult res;
  LMAReport& rep = res.report;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dd->n_interior; ++k) {
    const double e = U.cof[static_cast<std::size_t>(k)].min_eig();
    if (e < rep.min_eigenvalue) {
      rep.min_eigenvalue = e;
      rep.worst_node = k;
    }
  }
  if (!(rep.min_eigenvalue > 0.0)) {
    const Vec2 p = dd->pos[static_cast<std::size_t>(rep.worst_node)];
    throw EllipticityError("coefficient matrix not positive definite at node " + std::to_string(rep.worst_node) + " (" +
                               std::to_string(p.x) + ", " + std::to_string(p.y) + ")",
                           rep.worst_node, rep.min_eigenvalue);
  }

  const SpMat L = form == OperatorForm::divergence ? divergence_operator(*dd, U.cof) : nondivergence_operator(*dd, U.cof);

  rep.diagonally_dominant = true;
  {
    const SpMat Lt = L.transpose();
    for (int k = 0; k < dd->n_interior; ++k) {
      double diag = 0.0, off = 0.0;
      for (SpMat::InnerIterator it(Lt, k); it; ++it) {
        if (it.row() == k) diag += it.value();
        else off += std::abs(it.value());
      }
      const double defect = (off - std::abs(diag)) / std::abs(diag);
      rep.dominance_defect = std::max(rep.dominance_defect, defect);
      if (defect > 1e-12) rep.diagonally_dominant = false;
    }
  }

  const Eigen::VectorXd psib = psi.boundary();
  LinearSolveInfo li;
  Eigen::VectorXd w(dd->n_nodes());
  w.head(dd->n_interior) = solve_dirichlet(L, f.interior(), psib, li);
  w.tail(dd->n_boundary()) = psib;
  rep.linear_residual = li.relative_residual;
  res.w = ScalarField(dd, std::move(w));

  const Eigen::VectorXd r = L * res.w.values() - f.interior();
  rep.residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  const double fscale = f.interior().size() ? f.interior().cwiseAbs().maxCoeff() : 0.0;
  rep.ok = res.w.all_finite() && rep.residual <= 1e-9 * (1.0 + fscale);
  rep.message = rep.ok ? "solved" : "linear solve did not reach the residual target";

  rep.sup_w = res.w.values().maxCoeff();
  rep.sup_psi = psib.size() ? psib.maxCoeff() : 0.0;
  double s = 0.0;
  for (int k = 0; k < dd->n_interior; ++k) {
    const double d = U.cof[static_cast<std::size_t>(k)].det();
    s += dd->weight[static_cast<std::size_t>(k)] * f[k] * f[k] / d;
  }
  rep.abp_term = std::sqrt(s);
  return res;
}

inline LMAResult solve_lma(const DomainPtr& dd, const TensorField& U, const ScalarField& f, const Sampler& psi,
                           OperatorForm form = OperatorForm::nondivergence) {
  ScalarField pb = ScalarField::constant(dd, 0.0);
  pb.set_boundary(psi);
  return solve_lma(dd, U, f, pb, form);
}

}  // namespace abreu
