#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "abreu/geometry.hpp"

namespace abreu {

struct LinearSolveInfo {
  bool ok = false;
  double relative_residual = 0.0;
};

/// Solve A_II x = rhs - A_IB xb where A has interior rows and all-node columns.
/// One step of iterative refinement; the achieved relative residual is reported.
inline Eigen::VectorXd solve_dirichlet(const SpMat& A, const Eigen::VectorXd& rhs, const Eigen::VectorXd& xb,
                                       LinearSolveInfo& info) {
  const Eigen::Index ni = A.rows();
  const SpMat Aii = A.leftCols(ni);
  Eigen::VectorXd b = rhs;
  if (xb.size() > 0) b -= A.rightCols(A.cols() - ni) * xb;

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(Aii);
  lu.factorize(Aii);
  info = {};
  if (lu.info() != Eigen::Success) return Eigen::VectorXd::Zero(ni);
  Eigen::VectorXd x = lu.solve(b);
  const Eigen::VectorXd r = b - Aii * x;
  x += lu.solve(r);
  const double bn = b.norm();
  const double rn = (b - Aii * x).norm();
  info.relative_residual = bn > 0.0 ? rn / bn : rn;
  info.ok = x.allFinite() && info.relative_residual <= 1e-10;
  return x;
}

}  // namespace abreu
