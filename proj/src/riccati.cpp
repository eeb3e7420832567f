#include "poseth2/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include "poseth2/error.hpp"

namespace poseth2 {

namespace {

lapack_logical open_left_half_plane(const double* re, const double* /*im*/) { return *re < 0.0; }

void check_dimensions(const RiccatiProblem& p) {
  const auto n = p.A.rows();
  const bool ok = p.A.cols() == n && p.B.rows() == n && p.C.cols() == n && p.F.rows() == n &&
                  p.D.rows() == p.C.rows() && p.D.cols() == p.B.cols();
  if (!ok) throw Error(ErrorKind::DimensionMismatch, "Riccati data dimensions do not fit together");
}

}  // namespace

bool hautus_stabilizable(const Matrix& a, const Matrix& b) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "PBH test needs square A and matching B");
  }
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigendecompositionFailure, "eigenvalue iteration did not converge");
  }
  const double boundary = -1e-9 * std::max(1.0, a.norm());
  const auto m = b.cols();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex lambda = solver.eigenvalues()(k);
    if (lambda.real() < boundary) continue;
    CMatrix pencil(n, n + m);
    pencil.leftCols(n) = a.cast<Complex>() - lambda * CMatrix::Identity(n, n);
    pencil.rightCols(m) = b.cast<Complex>();
    Eigen::JacobiSVD<CMatrix> svd(pencil);
    const auto& sv = svd.singularValues();
    const double tol = 1e-9 * std::max(1.0, sv(0));
    if ((sv.array() > tol).count() < n) return false;
  }
  return true;
}

Matrix riccati_residual(const RiccatiProblem& p, const Matrix& x) {
  const Matrix r = p.D.transpose() * p.D;
  return p.A.transpose() * x + x * p.A - x * p.B * r.ldlt().solve(p.B.transpose() * x) +
         p.C.transpose() * p.C;
}

RiccatiSolution ric(const RiccatiProblem& p) {
  check_dimensions(p);
  const auto n = p.A.rows();

  const Matrix r = p.D.transpose() * p.D;
  Eigen::SelfAdjointEigenSolver<Matrix> r_eig(r);
  if (r.rows() == 0 || r_eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, r.norm())) {
    throw Error(ErrorKind::InputWeightSingular, "D^T D is not positive definite");
  }
  const double cross = (p.C.transpose() * p.D).norm();
  if (cross > 1e-9 * std::max(1.0, p.C.norm() * p.D.norm())) {
    throw Error(ErrorKind::CrossTermNonzero, "C^T D has norm " + std::to_string(cross));
  }
  if (!hautus_stabilizable(p.A, p.B)) {
    throw Error(ErrorKind::NotStabilizable, "(A, B) fails the PBH rank test");
  }

  const Eigen::LDLT<Matrix> r_ldlt(r);
  Matrix ham(2 * n, 2 * n);
  ham.topLeftCorner(n, n) = p.A;
  ham.topRightCorner(n, n) = -p.B * r_ldlt.solve(p.B.transpose());
  ham.bottomLeftCorner(n, n) = -p.C.transpose() * p.C;
  ham.bottomRightCorner(n, n) = -p.A.transpose();

  // Ordered real Schur form with the stable eigenvalues leading; the first n
  // Schur vectors span the stable invariant subspace.
  const lapack_int dim = static_cast<lapack_int>(2 * n);
  Matrix schur = ham;
  Matrix vs(2 * n, 2 * n);
  Vector wr(2 * n), wi(2 * n);
  lapack_int sdim = 0;
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', open_left_half_plane, dim, schur.data(), dim,
                    &sdim, wr.data(), wi.data(), vs.data(), dim);
  if (info != 0) {
    throw Error(ErrorKind::SubspaceExtractionFailure, "Schur decomposition failed, info " +
                                                          std::to_string(info));
  }
  const double axis_tol = 1e-10 * (1.0 + ham.norm());
  if (sdim != n || (wr.array().abs() < axis_tol).any()) {
    throw Error(ErrorKind::SubspaceExtractionFailure,
                "Hamiltonian has " + std::to_string(sdim) + " stable eigenvalues, expected " +
                    std::to_string(n));
  }

  const Matrix u11 = vs.topLeftCorner(n, n);
  const Matrix u21 = vs.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<Matrix> lu(u11.transpose());
  if (!(lu.rcond() > 1e-12)) {
    throw Error(ErrorKind::SubspaceExtractionFailure, "stable subspace is not a graph over x");
  }
  Matrix x = lu.solve(u21.transpose()).transpose();

  const double asym = (x - x.transpose()).norm();
  if (asym > 1e-6 * std::max(x.norm(), 1e-300)) {
    throw Error(ErrorKind::SubspaceExtractionFailure,
                "Riccati solution is not symmetric (asymmetry " + std::to_string(asym) + ")");
  }
  x = 0.5 * (x + x.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> x_eig(x);
  const double min_eig = x_eig.eigenvalues().minCoeff();
  if (min_eig < -1e-9) {
    throw Error(ErrorKind::SubspaceExtractionFailure,
                "Riccati solution is indefinite (eigenvalue " + std::to_string(min_eig) + ")");
  }
  if (min_eig < 0.0) {
    x = x_eig.eigenvectors() * x_eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
        x_eig.eigenvectors().transpose();
  }

  Matrix l = r_ldlt.solve(p.B.transpose() * x);
  const Matrix a_cl = p.A - p.B * l;
  if (!is_stable(a_cl)) {
    throw Error(ErrorKind::SubspaceExtractionFailure, "A - B L is not stable");
  }

  RiccatiSolution sol;
  sol.residual = riccati_residual(p, x).norm();
  sol.Q = StateSpace(a_cl, p.F, -l, Matrix::Zero(l.rows(), p.F.cols()));
  sol.X = std::move(x);
  sol.L = std::move(l);
  return sol;
}

}  // namespace poseth2
