#pragma once

#include "poseth2/statespace.hpp"
#include "poseth2/types.hpp"

namespace poseth2 {

/// Data of a centralized H2 problem: minimize ||H11 + H12 Q|| over stable Q, with
///     H = [ A | F  B ]
///         [ C | 0  D ].
struct RiccatiProblem {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  Matrix F;
};

/// Stabilizing solution of A^T X + X A - X B (D^T D)^-1 B^T X + C^T C = 0,
/// the gain L = (D^T D)^-1 B^T X, and the optimal Q = (A - B L, F, -L, 0).
struct RiccatiSolution {
  Matrix X;
  Matrix L;
  StateSpace Q;
  double residual = 0.0;  // Frobenius norm of the Riccati residual
};

/// Solves the problem through the stable invariant subspace of the
/// Hamiltonian [[A, -B R^-1 B^T], [-C^T C, -A^T]], R = D^T D, taken from an
/// ordered real Schur form.
///
/// Throws NotStabilizable, CrossTermNonzero, InputWeightSingular,
/// SubspaceExtractionFailure, DimensionMismatch.
RiccatiSolution ric(const RiccatiProblem& problem);

/// Riccati residual A^T X + X A - X B R^-1 B^T X + C^T C.
Matrix riccati_residual(const RiccatiProblem& problem, const Matrix& x);

/// PBH test: rank [A - lambda I, B] = n for every eigenvalue with Re >= 0.
bool hautus_stabilizable(const Matrix& a, const Matrix& b);

}  // namespace poseth2
