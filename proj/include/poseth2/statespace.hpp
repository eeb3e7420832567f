#pragma once

#include <limits>
#include <vector>

#include "poseth2/types.hpp"

namespace poseth2 {

/// Continuous-time realization (A, B, C, D) of C (sI - A)^-1 B + D.
/// A realization may have zero states, in which case it is a static gain D.
struct StateSpace {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;

  StateSpace() = default;
  /// Throws DimensionMismatch unless the four matrices fit together.
  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

  /// D-only system.
  static StateSpace gain(Matrix d);

  Eigen::Index order() const noexcept { return A.rows(); }
  Eigen::Index inputs() const noexcept { return D.cols(); }
  Eigen::Index outputs() const noexcept { return D.rows(); }
};

/// C (sI - A)^-1 B + D. Throws ResolventSingular when s is (numerically) an
/// eigenvalue of A.
CMatrix evaluate(const StateSpace& sys, Complex s);

/// Lower LFT f(M, K) = M11 + M12 K (I - M22 K)^-1 M21.
///
/// `m` is partitioned as
///     [ A  | B1  B2  ]
///     [ C1 | D11 D12 ]   (first `exo_outputs` rows)
///     [ C2 | D21 0   ]
/// with B1 the first `exo_inputs` columns. States of the result are stacked
/// as [M states; K states].
/// Throws DimensionMismatch, PartitionInvalid (D22 nonzero).
StateSpace lft(const StateSpace& m, Eigen::Index exo_inputs, Eigen::Index exo_outputs,
               const StateSpace& k);

/// Column concatenation [G1 G2]. Throws DimensionMismatch.
StateSpace hcat(const StateSpace& g1, const StateSpace& g2);

/// All eigenvalues of A have real part < -margin. An empty A is stable.
bool is_stable(const Matrix& a, double margin = 0.0);

/// Largest real part over the spectrum of A (-inf for an empty matrix).
double spectral_abscissa(const Matrix& a);

/// Eigenvalues sorted by (real, imag).
std::vector<Complex> sorted_eigenvalues(const Matrix& a);

/// Solves A P + P A^T + W = 0 for stable A by a Kronecker-structured dense
/// solve. Throws UnstableA.
Matrix lyapunov_gramian(const Matrix& a, const Matrix& w);

/// H2 norm sqrt(trace(C P C^T)), P the controllability gramian. Unstable or
/// non-strictly-proper systems yield +infinity.
double h2_norm(const StateSpace& sys);

inline bool is_infinite_norm(double h) { return h == std::numeric_limits<double>::infinity(); }

/// Deterministic evaluation points for comparing transfer matrices:
/// 0.1j*k for the first half and 0.3*k for the second half (k = 1, 2, ...).
/// A point closer than 1e-6 to an eigenvalue of any of `avoid` is moved by a
/// small fixed factor until it is clear.
std::vector<Complex> sample_points(int count, const std::vector<Matrix>& avoid = {});

/// Largest Frobenius-norm difference between two transfer matrices over the
/// sample points.
double max_sampled_difference(const StateSpace& g1, const StateSpace& g2,
                              const std::vector<Complex>& points);

}  // namespace poseth2
