#include "poseth2/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "poseth2/error.hpp"

namespace poseth2 {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n || C.rows() != D.rows() ||
      B.cols() != D.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "realization blocks A " + shape(A) + ", B " +
                                                  shape(B) + ", C " + shape(C) + ", D " +
                                                  shape(D) + " do not fit together");
  }
}

StateSpace StateSpace::gain(Matrix d) {
  const auto q = d.rows();
  const auto m = d.cols();
  return StateSpace(Matrix(0, 0), Matrix(0, m), Matrix(q, 0), std::move(d));
}

CMatrix evaluate(const StateSpace& sys, Complex s) {
  const auto n = sys.order();
  CMatrix value = sys.D.cast<Complex>();
  if (n == 0) return value;
  CMatrix resolvent = s * CMatrix::Identity(n, n) - sys.A.cast<Complex>();
  Eigen::PartialPivLU<CMatrix> lu(resolvent);
  if (!(lu.rcond() > 1e-13)) {
    throw Error(ErrorKind::ResolventSingular,
                "sI - A is singular at s = (" + std::to_string(s.real()) + ", " +
                    std::to_string(s.imag()) + ")");
  }
  value += sys.C.cast<Complex>() * lu.solve(sys.B.cast<Complex>());
  return value;
}

StateSpace lft(const StateSpace& m, Eigen::Index exo_inputs, Eigen::Index exo_outputs,
               const StateSpace& k) {
  const auto n = m.order();
  const auto ctrl_inputs = m.outputs() - exo_outputs;  // measured signals fed to K
  const auto ctrl_outputs = m.inputs() - exo_inputs;   // control signals produced by K
  if (exo_inputs < 0 || exo_outputs < 0 || ctrl_inputs < 0 || ctrl_outputs < 0 ||
      k.inputs() != ctrl_inputs || k.outputs() != ctrl_outputs) {
    throw Error(ErrorKind::DimensionMismatch,
                "controller is " + std::to_string(k.outputs()) + "x" + std::to_string(k.inputs()) +
                    ", interconnection needs " + std::to_string(ctrl_outputs) + "x" +
                    std::to_string(ctrl_inputs));
  }
  const Matrix b1 = m.B.leftCols(exo_inputs);
  const Matrix b2 = m.B.rightCols(ctrl_outputs);
  const Matrix c1 = m.C.topRows(exo_outputs);
  const Matrix c2 = m.C.bottomRows(ctrl_inputs);
  const Matrix d11 = m.D.topLeftCorner(exo_outputs, exo_inputs);
  const Matrix d12 = m.D.topRightCorner(exo_outputs, ctrl_outputs);
  const Matrix d21 = m.D.bottomLeftCorner(ctrl_inputs, exo_inputs);
  const Matrix d22 = m.D.bottomRightCorner(ctrl_inputs, ctrl_outputs);
  if (d22.size() > 0 && d22.cwiseAbs().maxCoeff() != 0.0) {
    throw Error(ErrorKind::PartitionInvalid, "the measured-to-control feedthrough D22 must be zero");
  }

  const auto nk = k.order();
  Matrix a(n + nk, n + nk);
  a.topLeftCorner(n, n) = m.A + b2 * k.D * c2;
  a.topRightCorner(n, nk) = b2 * k.C;
  a.bottomLeftCorner(nk, n) = k.B * c2;
  a.bottomRightCorner(nk, nk) = k.A;

  Matrix b(n + nk, exo_inputs);
  b.topRows(n) = b1 + b2 * k.D * d21;
  b.bottomRows(nk) = k.B * d21;

  Matrix c(exo_outputs, n + nk);
  c.leftCols(n) = c1 + d12 * k.D * c2;
  c.rightCols(nk) = d12 * k.C;

  Matrix d = d11 + d12 * k.D * d21;
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
}

StateSpace hcat(const StateSpace& g1, const StateSpace& g2) {
  if (g1.outputs() != g2.outputs()) {
    throw Error(ErrorKind::DimensionMismatch, "column concatenation needs equal output counts");
  }
  const auto n1 = g1.order(), n2 = g2.order();
  const auto m1 = g1.inputs(), m2 = g2.inputs();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = g1.A;
  a.bottomRightCorner(n2, n2) = g2.A;
  Matrix b = Matrix::Zero(n1 + n2, m1 + m2);
  b.topLeftCorner(n1, m1) = g1.B;
  b.bottomRightCorner(n2, m2) = g2.B;
  Matrix c(g1.outputs(), n1 + n2);
  c << g1.C, g2.C;
  Matrix d(g1.outputs(), m1 + m2);
  d << g1.D, g2.D;
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
}

double spectral_abscissa(const Matrix& a) {
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigendecompositionFailure, "eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().real().maxCoeff();
}

bool is_stable(const Matrix& a, double margin) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "A must be square");
  return spectral_abscissa(a) < -margin;
}

std::vector<Complex> sorted_eigenvalues(const Matrix& a) {
  if (a.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigendecompositionFailure, "eigenvalue iteration did not converge");
  }
  std::vector<Complex> ev(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return ev;
}

Matrix lyapunov_gramian(const Matrix& a, const Matrix& w) {
  const auto n = a.rows();
  if (a.cols() != n || w.rows() != n || w.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "Lyapunov data must be square and of equal size");
  }
  if (n == 0) return Matrix(0, 0);
  if (!is_stable(a)) throw Error(ErrorKind::UnstableA, "Lyapunov equation needs a stable A");

  // vec(A P + P A^T) = (I (x) A + A (x) I) vec(P)
  const Matrix eye = Matrix::Identity(n, n);
  Matrix op(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      op.block(i * n, j * n, n, n) = eye(i, j) * a + a(i, j) * eye;
  Eigen::PartialPivLU<Matrix> lu(op);

  auto solve = [&](const Matrix& rhs) {
    Vector x = lu.solve(-Eigen::Map<const Vector>(rhs.data(), n * n));
    return Matrix(Eigen::Map<Matrix>(x.data(), n, n));
  };
  Matrix p = solve(w);
  // One refinement step against the full residual.
  p += solve(a * p + p * a.transpose() + w);
  if (w.isApprox(w.transpose())) p = 0.5 * (p + p.transpose()).eval();
  return p;
}

double h2_norm(const StateSpace& sys) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (sys.D.size() > 0 && sys.D.cwiseAbs().maxCoeff() != 0.0) return inf;
  if (sys.order() == 0) return 0.0;
  if (!is_stable(sys.A)) return inf;
  const Matrix p = lyapunov_gramian(sys.A, sys.B * sys.B.transpose());
  return std::sqrt(std::max(0.0, (sys.C * p * sys.C.transpose()).trace()));
}

std::vector<Complex> sample_points(int count, const std::vector<Matrix>& avoid) {
  std::vector<Complex> eig;
  for (const auto& a : avoid) {
    if (a.rows() == 0) continue;
    Eigen::EigenSolver<Matrix> solver(a, false);
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) eig.push_back(solver.eigenvalues()(k));
  }
  auto too_close = [&](Complex s) {
    return std::any_of(eig.begin(), eig.end(), [&](Complex l) {
      return std::abs(s - l) < 1e-6 * std::max(1.0, std::abs(l));
    });
  };

  std::vector<Complex> points;
  const int imaginary = (count + 1) / 2;
  for (int k = 1; k <= count; ++k) {
    Complex s = k <= imaginary ? Complex(0.0, 0.1 * k) : Complex(0.3 * (k - imaginary), 0.0);
    while (too_close(s)) s *= 1.0137;
    points.push_back(s);
  }
  return points;
}

double max_sampled_difference(const StateSpace& g1, const StateSpace& g2,
                              const std::vector<Complex>& points) {
  if (g1.outputs() != g2.outputs() || g1.inputs() != g2.inputs()) {
    throw Error(ErrorKind::DimensionMismatch, "transfer matrices differ in shape");
  }
  double worst = 0.0;
  for (Complex s : points) worst = std::max(worst, (evaluate(g1, s) - evaluate(g2, s)).norm());
  return worst;
}

}  // namespace poseth2
