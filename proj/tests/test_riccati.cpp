#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "poseth2/error.hpp"
#include "poseth2/riccati.hpp"
#include "poseth2/synthesis.hpp"
#include "random_plants.hpp"

using namespace poseth2;

namespace {

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }
Matrix col(double a, double b) {
  Matrix m(2, 1);
  m << a, b;
  return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ParseError;
}

Matrix gaussian(std::mt19937& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

RiccatiProblem random_problem(std::mt19937& rng, Eigen::Index n, Eigen::Index m) {
  Matrix c = Matrix::Zero(n + m, n), d = Matrix::Zero(n + m, m);
  c.topRows(n) = gaussian(rng, n, n) + 2.0 * Matrix::Identity(n, n);
  d.bottomRows(m) = gaussian(rng, m, m) * 0.2 + Matrix::Identity(m, m);
  return RiccatiProblem{gaussian(rng, n, n), gaussian(rng, n, m), c, d, Matrix::Identity(n, n)};
}

}  // namespace

TEST_CASE("scalar instances") {
  const RiccatiSolution s = ric({m1(0), m1(1), col(1, 0), col(0, 1), m1(1)});
  CHECK(std::abs(s.X(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(s.L(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(s.Q.A(0, 0) + 1.0) < 1e-12);
  CHECK(s.Q.B(0, 0) == 1.0);
  CHECK(std::abs(s.Q.C(0, 0) + 1.0) < 1e-12);
  CHECK(s.Q.D(0, 0) == 0.0);

  const RiccatiSolution u = ric({m1(1), m1(1), col(1, 0), col(0, 1), m1(1)});
  CHECK(std::abs(u.X(0, 0) - (1.0 + std::sqrt(2.0))) < 1e-12);
  CHECK(std::abs(u.L(0, 0) - (1.0 + std::sqrt(2.0))) < 1e-12);

  for (double a : {-2.0, -0.3, 0.0, 0.7, 3.0})
    for (double b : {0.5, 2.0})
      for (double q : {1.0, 4.0})
        for (double r : {0.25, 1.0}) {
          const RiccatiSolution x =
              ric({m1(a), m1(b), col(std::sqrt(q), 0), col(0, std::sqrt(r)), m1(1)});
          CHECK(std::abs(x.X(0, 0) - oracle::scalar_riccati(a, b, q, r)) <=
                1e-10 * (1 + x.X(0, 0)));
        }
}

TEST_CASE("hautus") {
  CHECK_FALSE(hautus_stabilizable(m1(1), m1(0)));
  CHECK(hautus_stabilizable(m1(-1), m1(0)));
  Matrix a(2, 2);
  a << 0, 1, 0, 0;
  CHECK(hautus_stabilizable(a, col(0, 1)));
  CHECK_FALSE(hautus_stabilizable(a, col(1, 0)));
}

TEST_CASE("precondition failures") {
  CHECK(kind_of([] { ric({m1(1), m1(0), col(1, 0), col(0, 1), m1(1)}); }) ==
        ErrorKind::NotStabilizable);
  CHECK(kind_of([] { ric({m1(1), m1(1), col(1, 1), col(0, 1), m1(1)}); }) ==
        ErrorKind::CrossTermNonzero);
  CHECK(kind_of([] { ric({m1(1), m1(1), col(1, 0), col(0, 0), m1(1)}); }) ==
        ErrorKind::InputWeightSingular);
  CHECK(kind_of([] { ric({m1(1), m1(1), col(1, 0), col(0, 1), Matrix::Identity(2, 2)}); }) ==
        ErrorKind::DimensionMismatch);
  // Undetectable imaginary-axis mode: no stable n-dimensional subspace.
  CHECK(kind_of([] { ric({m1(0), m1(1), col(0, 0), col(0, 1), m1(1)}); }) ==
        ErrorKind::SubspaceExtractionFailure);
}

TEST_CASE("random instances") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 1 + trial % 8, m = 1 + trial % 3;
    const RiccatiProblem prob = random_problem(rng, n, m);
    if (!hautus_stabilizable(prob.A, prob.B)) continue;
    const RiccatiSolution s = ric(prob);
    CHECK((s.X - s.X.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(s.X).eigenvalues().minCoeff() > 0.0);
    CHECK(riccati_residual(prob, s.X).norm() <= 1e-7 * (1.0 + s.X.norm()));
    CHECK(std::abs(s.residual - riccati_residual(prob, s.X).norm()) <= 1e-12 * (1 + s.X.norm()));
    CHECK(is_stable(prob.A - prob.B * s.L));

    // Newton-Kleinman from the returned gain stays at the same fixed point.
    const Matrix r = prob.D.transpose() * prob.D;
    const Matrix x_nk =
        oracle::newton_kleinman(prob.A, prob.B, prob.C.transpose() * prob.C, r, s.L, 3);
    CHECK((x_nk - s.X).norm() <= 1e-9 * (1.0 + s.X.norm()));
  }
}

TEST_CASE("first-order optimality of the gain") {
  std::mt19937 rng(33);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const RiccatiProblem prob = random_problem(rng, 1 + trial % 3, 1 + trial % 2);
    if (!hautus_stabilizable(prob.A, prob.B)) continue;
    const RiccatiSolution s = ric(prob);
    auto cost = [&](const Matrix& l) {
      return h2_norm(StateSpace(prob.A - prob.B * l, prob.F, prob.C - prob.D * l,
                                Matrix::Zero(prob.C.rows(), prob.F.cols())));
    };
    const double best = cost(s.L);
    for (int k = 0; k < 20; ++k) {
      Matrix dir = s.L.unaryExpr([&](double) { return g(rng); });
      dir *= 1e-3 / dir.norm();
      CHECK(cost(s.L + dir) >= best - 1e-8);
      CHECK(cost(s.L - dir) >= best - 1e-8);
    }
  }
}

TEST_CASE("downstream subproblem of the four-element example") {
  const PlantData plant = validate_plant(testkit::diamond_example());
  const SubPlant sub = extract(plant, plant.poset().index_of("2"));
  const RiccatiSolution s = ric({sub.A, sub.B, sub.C, sub.D, sub.F_lifted});
  Matrix want(2, 2);
  want << 1.0237, 0.0990, -0.8011, 0.9001;
  CHECK((s.L - want).cwiseAbs().maxCoeff() <= 5e-5);
}
