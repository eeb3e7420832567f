#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "oracles.hpp"
#include "poseth2/error.hpp"
#include "poseth2/synthesis.hpp"
#include "poseth2/verify.hpp"
#include "random_plants.hpp"

using namespace poseth2;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an Error");
  return {};
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

double max_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (auto row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

PlantSpec scalar_plant(const Poset& poset, Matrix a, Matrix b) {
  const auto p = static_cast<Eigen::Index>(poset.size());
  BlockDims ones(std::vector<Eigen::Index>(poset.size(), 1));
  Matrix c = Matrix::Zero(2 * p, p), d = Matrix::Zero(2 * p, p);
  c.topRows(p).setIdentity();
  d.bottomRows(p).setIdentity();
  return PlantSpec{poset, BlockPartition{ones, ones, ones, 2 * p}, std::move(a), std::move(b),
                   c, d, Matrix::Identity(p, p)};
}

}  // namespace

TEST_CASE("plant validation") {
  const PlantSpec good = testkit::diamond_example();
  CHECK_NOTHROW((void)validate_plant(good));

  PlantSpec bad = good;
  bad.A(0, 1) = 1.0;
  const std::string msg = message_of([&] { (void)validate_plant(bad); });
  CHECK(msg.rfind("NotPosetCausal(1,2)", 0) == 0);

  bad = good;
  bad.B(1, 2) = 1.0;
  CHECK(message_of([&] { (void)validate_plant(bad); }).rfind("NotPosetCausal(2,3)", 0) == 0);

  bad = good;
  bad.F.setZero();
  CHECK(kind_of([&] { (void)validate_plant(bad); }) == ErrorKind::FRankDeficient);

  bad = good;
  bad.F(3, 0) = 0.5;
  CHECK(kind_of([&] { (void)validate_plant(bad); }) == ErrorKind::FNotBlockDiagonal);

  bad = good;
  bad.C(4, 0) = 1.0;
  CHECK(kind_of([&] { (void)validate_plant(bad); }) == ErrorKind::CrossTermNonzero);

  bad = good;
  bad.D.setZero();
  CHECK(kind_of([&] { (void)validate_plant(bad); }) == ErrorKind::InputWeightSingular);

  bad = good;
  bad.A(2, 2) = 1.0;
  bad.B(2, 2) = 0.0;
  CHECK(message_of([&] { (void)validate_plant(bad); }).rfind("SubsystemNotStabilizable(3)", 0) == 0);

  bad = good;
  bad.C = Matrix::Zero(8, 3);
  CHECK(kind_of([&] { (void)validate_plant(bad); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("extraction and embedding") {
  const PlantData plant = validate_plant(testkit::diamond_example());
  const Poset& poset = plant.poset();
  const SubPlant two = extract(plant, poset.index_of("2"));
  CHECK(max_diff(two.A, rows({{-0.25, 0}, {-1, -0.1}})) == 0.0);
  CHECK(max_diff(two.A.col(0), rows({{-0.25}, {-1}})) == 0.0);
  CHECK(max_diff(two.F_lifted, rows({{1}, {0}})) == 0.0);
  CHECK(two.C.cols() == 2);
  CHECK(two.D.cols() == 2);

  const SubPlant four = extract(plant, poset.index_of("4"));
  CHECK(max_diff(four.A, rows({{-0.1}})) == 0.0);
  CHECK(max_diff(four.B, rows({{1}})) == 0.0);
  CHECK(max_diff(four.F_jj, rows({{1}})) == 0.0);

  const Matrix hat = embed_hat(poset, plant.partition(), rows({{1, 2}, {3, 4}}), poset.index_of("2"));
  CHECK(max_diff(hat, rows({{0, 0, 0, 0}, {0, 1, 0, 2}, {0, 0, 0, 0}, {0, 3, 0, 4}})) == 0.0);
  const Matrix k = rows({{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}, {13, 14, 15, 16}});
  CHECK(max_diff(embed_hat(poset, plant.partition(), k, 0), k) == 0.0);
  CHECK(kind_of([&] { (void)embed_hat(poset, plant.partition(), k, 1); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("subproblems") {
  const PlantData plant = validate_plant(testkit::diamond_example());
  const auto sols = solve_subproblems(plant, true);
  CHECK(std::abs(sols[3].L(0, 0) - 0.9050) < 5e-5);
  const auto seq = solve_subproblems(plant, false);
  for (std::size_t j = 0; j < 4; ++j) CHECK(max_diff(sols[j].X, seq[j].X) == 0.0);

  // Singleton: the subproblem is the centralized problem.
  const PlantData single =
      validate_plant(scalar_plant(testkit::singleton(), rows({{0.4}}), rows({{1.5}})));
  const auto s1 = solve_subproblems(single);
  CHECK(std::abs(s1[0].X(0, 0) - oracle::scalar_riccati(0.4, 1.5, 1, 1)) < 1e-12);

  // Decoupled antichain: independent scalar problems.
  const Matrix a = rows({{0.3, 0, 0}, {0, -0.7, 0}, {0, 0, 1.2}});
  const Matrix b = rows({{1, 0, 0}, {0, 2, 0}, {0, 0, 0.5}});
  const PlantData anti = validate_plant(scalar_plant(testkit::antichain(3), a, b));
  const auto s3 = solve_subproblems(anti);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(s3[j].X(0, 0) - oracle::scalar_riccati(a(j, j), b(j, j), 1, 1)) < 1e-10);
  }
}

TEST_CASE("assembly on a two-element chain") {
  const PlantData plant =
      validate_plant(scalar_plant(testkit::two_chain(), rows({{0.2, 0}, {1, -0.3}}),
                                  rows({{1, 0}, {0.5, 1}})));
  const SynthesisResult r = synthesize(plant);
  const auto& as = r.assembly;
  CHECK(as.bigA.rows() == 3);
  CHECK(max_diff(as.Pi1, rows({{1, 0}, {0, 0}, {0, 1}})) == 0.0);
  CHECK(max_diff(as.Pi2, rows({{0}, {1}, {0}})) == 0.0);
  CHECK(max_diff(as.Rsel, rows({{1, 0, 0}, {0, 1, 1}})) == 0.0);

  // u1 = -(K11 + K12 Phi21) x1,  u2 = -(K21 + K22 Phi21) x1 - J (x2 - Phi21 x1).
  const Matrix k1 = r.gains[0].L;
  const double j2 = r.gains[1].L(0, 0);
  for (Complex s : sample_points(20, {r.artifacts.K_star.A})) {
    const CMatrix k = evaluate(r.artifacts.K_star, s);
    const CMatrix phi = evaluate(r.artifacts.Phi, s);
    const CMatrix gamma = evaluate(r.artifacts.Gamma, s);
    const Complex phi21 = phi(1, 0);
    CHECK(std::abs(gamma(1, 0) + phi21) <= 1e-7);
    CHECK(std::abs(k(0, 1)) <= 1e-12);
    CHECK(std::abs(k(0, 0) + (k1(0, 0) + k1(0, 1) * phi21)) <= 1e-7);
    CHECK(std::abs(k(1, 0) - (-(k1(1, 0) + k1(1, 1) * phi21) + j2 * phi21)) <= 1e-7);
    CHECK(std::abs(k(1, 1) + j2) <= 1e-7);
  }
}

TEST_CASE("singleton degenerates to the centralized regulator") {
  std::mt19937 rng(4);
  const PlantSpec spec = testkit::random_plant_on(rng, testkit::singleton(), {2}, {2});
  const PlantData plant = validate_plant(spec);
  const SynthesisResult r = synthesize(plant);
  const RiccatiSolution central = ric({spec.A, spec.B, spec.C, spec.D, spec.F});
  CHECK(r.assembly.Pi2.cols() == 0);
  CHECK(r.assembly.A_Phi.rows() == 0);
  CHECK(r.artifacts.K_star.order() == 0);
  CHECK(max_diff(r.artifacts.K_star.D, -central.L) <= 1e-8);
  CHECK(r.artifacts.Phi.order() == 0);
  CHECK(max_diff(r.artifacts.Phi.D, Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_diff(r.artifacts.Gamma.D, Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_diff(r.artifacts.Q_star.A, spec.A - spec.B * central.L) <= 1e-8);
  CHECK(max_diff(r.artifacts.Q_star.C, -central.L) <= 1e-8);
  CHECK(std::abs(r.norms.h_centralized - r.norms.h_decentralized) <= 1e-8);
  for (Complex s : sample_points(20, {spec.A})) {
    const CMatrix k = recover_K_from_Q(plant, evaluate(r.artifacts.Q_star, s), s);
    CHECK((k + central.L.cast<Complex>()).norm() <= 1e-7);
  }
}

TEST_CASE("assembly identities and failures") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const PlantData plant = validate_plant(testkit::random_plant(rng));
    const SynthesisResult r = synthesize(plant);
    const auto& as = r.assembly;
    const auto n = plant.A().rows();
    Matrix perm(as.bigA.rows(), as.bigA.rows());
    perm << as.Pi1, as.Pi2;
    CHECK((perm.transpose() * perm).isIdentity(0.0));
    CHECK(max_diff(as.Rsel * as.Pi2 * as.Pi2.transpose() + as.Pi1.transpose(), as.Rsel) <= 1e-12);
    CHECK(max_diff(as.Rsel * as.bigA - plant.B() * as.C_Q, plant.A() * as.Rsel) <= 1e-9);
    CHECK(max_diff(plant.A() * as.Rsel * as.Pi1, plant.A()) == 0.0);
    CHECK(is_stable(as.bigA));
    CHECK(r.artifacts.K_star.order() == degree_bound(plant));
    CHECK(r.artifacts.K_star.order() == as.bigA.rows() - n);
    for (ElementIndex j = 0; j < plant.poset().size(); ++j) {
      CHECK(max_diff(as.gain(j), r.gains[j].L) == 0.0);
    }
    // Phi and K_Phi against their closed forms.
    const StateSpace phi(as.A_Phi, as.B_Phi, as.C_Phi, Matrix::Identity(n, n));
    const StateSpace k_phi(as.A_Phi, as.B_Phi, as.C_Q * as.Pi2, as.C_Q * as.Pi1);
    const auto pts = sample_points(20, {as.A_Phi});
    CHECK(max_sampled_difference(r.artifacts.Phi, phi, pts) <= 1e-9);
    CHECK(max_sampled_difference(r.artifacts.K_Phi, k_phi, pts) <= 1e-9);
  }

  std::mt19937 rng2(3);
  PlantSpec spec = testkit::random_plant_on(rng2, testkit::two_chain(), {1, 1}, {1, 1});
  spec.A(0, 0) = 2.0;
  const PlantData plant = validate_plant(spec);
  const std::vector<Matrix> zero{Matrix::Zero(2, 2), Matrix::Zero(1, 1)};
  CHECK(kind_of([&] { (void)assemble(plant, zero); }) == ErrorKind::AssemblyIdentityViolated);
  const std::vector<Matrix> wrong{Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  CHECK(kind_of([&] { (void)assemble(plant, wrong); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("decomposition of the closed-loop norm") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const PlantData plant = validate_plant(testkit::random_plant(rng, {3, 1, false}));
    const SynthesisResult r = synthesize(plant);
    const StateSpace loop = closed_loop(plant, r.artifacts.K_star);
    double total = 0.0;
    for (ElementIndex j = 0; j < plant.poset().size(); ++j) {
      const SubPlant sub = extract(plant, j);
      const Matrix& l = r.gains[j].L;
      const StateSpace sub_loop(sub.A - sub.B * l, sub.F_lifted, sub.C - sub.D * l,
                                Matrix::Zero(sub.C.rows(), sub.F_lifted.cols()));
      const double sub_cost = h2_norm(sub_loop);
      StateSpace column = loop;
      column.B = loop.B.middleCols(plant.partition().disturbances.offset(j), 1);
      column.D = loop.D.middleCols(plant.partition().disturbances.offset(j), 1);
      CHECK(std::abs(h2_norm(column) - sub_cost) <= 1e-8 * (1.0 + sub_cost));
      total += sub_cost * sub_cost;
    }
    CHECK(std::abs(r.norms.h_decentralized * r.norms.h_decentralized - total) <= 1e-8 * (1 + total));
  }
}

TEST_CASE("parameter recovery on arbitrary conforming Q") {
  std::mt19937 rng(44);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const PlantData plant = validate_plant(testkit::random_plant(rng));
    const auto states = plant.state_pattern();
    // Q with conforming (block lower triangular) A_q, B_q, C_q.
    auto conforming = [&](const IncidencePattern& pat) {
      Matrix m = Matrix::Zero(pat.rows().total(), pat.cols().total());
      for (ElementIndex i = 0; i < pat.rows().count(); ++i)
        for (ElementIndex j = 0; j < pat.cols().count(); ++j)
          if (pat.allowed(i, j))
            for (Eigen::Index r = 0; r < pat.rows().size(i); ++r)
              for (Eigen::Index c = 0; c < pat.cols().size(j); ++c)
                m(pat.rows().offset(i) + r, pat.cols().offset(j) + c) = g(rng);
      return m;
    };
    Matrix aq = conforming(states);
    for (ElementIndex i = 0; i < plant.poset().size(); ++i) {
      const auto o = plant.partition().states.offset(i), k = plant.partition().states.size(i);
      aq.block(o, o, k, k) = oracle::random_stable(rng, k);
    }
    const StateSpace q(aq, conforming(IncidencePattern(plant.poset(), plant.partition().states,
                                                       plant.partition().disturbances)),
                       conforming(plant.controller_pattern()),
                       Matrix::Zero(plant.B().cols(), plant.F().cols()));
    REQUIRE(is_stable(q.A));
    for (Complex s : sample_points(20, {plant.A(), q.A})) {
      const CMatrix k = recover_K_from_Q(plant, evaluate(q, s), s);
      CHECK(plant.controller_pattern().violation(k) <= 1e-8 * (1.0 + k.norm()));
    }
  }
}

TEST_CASE("four-element example") {
  const PlantData plant = validate_plant(testkit::diamond_example());
  const SynthesisResult r = synthesize(plant);
  CHECK(r.artifacts.K_star.order() == 5);
  CHECK(r.degree_bound == 5);
  CHECK(controller_state_labels(plant) ==
        std::vector<std::string>{"q_2(1)", "q_3(1)", "q_4(1)", "q_4(2)", "q_4(3)"});
  CHECK(std::abs(r.norms.h_open - 31.6319) <= 1e-3);
  CHECK(std::abs(r.norms.h_decentralized - 2.8280) <= 1e-3);

  // Centralized optimum from Newton-Kleinman started at zero gain (A is stable).
  const Matrix q = plant.C().transpose() * plant.C();
  const Matrix rr = plant.D().transpose() * plant.D();
  const Matrix x = oracle::newton_kleinman(plant.A(), plant.B(), q, rr, Matrix::Zero(4, 4), 30);
  const double h_central = std::sqrt((plant.F().transpose() * x * plant.F()).trace());
  CHECK(std::abs(r.norms.h_centralized - h_central) <= 1e-9);
  CHECK(r.norms.h_centralized <= r.norms.h_decentralized);

  std::mt19937 rng(1);
  const auto labels = controller_state_labels(
      validate_plant(testkit::random_plant_on(rng, testkit::two_chain(), {1, 2}, {1, 1})));
  CHECK(labels == std::vector<std::string>{"q_2(1)[0]", "q_2(1)[1]"});
}

TEST_CASE("h_open of an unstable plant is infinite") {
  const PlantData plant =
      validate_plant(scalar_plant(testkit::singleton(), rows({{1.0}}), rows({{1.0}})));
  const SynthesisResult r = synthesize(plant);
  CHECK(is_infinite_norm(r.norms.h_open));
  CHECK(std::isfinite(r.norms.h_decentralized));
}
