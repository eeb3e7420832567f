#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "poseth2/error.hpp"
#include "poseth2/poset.hpp"
#include "random_plants.hpp"

using namespace poseth2;

namespace {

std::vector<std::string> names(const Poset& p, const std::vector<ElementIndex>& ids) {
  std::vector<std::string> out;
  for (auto i : ids) out.push_back(p.label(i));
  return out;
}

using Strings = std::vector<std::string>;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ParseError;
}

Matrix random_conforming(std::mt19937& rng, const IncidencePattern& pat) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m = Matrix::Zero(pat.rows().total(), pat.cols().total());
  for (ElementIndex i = 0; i < pat.rows().count(); ++i)
    for (ElementIndex j = 0; j < pat.cols().count(); ++j) {
      if (!pat.allowed(i, j)) continue;
      for (Eigen::Index r = 0; r < pat.rows().size(i); ++r)
        for (Eigen::Index c = 0; c < pat.cols().size(j); ++c)
          m(pat.rows().offset(i) + r, pat.cols().offset(j) + c) = g(rng) * (i == j ? 0.3 : 1.0);
      if (i == j) {
        m.block(pat.rows().offset(i), pat.cols().offset(j), pat.rows().size(i), pat.cols().size(j))
            .diagonal()
            .array() += 2.0;
      }
    }
  return m;
}

}  // namespace

TEST_CASE("fork poset from generating edges") {
  const Poset p = testkit::fork3();
  CHECK(p.leq(p.index_of("1"), p.index_of("2")));
  CHECK(p.leq(p.index_of("1"), p.index_of("3")));
  CHECK_FALSE(p.comparable(p.index_of("2"), p.index_of("3")));
  CHECK(p.hasse_edges().size() == 2);
}

TEST_CASE("singleton and cycles") {
  const Poset s = testkit::singleton();
  CHECK(s.size() == 1);
  CHECK(s.leq(0, 0));
  CHECK(s.strict_downstream(0).empty());
  CHECK(s.sigma() == 0);
  CHECK(kind_of([] { Poset::build({"1", "2"}, {{"1", "2"}, {"2", "1"}}); }) ==
        ErrorKind::CycleDetected);
  CHECK(kind_of([] { Poset::build({"1", "2"}, {{"1", "3"}}); }) == ErrorKind::UnknownLabel);
  CHECK(kind_of([] { Poset::build({"1", "1"}, {}); }) == ErrorKind::DuplicateLabel);
  CHECK(kind_of([] { (void)testkit::fork3().index_of("9"); }) == ErrorKind::UnknownLabel);
}

TEST_CASE("diamond derived sets") {
  const Poset p = testkit::diamond();
  const auto one = p.index_of("1"), two = p.index_of("2"), four = p.index_of("4");
  CHECK(names(p, p.downstream(one)) == Strings{"1", "2", "3", "4"});
  CHECK(names(p, p.strict_downstream(one)) == Strings{"2", "3", "4"});
  CHECK(p.strict_upstream(one).empty());
  CHECK(names(p, p.upstream(four)) == Strings{"1", "2", "3", "4"});
  CHECK(names(p, p.strict_upstream(four)) == Strings{"1", "2", "3"});
  CHECK(names(p, p.off_stream(two)) == Strings{"3"});
  CHECK(names(p, p.interval(one, four)) == Strings{"1", "2", "3", "4"});
  CHECK(p.interval(two, p.index_of("3")).empty());
  CHECK(p.sigma() == 5);
  CHECK(testkit::antichain(5).sigma() == 0);
}

TEST_CASE("linear extension keeps caller order where possible") {
  const Poset p = Poset::build({"b", "a", "c"}, {{"c", "b"}});
  CHECK(p.labels() == Strings{"a", "c", "b"});
  for (ElementIndex i = 0; i < p.size(); ++i)
    for (ElementIndex j = 0; j < p.size(); ++j)
      if (p.leq(i, j)) CHECK(i <= j);
}

TEST_CASE("set partition around each element") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Poset p = testkit::random_poset(rng, 1 + trial % 6);
    for (ElementIndex j = 0; j < p.size(); ++j) {
      auto down = p.downstream(j), up = p.upstream(j);
      std::vector<ElementIndex> both;
      std::set_intersection(down.begin(), down.end(), up.begin(), up.end(), std::back_inserter(both));
      CHECK(both == std::vector<ElementIndex>{j});
      std::vector<ElementIndex> all = p.strict_downstream(j);
      for (auto v : {p.strict_upstream(j), p.off_stream(j)}) all.insert(all.end(), v.begin(), v.end());
      all.push_back(j);
      std::sort(all.begin(), all.end());
      CHECK(all.size() == p.size());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    }
  }
}

TEST_CASE("hasse edges regenerate the order") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Poset p = testkit::random_poset(rng, 5);
    std::vector<std::pair<std::string, std::string>> edges;
    for (auto [a, b] : p.hasse_edges()) edges.emplace_back(p.label(a), p.label(b));
    const Poset q = Poset::build(p.labels(), edges);
    for (ElementIndex i = 0; i < p.size(); ++i)
      for (ElementIndex j = 0; j < p.size(); ++j) CHECK(p.leq(i, j) == q.leq(i, j));
    // Covering relations only: removing any edge changes the closure.
    for (auto [a, b] : p.hasse_edges())
      for (ElementIndex k = 0; k < p.size(); ++k) CHECK_FALSE((p.less(a, k) && p.less(k, b)));
  }
}

TEST_CASE("chains") {
  const Poset c = testkit::chain3();
  auto chains = c.chains_between(0, 2);
  std::sort(chains.begin(), chains.end());
  CHECK(chains.size() == 2);
  CHECK(std::find(chains.begin(), chains.end(), Chain{{0, 2}}) != chains.end());
  CHECK(std::find(chains.begin(), chains.end(), Chain{{0, 1}, {1, 2}}) != chains.end());
  CHECK(c.chains_between(1, 1) == std::vector<Chain>{Chain{}});
  CHECK(kind_of([&] { (void)c.chains_between(2, 0); }) == ErrorKind::NotComparable);

  const Poset d = testkit::diamond();
  auto dc = d.chains_between(d.index_of("1"), d.index_of("4"));
  CHECK(dc.size() == 3);

  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Poset p = testkit::random_poset(rng, 5);
    for (ElementIndex i = 0; i < p.size(); ++i)
      for (ElementIndex j = 0; j < p.size(); ++j) {
        if (!p.leq(i, j)) continue;
        auto got = p.chains_between(i, j);
        auto want = oracle::chains_by_subsets(
            p.size(), [&](std::size_t a, std::size_t b) { return p.less(a, b); }, i, j);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        CHECK(got == want);
      }
  }
}

TEST_CASE("conformance") {
  const Poset p = testkit::fork3();
  const BlockDims ones(std::vector<Eigen::Index>{1, 1, 1});
  const IncidencePattern pat(p, ones, ones);
  Matrix zeta(3, 3);
  zeta << 1, 0, 0, 1, 1, 0, 1, 0, 1;
  CHECK(pat.conforms(zeta));
  CHECK(pat.conforms(Matrix(Matrix::Identity(3, 3))));
  Matrix bad = zeta;
  bad(1, 2) = 1e-3;
  CHECK_FALSE(pat.conforms(bad));
  CHECK(pat.first_violation(bad, 1e-9) == std::make_pair(ElementIndex{1}, ElementIndex{2}));
  CHECK(pat.conforms(bad, 1e-2));
  CHECK(kind_of([&] { (void)pat.conforms(Matrix(Matrix::Identity(2, 2))); }) == ErrorKind::DimensionMismatch);

  const IncidencePattern chain(testkit::chain3(), ones, ones);
  Matrix upper = Matrix::Zero(3, 3);
  upper(0, 2) = 1;
  CHECK_FALSE(chain.conforms(upper));
}

TEST_CASE("incidence inverse") {
  const BlockDims ones(std::vector<Eigen::Index>{1, 1, 1});
  const IncidencePattern pat(testkit::fork3(), ones, ones);
  Matrix zeta(3, 3);
  zeta << 1, 0, 0, 1, 1, 0, 1, 0, 1;
  Matrix want(3, 3);
  want << 1, 0, 0, -1, 1, 0, -1, 0, 1;
  CHECK((pat.inverse(zeta) - want).norm() < 1e-14);

  const BlockDims two(std::vector<Eigen::Index>{1, 1});
  const IncidencePattern chain(testkit::two_chain(), two, two);
  const double a = 2.0, b = -0.5, c = 3.0;
  Matrix m(2, 2);
  m << a, 0, c, b;
  Matrix inv(2, 2);
  inv << 1 / a, 0, -c / (a * b), 1 / b;
  CHECK((chain.inverse(m) - inv).norm() < 1e-14);

  const IncidencePattern anti(testkit::antichain(2), two, two);
  Matrix diag(2, 2);
  diag << 4, 0, 0, 0.25;
  CHECK((anti.inverse(diag) - diag.inverse()).norm() < 1e-14);

  Matrix singular = m;
  singular(1, 1) = 0;
  CHECK(kind_of([&] { (void)chain.inverse(singular); }) == ErrorKind::SingularDiagonalBlock);

  std::mt19937 rng(17);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const Poset p = testkit::random_poset(rng, 1 + trial % 6);
    std::vector<Eigen::Index> sizes;
    for (std::size_t k = 0; k < p.size(); ++k) sizes.push_back(dim(rng));
    const BlockDims dims(sizes);
    const IncidencePattern pt(p, dims, dims);
    const Matrix x = random_conforming(rng, pt);
    const Matrix y = random_conforming(rng, pt);
    const Matrix xi = pt.inverse(x);
    const Matrix eye = Matrix::Identity(dims.total(), dims.total());
    CHECK((xi * x - eye).norm() <= 1e-10);
    CHECK((x * xi - eye).norm() <= 1e-10);
    CHECK((xi - x.inverse()).norm() <= 1e-9);
    CHECK(pt.conforms(xi));
    CHECK(pt.conforms(Matrix(x * y)));
    // Block lower triangular in extension order.
    for (ElementIndex i = 0; i < p.size(); ++i)
      for (ElementIndex j = i + 1; j < p.size(); ++j)
        CHECK(x.block(dims.offset(i), dims.offset(j), dims.size(i), dims.size(j)).isZero(0.0));
  }
}

TEST_CASE("block dims and input permutation") {
  CHECK(kind_of([] { BlockDims(std::vector<Eigen::Index>{1, 0}); }) == ErrorKind::DimensionMismatch);
  const BlockDims d(std::vector<Eigen::Index>{2, 1, 3});
  CHECK(d.total() == 6);
  CHECK(d.offset(2) == 3);
  CHECK(d.total({0, 2}) == 5);

  const Poset p = Poset::build({"b", "a"}, {{"a", "b"}});  // internal order a, b
  const auto perm = input_to_internal(p, {2, 1});          // input blocks: b (2), a (1)
  Eigen::VectorXd v(3);
  v << 10, 11, 20;  // b0, b1, a0
  const Eigen::VectorXd w = perm * v;
  CHECK(w(0) == 20);
  CHECK(w(1) == 10);
  CHECK(w(2) == 11);
}
