#include "poseth2/poset.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "poseth2/error.hpp"

namespace poseth2 {

Poset Poset::build(const std::vector<std::string>& elements,
                   const std::vector<std::pair<std::string, std::string>>& hasse_edges) {
  const std::size_t p = elements.size();
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t k = 0; k < p; ++k) {
    if (!position.emplace(elements[k], k).second) {
      throw Error(ErrorKind::DuplicateLabel, "element '" + elements[k] + "' listed twice");
    }
  }
  auto lookup = [&](const std::string& label) {
    auto it = position.find(label);
    if (it == position.end()) {
      throw Error(ErrorKind::UnknownLabel, "edge references unknown element '" + label + "'");
    }
    return it->second;
  };

  // Reflexive-transitive closure in input positions.
  std::vector<bool> rel(p * p, false);
  for (std::size_t k = 0; k < p; ++k) rel[k * p + k] = true;
  for (const auto& [from, to] : hasse_edges) rel[lookup(from) * p + lookup(to)] = true;
  for (std::size_t k = 0; k < p; ++k)
    for (std::size_t a = 0; a < p; ++a)
      if (rel[a * p + k])
        for (std::size_t b = 0; b < p; ++b)
          if (rel[k * p + b]) rel[a * p + b] = true;

  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      if (rel[a * p + b] && rel[b * p + a]) {
        throw Error(ErrorKind::CycleDetected,
                    "'" + elements[a] + "' and '" + elements[b] + "' precede each other");
      }

  // Linear extension: repeatedly place the earliest-listed element whose
  // strict predecessors are all placed.
  std::vector<std::size_t> order;
  std::vector<bool> placed(p, false);
  while (order.size() < p) {
    for (std::size_t c = 0; c < p; ++c) {
      if (placed[c]) continue;
      bool ready = true;
      for (std::size_t a = 0; a < p && ready; ++a)
        if (a != c && rel[a * p + c] && !placed[a]) ready = false;
      if (ready) {
        placed[c] = true;
        order.push_back(c);
        break;
      }
    }
  }

  Poset poset;
  poset.labels_.resize(p);
  poset.input_position_ = order;
  poset.leq_.assign(p * p, false);
  for (std::size_t i = 0; i < p; ++i) {
    poset.labels_[i] = elements[order[i]];
    poset.index_.emplace(poset.labels_[i], i);
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) poset.leq_[i * p + j] = rel[order[i] * p + order[j]];

  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      if (!poset.less(a, b)) continue;
      bool covering = true;
      for (std::size_t c = 0; c < p && covering; ++c)
        if (poset.less(a, c) && poset.less(c, b)) covering = false;
      if (covering) poset.hasse_.emplace_back(a, b);
    }
  return poset;
}

ElementIndex Poset::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) {
    throw Error(ErrorKind::UnknownLabel, "no element '" + std::string(label) + "'");
  }
  return it->second;
}

void Poset::check(ElementIndex i) const {
  if (i >= size()) {
    throw Error(ErrorKind::UnknownLabel, "element index " + std::to_string(i) + " out of range");
  }
}

std::vector<ElementIndex> Poset::downstream(ElementIndex j) const {
  check(j);
  std::vector<ElementIndex> out;
  for (ElementIndex q = 0; q < size(); ++q)
    if (leq(j, q)) out.push_back(q);
  return out;
}

std::vector<ElementIndex> Poset::strict_downstream(ElementIndex j) const {
  check(j);
  std::vector<ElementIndex> out;
  for (ElementIndex q = 0; q < size(); ++q)
    if (less(j, q)) out.push_back(q);
  return out;
}

std::vector<ElementIndex> Poset::upstream(ElementIndex j) const {
  check(j);
  std::vector<ElementIndex> out;
  for (ElementIndex q = 0; q < size(); ++q)
    if (leq(q, j)) out.push_back(q);
  return out;
}

std::vector<ElementIndex> Poset::strict_upstream(ElementIndex j) const {
  check(j);
  std::vector<ElementIndex> out;
  for (ElementIndex q = 0; q < size(); ++q)
    if (less(q, j)) out.push_back(q);
  return out;
}

std::vector<ElementIndex> Poset::off_stream(ElementIndex j) const {
  check(j);
  std::vector<ElementIndex> out;
  for (ElementIndex q = 0; q < size(); ++q)
    if (!comparable(q, j)) out.push_back(q);
  return out;
}

std::vector<ElementIndex> Poset::interval(ElementIndex i, ElementIndex j) const {
  check(i);
  check(j);
  std::vector<ElementIndex> out;
  for (ElementIndex q = 0; q < size(); ++q)
    if (leq(i, q) && leq(q, j)) out.push_back(q);
  return out;
}

std::vector<Chain> Poset::chains_between(ElementIndex i, ElementIndex j) const {
  check(i);
  check(j);
  if (!leq(i, j)) {
    throw Error(ErrorKind::NotComparable, "'" + label(i) + "' does not precede '" + label(j) + "'");
  }
  std::vector<Chain> chains;
  Chain current;
  std::function<void(ElementIndex)> extend = [&](ElementIndex at) {
    if (at == j) {
      chains.push_back(current);
      return;
    }
    for (ElementIndex next = at + 1; next < size(); ++next) {
      if (!less(at, next) || !leq(next, j)) continue;
      current.emplace_back(at, next);
      extend(next);
      current.pop_back();
    }
  };
  extend(i);
  return chains;
}

std::size_t Poset::sigma() const {
  std::size_t total = 0;
  for (ElementIndex j = 0; j < size(); ++j) total += strict_downstream(j).size();
  return total;
}

BlockDims::BlockDims(std::vector<Eigen::Index> sizes) : sizes_(std::move(sizes)) {
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (auto s : sizes_) {
    if (s < 1) throw Error(ErrorKind::DimensionMismatch, "block sizes must be at least 1");
    offsets_.push_back(offsets_.back() + s);
  }
}

Eigen::Index BlockDims::total(const std::vector<ElementIndex>& blocks) const {
  Eigen::Index n = 0;
  for (auto b : blocks) n += size(b);
  return n;
}

IncidencePattern::IncidencePattern(const Poset& poset, BlockDims rows, BlockDims cols)
    : poset_(poset), rows_(std::move(rows)), cols_(std::move(cols)) {
  if (rows_.count() != poset_.size() || cols_.count() != poset_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "partition length differs from poset size");
  }
}

namespace {

template <typename Derived>
double forbidden_max(const IncidencePattern& pattern, const Eigen::MatrixBase<Derived>& m,
                     std::optional<std::pair<ElementIndex, ElementIndex>>* first, double atol) {
  const auto& rows = pattern.rows();
  const auto& cols = pattern.cols();
  if (m.rows() != rows.total() || m.cols() != cols.total()) {
    throw Error(ErrorKind::DimensionMismatch,
                "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", pattern expects " + std::to_string(rows.total()) + "x" +
                    std::to_string(cols.total()));
  }
  double worst = 0.0;
  const std::size_t p = rows.count();
  for (ElementIndex i = 0; i < p; ++i)
    for (ElementIndex j = 0; j < p; ++j) {
      if (pattern.allowed(i, j)) continue;
      const double v =
          m.block(rows.offset(i), cols.offset(j), rows.size(i), cols.size(j)).cwiseAbs().maxCoeff();
      if (first && !*first && v > atol) *first = std::make_pair(i, j);
      worst = std::max(worst, v);
    }
  return worst;
}

}  // namespace

double IncidencePattern::violation(const Matrix& m) const {
  return forbidden_max(*this, m, nullptr, 0.0);
}

double IncidencePattern::violation(const CMatrix& m) const {
  return forbidden_max(*this, m, nullptr, 0.0);
}

std::optional<std::pair<ElementIndex, ElementIndex>> IncidencePattern::first_violation(
    const Matrix& m, double atol) const {
  std::optional<std::pair<ElementIndex, ElementIndex>> first;
  forbidden_max(*this, m, &first, atol);
  return first;
}

Matrix IncidencePattern::inverse(const Matrix& m) const {
  if (rows_.sizes() != cols_.sizes()) {
    throw Error(ErrorKind::DimensionMismatch, "incidence inverse needs square blocks");
  }
  if (m.rows() != rows_.total() || m.cols() != cols_.total()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix does not match the block partition");
  }
  const std::size_t p = poset_.size();
  auto block = [&](ElementIndex i, ElementIndex j) {
    return m.block(rows_.offset(i), cols_.offset(j), rows_.size(i), cols_.size(j));
  };

  std::vector<Matrix> diag_inv(p);
  for (ElementIndex k = 0; k < p; ++k) {
    Eigen::FullPivLU<Matrix> lu(block(k, k));
    if (!lu.isInvertible()) {
      throw Error(ErrorKind::SingularDiagonalBlock,
                  "diagonal block of '" + poset_.label(k) + "' is singular");
    }
    diag_inv[k] = lu.inverse();
  }

  Matrix inv = Matrix::Zero(m.rows(), m.cols());
  for (ElementIndex i = 0; i < p; ++i)
    for (ElementIndex j = 0; j < p; ++j) {
      if (!poset_.leq(j, i)) continue;
      auto target = inv.block(rows_.offset(i), cols_.offset(j), rows_.size(i), cols_.size(j));
      if (i == j) {
        target = diag_inv[i];
        continue;
      }
      // Each chain j -> ... -> i contributes A_ii^-1 times the product of
      // (-A_lk A_kk^-1) over its links, the link ending at i leftmost.
      Matrix sum = Matrix::Zero(rows_.size(i), cols_.size(j));
      for (const Chain& chain : poset_.chains_between(j, i)) {
        Matrix term = diag_inv[i];
        for (auto link = chain.rbegin(); link != chain.rend(); ++link) {
          const auto [k, l] = *link;
          term = term * (-block(l, k) * diag_inv[k]);
        }
        sum += term;
      }
      target = sum;
    }
  return inv;
}

Eigen::PermutationMatrix<Eigen::Dynamic> input_to_internal(
    const Poset& poset, const std::vector<Eigen::Index>& input_sizes) {
  const std::size_t p = poset.size();
  if (input_sizes.size() != p) {
    throw Error(ErrorKind::DimensionMismatch, "partition length differs from poset size");
  }
  std::vector<Eigen::Index> input_offset(p + 1, 0);
  for (std::size_t k = 0; k < p; ++k) input_offset[k + 1] = input_offset[k] + input_sizes[k];

  Eigen::VectorXi indices(input_offset[p]);
  Eigen::Index internal = 0;
  for (ElementIndex i = 0; i < p; ++i) {
    const std::size_t k = poset.input_position(i);
    for (Eigen::Index r = 0; r < input_sizes[k]; ++r) {
      indices(input_offset[k] + r) = static_cast<int>(internal++);
    }
  }
  return Eigen::PermutationMatrix<Eigen::Dynamic>(indices);
}

}  // namespace poseth2
