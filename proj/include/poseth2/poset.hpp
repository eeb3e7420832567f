#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "poseth2/types.hpp"

namespace poseth2 {

/// A chain i = c0 < c1 < ... < ck = j, stored as its consecutive pairs
/// (c0,c1), (c1,c2), ... . The chain from an element to itself is empty.
using Chain = std::vector<std::pair<ElementIndex, ElementIndex>>;

/// Finite partially ordered set.
///
/// Elements are addressed by their position in a fixed linear extension, so
/// `leq(i, j)` implies `i <= j`. The extension is the topological order of
/// the Hasse graph that keeps the caller's element order wherever the
/// relation allows it. External labels are kept for I/O and messages.
///
/// Relations follow the downstream convention: `leq(a, b)` reads "a precedes
/// b", and information flows from a to b. Matrices in the incidence algebra
/// have block (i, j) zero unless `leq(j, i)`.
class Poset {
 public:
  /// Builds the poset generated by `hasse_edges` (pairs (a, b) meaning
  /// a precedes b). Edges need not be covering relations.
  /// Throws DuplicateLabel, UnknownLabel, CycleDetected.
  static Poset build(const std::vector<std::string>& elements,
                     const std::vector<std::pair<std::string, std::string>>& hasse_edges);

  std::size_t size() const noexcept { return labels_.size(); }

  const std::string& label(ElementIndex i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// Throws UnknownLabel.
  ElementIndex index_of(std::string_view label) const;

  /// Position of element i in the element list handed to build().
  std::size_t input_position(ElementIndex i) const { return input_position_.at(i); }

  bool leq(ElementIndex a, ElementIndex b) const { return leq_[a * size() + b]; }
  bool less(ElementIndex a, ElementIndex b) const { return a != b && leq(a, b); }
  bool comparable(ElementIndex a, ElementIndex b) const { return leq(a, b) || leq(b, a); }

  /// Covering relations (transitive reduction), in index order.
  const std::vector<std::pair<ElementIndex, ElementIndex>>& hasse_edges() const noexcept {
    return hasse_;
  }

  // Derived sets, each sorted by linear-extension index.
  std::vector<ElementIndex> downstream(ElementIndex j) const;
  std::vector<ElementIndex> strict_downstream(ElementIndex j) const;
  std::vector<ElementIndex> upstream(ElementIndex j) const;
  std::vector<ElementIndex> strict_upstream(ElementIndex j) const;
  std::vector<ElementIndex> off_stream(ElementIndex j) const;
  /// {q : i <= q <= j}; empty when i and j are not ordered.
  std::vector<ElementIndex> interval(ElementIndex i, ElementIndex j) const;

  /// All chains from i to j over the full strict relation. Throws
  /// NotComparable unless leq(i, j).
  std::vector<Chain> chains_between(ElementIndex i, ElementIndex j) const;

  /// Sum over j of |strictly downstream of j|.
  std::size_t sigma() const;

 private:
  Poset() = default;
  void check(ElementIndex i) const;

  std::vector<std::string> labels_;
  std::vector<std::size_t> input_position_;
  std::unordered_map<std::string, ElementIndex> index_;
  std::vector<bool> leq_;
  std::vector<std::pair<ElementIndex, ElementIndex>> hasse_;
};

/// Block sizes of one matrix dimension, one block per poset element.
class BlockDims {
 public:
  BlockDims() = default;
  /// Throws DimensionMismatch on a block size < 1.
  explicit BlockDims(std::vector<Eigen::Index> sizes);

  std::size_t count() const noexcept { return sizes_.size(); }
  Eigen::Index size(ElementIndex i) const { return sizes_.at(i); }
  Eigen::Index offset(ElementIndex i) const { return offsets_.at(i); }
  Eigen::Index total() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  const std::vector<Eigen::Index>& sizes() const noexcept { return sizes_; }

  /// Total size of the listed blocks.
  Eigen::Index total(const std::vector<ElementIndex>& blocks) const;

 private:
  std::vector<Eigen::Index> sizes_;
  std::vector<Eigen::Index> offsets_;  // size()+1 entries, offsets_[0] == 0
};

/// Per-subsystem dimensions of a poset-causal plant.
struct BlockPartition {
  BlockDims states;
  BlockDims inputs;
  BlockDims disturbances;
  Eigen::Index output_dim = 0;
};

/// The block sparsity pattern of the incidence algebra: block (i, j) may be
/// nonzero only when j precedes i.
class IncidencePattern {
 public:
  IncidencePattern(const Poset& poset, BlockDims rows, BlockDims cols);

  const Poset& poset() const noexcept { return poset_; }
  const BlockDims& rows() const noexcept { return rows_; }
  const BlockDims& cols() const noexcept { return cols_; }

  bool allowed(ElementIndex i, ElementIndex j) const { return poset_.leq(j, i); }

  /// Largest absolute entry over all forbidden blocks. Throws DimensionMismatch.
  double violation(const Matrix& m) const;
  double violation(const CMatrix& m) const;

  /// violation(m) <= atol (atol = 0 demands exact zeros).
  bool conforms(const Matrix& m, double atol = 1e-9) const { return violation(m) <= atol; }
  bool conforms(const CMatrix& m, double atol = 1e-9) const { return violation(m) <= atol; }

  /// First forbidden block exceeding atol as (row element, column element).
  std::optional<std::pair<ElementIndex, ElementIndex>> first_violation(const Matrix& m,
                                                                       double atol) const;

  /// Inverse by the chain path-sum formula. Requires square blocks.
  /// Throws SingularDiagonalBlock, DimensionMismatch.
  Matrix inverse(const Matrix& m) const;

 private:
  Poset poset_;
  BlockDims rows_;
  BlockDims cols_;
};

/// Permutation P with (P m)_internal = m_input: maps a vector laid out in the
/// caller's element order onto linear-extension order.
Eigen::PermutationMatrix<Eigen::Dynamic> input_to_internal(const Poset& poset,
                                                            const std::vector<Eigen::Index>& input_sizes);

}  // namespace poseth2
