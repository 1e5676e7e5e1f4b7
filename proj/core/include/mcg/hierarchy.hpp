#pragma once

#include <limits>
#include <span>
#include <vector>

#include "mcg/types.hpp"

namespace mcg {

/// One agglomeration step: `children` become the new node `id` at strength `lambda`.
struct Merge {
  int id = 0;
  std::vector<int> children;
  double lambda = 0.0;

  bool operator==(const Merge&) const = default;
};

/// Ultrametric contour map stored in its dendrogram form.
///
/// Leaves 0..K-1 are the labels of `finest`; merge i creates node K+i.
/// Strengths never decrease along `merges`, and the last merge (if any)
/// covers the whole image.
struct Ucm {
  LabelMap finest;
  std::vector<Merge> merges;

  int leaf_count() const { return static_cast<int>(label_count(finest)); }
  int node_count() const { return leaf_count() + static_cast<int>(merges.size()); }
  bool operator==(const Ucm&) const = default;
};

/// A flat segmentation together with the threshold that produced it.
struct Partition {
  LabelMap labels;
  double level = 0.0;
};

/// Contour-grid indices of boundary edges, ascending.
using EdgeSet = std::vector<std::size_t>;

inline constexpr double kRootHeight = std::numeric_limits<double>::infinity();

/// Navigable view of a Ucm's region tree. Construction validates the
/// dendrogram invariants and throws ParameterError when they fail.
///
/// Steps index the sequential merge list: the cut at step s is the state
/// after the first s merges. A node is maximal in cuts
/// birth_step(n) <= s < death_step(n).
class Dendrogram {
 public:
  explicit Dendrogram(const Ucm& u);

  int leaf_count() const { return leaf_count_; }
  int node_count() const { return static_cast<int>(parent_.size()); }
  int merge_count() const { return node_count() - leaf_count_; }
  int root() const { return node_count() - 1; }
  bool is_leaf(int n) const { return n < leaf_count_; }

  int parent(int n) const { return parent_[static_cast<std::size_t>(n)]; }
  const std::vector<int>& children(int n) const { return children_[static_cast<std::size_t>(n)]; }

  /// Strength at which n merges into its parent; kRootHeight for the root.
  double height(int n) const { return height_[static_cast<std::size_t>(n)]; }
  /// Strength of the merge that created n; 0 for leaves.
  double birth(int n) const { return birth_[static_cast<std::size_t>(n)]; }
  int birth_step(int n) const { return birth_step_[static_cast<std::size_t>(n)]; }
  int death_step(int n) const { return death_step_[static_cast<std::size_t>(n)]; }
  int depth(int n) const { return depth_[static_cast<std::size_t>(n)]; }

  /// Leaves under n; contiguous in DFS order.
  std::span<const int> leaves(int n) const;

  bool is_ancestor(int ancestor, int n) const;
  int lowest_common_ancestor(int a, int b) const;

  /// Largest finite merge strength, 0 without merges.
  double max_lambda() const { return max_lambda_; }

  /// For every leaf, the maximal node containing it in the cut at `step`.
  std::vector<int> owners_at_step(int step) const;
  /// For every leaf, the maximal node containing it once all merges with
  /// strength <= t are applied.
  std::vector<int> owners_at_level(double t) const;

 private:
  int leaf_count_ = 0;
  double max_lambda_ = 0.0;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<double> height_;
  std::vector<double> birth_;
  std::vector<int> birth_step_;
  std::vector<int> death_step_;
  std::vector<int> depth_;
  std::vector<int> leaf_order_;
  std::vector<int> leaf_begin_;
  std::vector<int> leaf_end_;
};

/// Finest superpixels by priority-flood watershed on per-pixel contour
/// energy (max of the pixel's incident edge strengths).
LabelMap finest_partition(const ContourMap& cm);

/// Greedy agglomeration by minimum mean boundary strength. Recorded
/// strengths are clamped to be non-decreasing.
Ucm build_ucm(const LabelMap& finest, const ContourMap& cm);

/// Cut at height t: merges with strength <= t applied.
Partition sample_hierarchy(const Ucm& u, double t);
/// Merges with strength < t applied; keeps every boundary of strength >= t.
Partition sample_hierarchy_below(const Ucm& u, double t);

/// Distinct merge strengths, ascending.
std::vector<double> merge_levels(const Ucm& u);

EdgeSet extract_boundary(const LabelMap& labels);
inline EdgeSet extract_boundary(const Partition& p) { return extract_boundary(p.labels); }

/// Every edge carries the strength at which its two pixels first share a region.
ContourMap ucm_strength_grid(const Ucm& u);

/// Inverse of ucm_strength_grid: single-linkage merge tree over `finest`
/// using the largest strength on each shared boundary.
Ucm ucm_from_strength_grid(const LabelMap& finest, const ContourMap& strength);

/// Connected components once every edge with strength > t is removed.
LabelMap regions_from_strength(const ContourMap& strength, double t);

}  // namespace mcg
