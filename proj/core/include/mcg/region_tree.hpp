#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "mcg/hierarchy.hpp"

namespace mcg {

/// Instrumentation for the tree-propagation cost argument.
struct CostCounter {
  std::size_t pixel_touches = 0;
  std::size_t merge_visits = 0;
};

/// Shared boundary between two regions: unit edge count and UCM strength sum.
struct EdgeStats {
  long count = 0;
  double strength = 0.0;
};

using NodePair = std::pair<int, int>;  // (smaller id, larger id)

struct PerimeterTable {
  std::vector<long> perimeter;             ///< unit edges against the complement, image border included
  std::vector<double> boundary_strength;   ///< UCM strength summed over those edges (border edges count 0)
  std::map<NodePair, EdgeStats> shared;    ///< every adjacent pair that co-exists in some cut
};

/// Neighbour sets gathered by a top-down sweep that undoes merges from the
/// root down to `floor`. sets[n] is the union, over every cut the sweep
/// visits, of the nodes adjacent to n in that cut.
struct NeighborSets {
  double floor = 0.0;
  std::vector<bool> reached;
  std::vector<std::vector<int>> sets;
};

/// One image scan for the leaves, then one visit per merge.
std::vector<long> compute_areas(const Ucm& u, CostCounter* cost = nullptr);
std::vector<BBox> compute_bboxes(const Ucm& u);
PerimeterTable compute_perimeters(const Ucm& u);
NeighborSets compute_neighbors(const Ucm& u, double strength_floor);

/// Neighbours of `node` in the cut after `step` merges; empty when node is
/// not maximal there.
std::vector<int> neighbors_at_step(const NeighborSets& sets, const Dendrogram& tree, int node, int step);

/// All per-node descriptors of one hierarchy.
class RegionTree {
 public:
  RegionTree(const Ucm& u, double strength_floor);

  const Dendrogram& tree() const { return tree_; }
  Dims dims() const { return dims_; }
  long area(int n) const { return areas_[static_cast<std::size_t>(n)]; }
  const BBox& bbox(int n) const { return bboxes_[static_cast<std::size_t>(n)]; }
  long perimeter(int n) const { return perimeters_.perimeter[static_cast<std::size_t>(n)]; }
  double boundary_strength(int n) const { return perimeters_.boundary_strength[static_cast<std::size_t>(n)]; }
  const NeighborSets& neighbors() const { return neighbors_; }
  /// Shared boundary of two co-existing nodes; zero when they never touch.
  EdgeStats shared(int a, int b) const;

 private:
  Dendrogram tree_;
  Dims dims_;
  std::vector<long> areas_;
  std::vector<BBox> bboxes_;
  PerimeterTable perimeters_;
  NeighborSets neighbors_;
};

}  // namespace mcg
