#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcg/hierarchy.hpp"
#include "mcg/region_tree.hpp"

namespace mcg {

/// Union of 1-4 co-existing, connected dendrogram nodes of one hierarchy.
struct Proposal {
  int hierarchy = 0;
  std::vector<int> nodes;  ///< ascending
  double rank_key = 0.0;   ///< minimum height over members

  bool operator==(const Proposal&) const = default;
};

struct RankedList {
  std::string id;
  int hierarchy = 0;
  int tuple_size = 1;
  std::vector<Proposal> proposals;  ///< descending rank_key, ties by node tuple
};

/// "singletons", "pairs", "triplets", "quadruplets".
std::string tuple_name(int size);

/// One list per tuple size 1..max_tuple over the nodes reached by `neighbors`.
std::vector<RankedList> enumerate_tuples(const Dendrogram& tree, const NeighborSets& neighbors, int max_tuple,
                                         int hierarchy = 0);
std::vector<RankedList> enumerate_tuples(const Ucm& u, int max_tuple, double strength_floor, int hierarchy = 0);

/// Smallest merge level whose candidate set (height >= level) holds at most
/// `node_budget` nodes.
double default_strength_floor(const Ucm& u, std::size_t node_budget);

/// Strict ordering used inside every RankedList.
bool rank_before(const Proposal& a, const Proposal& b);

BinaryMask proposal_mask(const Proposal& p, const Ucm& u);
BinaryMask proposal_mask(const Proposal& p, const Dendrogram& tree, const LabelMap& finest);

/// Number of proposal masks built so far by this process.
std::size_t mask_materializations();

/// Greedy first-wins pass: indices of masks whose Jaccard with every
/// earlier survivor is <= j_threshold.
std::vector<std::size_t> dedup_indices(std::span<const BinaryMask> masks, double j_threshold);
std::vector<Proposal> dedup(std::span<const Proposal> pool, std::span<const BinaryMask> masks, double j_threshold);

}  // namespace mcg
