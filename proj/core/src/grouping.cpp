#include "mcg/grouping.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <set>

#include "mcg/error.hpp"
#include "mcg/eval.hpp"

namespace mcg {

namespace {

std::atomic<std::size_t> g_materializations{0};

struct Tuple {
  std::vector<int> nodes;
  int first = 0;  // latest birth step among members
  int last = 0;   // earliest death step among members
};

}  // namespace

std::string tuple_name(int size) {
  switch (size) {
    case 1: return "singletons";
    case 2: return "pairs";
    case 3: return "triplets";
    case 4: return "quadruplets";
    default: throw ParameterError("tuple size must be in 1..4");
  }
}

bool rank_before(const Proposal& a, const Proposal& b) {
  if (a.rank_key != b.rank_key) return a.rank_key > b.rank_key;
  return a.nodes < b.nodes;
}

std::vector<RankedList> enumerate_tuples(const Dendrogram& tree, const NeighborSets& neighbors, int max_tuple,
                                         int hierarchy) {
  if (max_tuple < 1 || max_tuple > 4) throw ParameterError("max_tuple must be in 1..4");
  if (neighbors.reached.size() != static_cast<std::size_t>(tree.node_count())) {
    throw ParameterError("neighbour sets do not match the dendrogram");
  }
  std::vector<RankedList> lists;
  auto emit = [&](int size, const std::vector<Tuple>& tuples) {
    RankedList list;
    list.id = tuple_name(size);
    list.hierarchy = hierarchy;
    list.tuple_size = size;
    list.proposals.reserve(tuples.size());
    for (const Tuple& t : tuples) {
      double key = kRootHeight;
      for (int n : t.nodes) key = std::min(key, tree.height(n));
      list.proposals.push_back(Proposal{hierarchy, t.nodes, key});
    }
    std::sort(list.proposals.begin(), list.proposals.end(), rank_before);
    lists.push_back(std::move(list));
  };

  std::vector<Tuple> current;
  for (int n = 0; n < tree.node_count(); ++n) {
    if (neighbors.reached[static_cast<std::size_t>(n)]) current.push_back({{n}, tree.birth_step(n), tree.death_step(n)});
  }
  emit(1, current);

  for (int size = 2; size <= max_tuple; ++size) {
    std::set<std::vector<int>> seen;
    std::vector<Tuple> next;
    for (const Tuple& t : current) {
      for (int member : t.nodes) {
        for (int cand : neighbors.sets[static_cast<std::size_t>(member)]) {
          if (!neighbors.reached[static_cast<std::size_t>(cand)]) continue;
          if (std::binary_search(t.nodes.begin(), t.nodes.end(), cand)) continue;
          const int first = std::max(t.first, tree.birth_step(cand));
          const int last = std::min(t.last, tree.death_step(cand));
          if (first >= last) continue;  // never maximal together
          std::vector<int> nodes = t.nodes;
          nodes.insert(std::upper_bound(nodes.begin(), nodes.end(), cand), cand);
          if (!seen.insert(nodes).second) continue;
          next.push_back({std::move(nodes), first, last});
        }
      }
    }
    emit(size, next);
    current = std::move(next);
  }
  return lists;
}

std::vector<RankedList> enumerate_tuples(const Ucm& u, int max_tuple, double strength_floor, int hierarchy) {
  return enumerate_tuples(Dendrogram(u), compute_neighbors(u, strength_floor), max_tuple, hierarchy);
}

double default_strength_floor(const Ucm& u, std::size_t node_budget) {
  if (u.merges.empty()) return 0.0;
  // Walk merges from the top; every merge at level >= v contributes its children.
  std::size_t count = 1;
  double floor = kRootHeight;
  std::size_t i = u.merges.size();
  while (i > 0) {
    const double level = u.merges[i - 1].lambda;
    std::size_t added = 0;
    std::size_t j = i;
    while (j > 0 && u.merges[j - 1].lambda == level) {
      added += u.merges[j - 1].children.size();
      --j;
    }
    if (count + added > node_budget) break;
    count += added;
    floor = level;
    i = j;
  }
  return floor;
}

BinaryMask proposal_mask(const Proposal& p, const Dendrogram& tree, const LabelMap& finest) {
  std::vector<char> in(static_cast<std::size_t>(tree.leaf_count()), 0);
  for (int n : p.nodes) {
    if (n < 0 || n >= tree.node_count()) throw ParameterError("proposal references a node outside the hierarchy");
    for (int leaf : tree.leaves(n)) in[static_cast<std::size_t>(leaf)] = 1;
  }
  BinaryMask mask(finest.dims);
  for (std::size_t i = 0; i < finest.labels.size(); ++i) {
    if (in[finest.labels[i]]) mask.set(i);
  }
  g_materializations.fetch_add(1, std::memory_order_relaxed);
  return mask;
}

BinaryMask proposal_mask(const Proposal& p, const Ucm& u) { return proposal_mask(p, Dendrogram(u), u.finest); }

std::size_t mask_materializations() { return g_materializations.load(std::memory_order_relaxed); }

std::vector<std::size_t> dedup_indices(std::span<const BinaryMask> masks, double j_threshold) {
  if (!(j_threshold > 0.0 && j_threshold <= 1.0)) throw ParameterError("dedup threshold must lie in (0,1]");
  std::vector<std::size_t> kept;
  std::vector<std::size_t> sizes(masks.size());
  std::vector<BBox> boxes(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    sizes[i] = masks[i].count();
    boxes[i] = masks[i].bbox();
  }
  auto disjoint_boxes = [](const BBox& a, const BBox& b) {
    return a.empty() || b.empty() || a.row_max < b.row_min || b.row_max < a.row_min || a.col_max < b.col_min ||
           b.col_max < a.col_min;
  };
  for (std::size_t i = 0; i < masks.size(); ++i) {
    bool keep = true;
    for (std::size_t k : kept) {
      const auto lo = std::min(sizes[i], sizes[k]);
      const auto hi = std::max(sizes[i], sizes[k]);
      // J <= |small| / |large|, and disjoint boxes give J = 0.
      if (hi == 0 || static_cast<double>(lo) <= j_threshold * static_cast<double>(hi)) continue;
      if (disjoint_boxes(boxes[i], boxes[k])) continue;
      if (jaccard(masks[i], masks[k]) > j_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(i);
  }
  return kept;
}

std::vector<Proposal> dedup(std::span<const Proposal> pool, std::span<const BinaryMask> masks, double j_threshold) {
  if (pool.size() != masks.size()) throw ParameterError("dedup: one mask per proposal required");
  std::vector<Proposal> out;
  for (std::size_t i : dedup_indices(masks, j_threshold)) out.push_back(pool[i]);
  return out;
}

}  // namespace mcg
