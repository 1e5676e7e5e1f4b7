#include "mcg/region_tree.hpp"

#include <algorithm>
#include <set>

namespace mcg {
namespace {

NodePair ordered(int a, int b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }

std::vector<std::vector<int>> leaf_adjacency(const Ucm& u) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(u.leaf_count()));
  for_each_edge(u.finest.dims, [&](const GridEdge& e) {
    const auto a = u.finest.labels[e.p];
    const auto b = u.finest.labels[e.q];
    if (a == b) return;
    adj[a].push_back(static_cast<int>(b));
    adj[b].push_back(static_cast<int>(a));
  });
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return adj;
}

}  // namespace

std::vector<long> compute_areas(const Ucm& u, CostCounter* cost) {
  std::vector<long> area(static_cast<std::size_t>(u.node_count()), 0);
  for (std::uint32_t leaf : u.finest.labels) ++area[leaf];
  if (cost) cost->pixel_touches += u.finest.labels.size();
  for (const Merge& m : u.merges) {
    long total = 0;
    for (int c : m.children) total += area[static_cast<std::size_t>(c)];
    area[static_cast<std::size_t>(m.id)] = total;
    if (cost) ++cost->merge_visits;
  }
  return area;
}

std::vector<BBox> compute_bboxes(const Ucm& u) {
  std::vector<BBox> box(static_cast<std::size_t>(u.node_count()));
  const Dims dims = u.finest.dims;
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) box[u.finest.at(y, x)].extend(y, x);
  }
  for (const Merge& m : u.merges) {
    BBox merged;
    for (int c : m.children) merged.extend(box[static_cast<std::size_t>(c)]);
    box[static_cast<std::size_t>(m.id)] = merged;
  }
  return box;
}

PerimeterTable compute_perimeters(const Ucm& u) {
  const std::size_t nodes = static_cast<std::size_t>(u.node_count());
  const Dims dims = u.finest.dims;
  const ContourMap strength = ucm_strength_grid(u);
  PerimeterTable table{std::vector<long>(nodes, 0), std::vector<double>(nodes, 0.0), {}};
  std::vector<std::map<int, EdgeStats>> active(nodes);

  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const int border = (y == 0) + (x == 0) + (y + 1 == dims.height) + (x + 1 == dims.width);
      table.perimeter[u.finest.at(y, x)] += border;
    }
  }
  for_each_edge(dims, [&](const GridEdge& e) {
    const int a = static_cast<int>(u.finest.labels[e.p]);
    const int b = static_cast<int>(u.finest.labels[e.q]);
    if (a == b) return;
    const double s = strength.data()[e.grid];
    for (int leaf : {a, b}) {
      table.perimeter[static_cast<std::size_t>(leaf)] += 1;
      table.boundary_strength[static_cast<std::size_t>(leaf)] += s;
    }
    EdgeStats& ab = active[static_cast<std::size_t>(a)][b];
    ab.count += 1;
    ab.strength += s;
    EdgeStats& ba = active[static_cast<std::size_t>(b)][a];
    ba.count += 1;
    ba.strength += s;
  });
  for (std::size_t a = 0; a < static_cast<std::size_t>(u.leaf_count()); ++a) {
    for (const auto& [b, st] : active[a]) {
      if (static_cast<int>(a) < b) table.shared[{static_cast<int>(a), b}] = st;
    }
  }

  for (const Merge& m : u.merges) {
    const std::size_t id = static_cast<std::size_t>(m.id);
    EdgeStats internal;
    long perimeter = 0;
    for (std::size_t i = 0; i < m.children.size(); ++i) {
      const std::size_t ci = static_cast<std::size_t>(m.children[i]);
      perimeter += table.perimeter[ci];
      for (std::size_t j = i + 1; j < m.children.size(); ++j) {
        auto it = active[ci].find(m.children[j]);
        if (it == active[ci].end()) continue;
        internal.count += it->second.count;
        internal.strength += it->second.strength;
      }
    }
    table.perimeter[id] = perimeter - 2 * internal.count;

    auto& merged = active[id];
    for (int child : m.children) {
      for (const auto& [c, st] : active[static_cast<std::size_t>(child)]) {
        if (std::find(m.children.begin(), m.children.end(), c) != m.children.end()) continue;
        EdgeStats& s = merged[c];
        s.count += st.count;
        s.strength += st.strength;
      }
      active[static_cast<std::size_t>(child)].clear();
    }
    // Summing the outward boundaries directly avoids cancellation in
    // children-minus-shared, so the root comes out exactly 0.
    double outward = 0.0;
    for (const auto& [c, st] : merged) outward += st.strength;
    table.boundary_strength[id] = outward;
    for (const auto& [c, st] : merged) {
      auto& other = active[static_cast<std::size_t>(c)];
      for (int child : m.children) other.erase(child);
      other[m.id] = st;
      table.shared[ordered(m.id, c)] = st;
    }
  }
  return table;
}

NeighborSets compute_neighbors(const Ucm& u, double strength_floor) {
  const Dendrogram tree(u);
  const auto leaf_adj = leaf_adjacency(u);
  const std::size_t nodes = static_cast<std::size_t>(tree.node_count());
  NeighborSets out{strength_floor, std::vector<bool>(nodes, false), std::vector<std::vector<int>>(nodes)};
  std::vector<std::set<int>> sets(nodes);
  std::vector<int> owner(static_cast<std::size_t>(tree.leaf_count()), tree.root());
  out.reached[static_cast<std::size_t>(tree.root())] = true;

  for (auto it = u.merges.rbegin(); it != u.merges.rend() && it->lambda >= strength_floor; ++it) {
    for (int child : it->children) {
      out.reached[static_cast<std::size_t>(child)] = true;
      for (int leaf : tree.leaves(child)) owner[static_cast<std::size_t>(leaf)] = child;
    }
    // Whichever of two co-existing nodes enters the sweep later finds the
    // other as a current owner, so each adjacent pair is recorded once here.
    for (int child : it->children) {
      for (int leaf : tree.leaves(child)) {
        for (int across : leaf_adj[static_cast<std::size_t>(leaf)]) {
          const int o = owner[static_cast<std::size_t>(across)];
          if (o == child) continue;
          sets[static_cast<std::size_t>(child)].insert(o);
          sets[static_cast<std::size_t>(o)].insert(child);
        }
      }
    }
  }
  for (std::size_t n = 0; n < nodes; ++n) out.sets[n].assign(sets[n].begin(), sets[n].end());
  return out;
}

std::vector<int> neighbors_at_step(const NeighborSets& sets, const Dendrogram& tree, int node, int step) {
  auto maximal = [&](int n) { return tree.birth_step(n) <= step && step < tree.death_step(n); };
  std::vector<int> out;
  if (!maximal(node)) return out;
  for (int m : sets.sets[static_cast<std::size_t>(node)]) {
    if (maximal(m)) out.push_back(m);
  }
  return out;
}

RegionTree::RegionTree(const Ucm& u, double strength_floor)
    : tree_(u),
      dims_(u.finest.dims),
      areas_(compute_areas(u)),
      bboxes_(compute_bboxes(u)),
      perimeters_(compute_perimeters(u)),
      neighbors_(compute_neighbors(u, strength_floor)) {}

EdgeStats RegionTree::shared(int a, int b) const {
  auto it = perimeters_.shared.find(ordered(a, b));
  return it == perimeters_.shared.end() ? EdgeStats{} : it->second;
}

}  // namespace mcg
