#include "mcg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>

#include "mcg/error.hpp"

namespace mcg {
namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
};

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

LabelMap labels_from_owners(const LabelMap& finest, const std::vector<int>& owner) {
  LabelMap out{finest.dims, std::vector<std::uint32_t>(finest.labels.size())};
  for (std::size_t i = 0; i < finest.labels.size(); ++i) {
    out.labels[i] = static_cast<std::uint32_t>(owner[finest.labels[i]]);
  }
  return canonicalize(out);
}

}  // namespace

Dendrogram::Dendrogram(const Ucm& u) : leaf_count_(u.leaf_count()) {
  const int k = leaf_count_;
  const int m = static_cast<int>(u.merges.size());
  const std::size_t n = static_cast<std::size_t>(k + m);
  if (k == 0) throw ParameterError("hierarchy has no leaves");
  parent_.assign(n, -1);
  children_.assign(n, {});
  height_.assign(n, kRootHeight);
  birth_.assign(n, 0.0);
  birth_step_.assign(n, 0);
  death_step_.assign(n, m + 1);

  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const Merge& mg = u.merges[static_cast<std::size_t>(i)];
    if (mg.id != k + i) {
      throw ParameterError("merge " + std::to_string(i) + " has id " + std::to_string(mg.id) + ", expected " +
                           std::to_string(k + i));
    }
    if (!std::isfinite(mg.lambda)) throw ParameterError("merge strength must be finite");
    if (mg.lambda < prev) throw ParameterError("merge strengths must be non-decreasing");
    prev = mg.lambda;
    if (mg.children.size() < 2) throw ParameterError("merge needs at least two children");
    for (int c : mg.children) {
      if (c < 0 || c >= mg.id) throw ParameterError("merge child id out of range");
      if (parent_[static_cast<std::size_t>(c)] != -1) throw ParameterError("node merged twice");
      parent_[static_cast<std::size_t>(c)] = mg.id;
      height_[static_cast<std::size_t>(c)] = mg.lambda;
      death_step_[static_cast<std::size_t>(c)] = i + 1;
    }
    children_[static_cast<std::size_t>(mg.id)] = mg.children;
    birth_[static_cast<std::size_t>(mg.id)] = mg.lambda;
    birth_step_[static_cast<std::size_t>(mg.id)] = i + 1;
    max_lambda_ = std::max(max_lambda_, mg.lambda);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (parent_[i] == -1) throw ParameterError("hierarchy has more than one root");
  }

  depth_.assign(n, 0);
  for (int id = static_cast<int>(n) - 2; id >= 0; --id) {
    depth_[static_cast<std::size_t>(id)] = depth_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(id)])] + 1;
  }

  leaf_begin_.assign(n, 0);
  leaf_end_.assign(n, 0);
  leaf_order_.reserve(static_cast<std::size_t>(k));
  std::vector<std::pair<int, bool>> stack{{root(), false}};
  while (!stack.empty()) {
    auto [node, done] = stack.back();
    stack.pop_back();
    const std::size_t s = static_cast<std::size_t>(node);
    if (is_leaf(node)) {
      leaf_begin_[s] = static_cast<int>(leaf_order_.size());
      leaf_order_.push_back(node);
      leaf_end_[s] = leaf_begin_[s] + 1;
      continue;
    }
    if (done) {
      leaf_end_[s] = static_cast<int>(leaf_order_.size());
      continue;
    }
    leaf_begin_[s] = static_cast<int>(leaf_order_.size());
    stack.emplace_back(node, true);
    const auto& ch = children_[s];
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, false);
  }
}

std::span<const int> Dendrogram::leaves(int n) const {
  const std::size_t s = static_cast<std::size_t>(n);
  return std::span<const int>(leaf_order_).subspan(static_cast<std::size_t>(leaf_begin_[s]),
                                                   static_cast<std::size_t>(leaf_end_[s] - leaf_begin_[s]));
}

bool Dendrogram::is_ancestor(int ancestor, int n) const {
  const std::size_t a = static_cast<std::size_t>(ancestor);
  const std::size_t b = static_cast<std::size_t>(n);
  return ancestor != n && leaf_begin_[a] <= leaf_begin_[b] && leaf_end_[b] <= leaf_end_[a];
}

int Dendrogram::lowest_common_ancestor(int a, int b) const {
  while (a != b) {
    if (depth(a) >= depth(b)) {
      a = parent(a);
    } else {
      b = parent(b);
    }
  }
  return a;
}

std::vector<int> Dendrogram::owners_at_step(int step) const {
  std::vector<int> owner(static_cast<std::size_t>(leaf_count_));
  for (int l = 0; l < leaf_count_; ++l) {
    int n = l;
    while (parent(n) != -1 && death_step(n) <= step) n = parent(n);
    owner[static_cast<std::size_t>(l)] = n;
  }
  return owner;
}

std::vector<int> Dendrogram::owners_at_level(double t) const {
  std::vector<int> owner(static_cast<std::size_t>(leaf_count_));
  for (int l = 0; l < leaf_count_; ++l) {
    int n = l;
    while (parent(n) != -1 && height(n) <= t) n = parent(n);
    owner[static_cast<std::size_t>(l)] = n;
  }
  return owner;
}

LabelMap finest_partition(const ContourMap& cm) {
  const Dims dims = cm.pixels();
  const std::size_t n = dims.size();
  std::vector<double> energy(n, 0.0);
  for_each_edge(dims, [&](const GridEdge& e) {
    const double s = cm.data()[e.grid];
    energy[e.p] = std::max(energy[e.p], s);
    energy[e.q] = std::max(energy[e.q], s);
  });

  auto neighbours = [&](std::size_t p, auto&& f) {
    const int y = static_cast<int>(p / static_cast<std::size_t>(dims.width));
    const int x = static_cast<int>(p % static_cast<std::size_t>(dims.width));
    if (y > 0) f(p - static_cast<std::size_t>(dims.width));
    if (x > 0) f(p - 1);
    if (x + 1 < dims.width) f(p + 1);
    if (y + 1 < dims.height) f(p + static_cast<std::size_t>(dims.width));
  };

  // Regional minima: equal-energy plateaus with no strictly lower neighbour.
  constexpr std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> plateau(n, unset);
  std::vector<std::uint32_t> label(n, unset);
  std::vector<std::size_t> members;
  std::vector<std::size_t> stack;
  std::uint32_t next_plateau = 0;
  std::uint32_t next_label = 0;
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (plateau[seed] != unset) continue;
    members.clear();
    bool minimum = true;
    plateau[seed] = next_plateau;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      members.push_back(p);
      neighbours(p, [&](std::size_t q) {
        if (energy[q] < energy[p]) minimum = false;
        if (energy[q] == energy[p] && plateau[q] == unset) {
          plateau[q] = next_plateau;
          stack.push_back(q);
        }
      });
    }
    ++next_plateau;
    if (!minimum) continue;
    for (std::size_t p : members) {
      label[p] = next_label;
      queue.emplace(energy[p], p);
    }
    ++next_label;
  }

  while (!queue.empty()) {
    const std::size_t p = queue.top().second;
    queue.pop();
    neighbours(p, [&](std::size_t q) {
      if (label[q] == unset) {
        label[q] = label[p];
        queue.emplace(energy[q], q);
      }
    });
  }
  return canonicalize(LabelMap{dims, std::move(label)});
}

Ucm build_ucm(const LabelMap& finest, const ContourMap& cm) {
  if (!(finest.dims == cm.pixels())) throw ParameterError("build_ucm: label map and contour map dimensions differ");
  Ucm u{canonicalize(finest), {}};
  const int k = u.leaf_count();
  if (k <= 1) return u;

  struct Stats {
    long count = 0;
    double sum = 0.0;
  };
  const std::size_t capacity = static_cast<std::size_t>(2 * k - 1);
  std::vector<std::map<int, Stats>> adj(capacity);
  for_each_edge(finest.dims, [&](const GridEdge& e) {
    const int a = static_cast<int>(u.finest.labels[e.p]);
    const int b = static_cast<int>(u.finest.labels[e.q]);
    if (a == b) return;
    const double s = cm.data()[e.grid];
    Stats& ab = adj[static_cast<std::size_t>(a)][b];
    ab.count += 1;
    ab.sum += s;
    Stats& ba = adj[static_cast<std::size_t>(b)][a];
    ba.count += 1;
    ba.sum += s;
  });

  using Candidate = std::tuple<double, int, int>;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue;
  for (int a = 0; a < k; ++a) {
    for (const auto& [b, st] : adj[static_cast<std::size_t>(a)]) {
      if (a < b) queue.emplace(st.sum / static_cast<double>(st.count), a, b);
    }
  }

  std::vector<bool> alive(capacity, false);
  std::fill(alive.begin(), alive.begin() + k, true);
  int alive_count = k;
  double prev = 0.0;
  int next_id = k;
  while (!queue.empty()) {
    const auto [mean, a, b] = queue.top();
    queue.pop();
    if (!alive[static_cast<std::size_t>(a)] || !alive[static_cast<std::size_t>(b)]) continue;
    const int id = next_id++;
    const double lambda = u.merges.empty() ? mean : std::max(mean, prev);
    prev = lambda;
    u.merges.push_back(Merge{id, {a, b}, lambda});
    alive[static_cast<std::size_t>(a)] = false;
    alive[static_cast<std::size_t>(b)] = false;
    alive[static_cast<std::size_t>(id)] = true;
    --alive_count;

    auto& merged = adj[static_cast<std::size_t>(id)];
    for (int child : {a, b}) {
      for (const auto& [c, st] : adj[static_cast<std::size_t>(child)]) {
        if (c == a || c == b) continue;
        Stats& s = merged[c];
        s.count += st.count;
        s.sum += st.sum;
      }
      adj[static_cast<std::size_t>(child)].clear();
    }
    for (const auto& [c, st] : merged) {
      auto& other = adj[static_cast<std::size_t>(c)];
      other.erase(a);
      other.erase(b);
      other[id] = st;
      queue.emplace(st.sum / static_cast<double>(st.count), std::min(c, id), std::max(c, id));
    }
  }

  if (alive_count > 1) {
    // Non-adjacent leftovers (disconnected label maps) join under one root.
    Merge last{next_id, {}, prev};
    for (int id = 0; id < next_id; ++id) {
      if (alive[static_cast<std::size_t>(id)]) last.children.push_back(id);
    }
    u.merges.push_back(std::move(last));
  }
  return u;
}

Partition sample_hierarchy(const Ucm& u, double t) {
  const Dendrogram tree(u);
  return Partition{labels_from_owners(u.finest, tree.owners_at_level(t)), t};
}

Partition sample_hierarchy_below(const Ucm& u, double t) {
  const Dendrogram tree(u);
  std::vector<int> owner(static_cast<std::size_t>(tree.leaf_count()));
  for (int l = 0; l < tree.leaf_count(); ++l) {
    int n = l;
    while (tree.parent(n) != -1 && tree.height(n) < t) n = tree.parent(n);
    owner[static_cast<std::size_t>(l)] = n;
  }
  return Partition{labels_from_owners(u.finest, owner), t};
}

std::vector<double> merge_levels(const Ucm& u) {
  std::vector<double> levels;
  for (const Merge& m : u.merges) {
    if (levels.empty() || levels.back() != m.lambda) levels.push_back(m.lambda);
  }
  return levels;
}

EdgeSet extract_boundary(const LabelMap& labels) {
  EdgeSet edges;
  for_each_edge(labels.dims, [&](const GridEdge& e) {
    if (labels.labels[e.p] != labels.labels[e.q]) edges.push_back(e.grid);
  });
  std::sort(edges.begin(), edges.end());
  return edges;
}

ContourMap ucm_strength_grid(const Ucm& u) {
  const Dendrogram tree(u);
  ContourMap grid(u.finest.dims);
  std::unordered_map<std::uint64_t, double> cache;
  for_each_edge(u.finest.dims, [&](const GridEdge& e) {
    const std::uint32_t a = u.finest.labels[e.p];
    const std::uint32_t b = u.finest.labels[e.q];
    if (a == b) return;
    auto [it, inserted] = cache.try_emplace(pair_key(a, b), 0.0);
    if (inserted) it->second = tree.birth(tree.lowest_common_ancestor(static_cast<int>(a), static_cast<int>(b)));
    grid.data()[e.grid] = it->second;
  });
  return grid;
}

Ucm ucm_from_strength_grid(const LabelMap& finest, const ContourMap& strength) {
  if (!(finest.dims == strength.pixels())) {
    throw ParameterError("ucm_from_strength_grid: label map and strength grid dimensions differ");
  }
  Ucm u{canonicalize(finest), {}};
  const int k = u.leaf_count();
  std::map<std::pair<int, int>, double> boundary;
  for_each_edge(finest.dims, [&](const GridEdge& e) {
    int a = static_cast<int>(u.finest.labels[e.p]);
    int b = static_cast<int>(u.finest.labels[e.q]);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    auto [it, inserted] = boundary.try_emplace({a, b}, strength.data()[e.grid]);
    if (!inserted) it->second = std::max(it->second, strength.data()[e.grid]);
  });
  std::vector<std::tuple<double, int, int>> order;
  order.reserve(boundary.size());
  for (const auto& [ab, s] : boundary) order.emplace_back(s, ab.first, ab.second);
  std::sort(order.begin(), order.end());

  UnionFind sets(static_cast<std::size_t>(k));
  std::vector<int> node_of(static_cast<std::size_t>(k));
  std::iota(node_of.begin(), node_of.end(), 0);
  int next_id = k;
  double prev = 0.0;
  for (const auto& [s, a, b] : order) {
    const int ra = sets.find(a);
    const int rb = sets.find(b);
    if (ra == rb) continue;
    const int na = node_of[static_cast<std::size_t>(ra)];
    const int nb = node_of[static_cast<std::size_t>(rb)];
    u.merges.push_back(Merge{next_id, {std::min(na, nb), std::max(na, nb)}, s});
    prev = s;
    sets.parent[static_cast<std::size_t>(rb)] = ra;
    node_of[static_cast<std::size_t>(ra)] = next_id++;
  }
  std::vector<int> roots;
  for (int l = 0; l < k; ++l) {
    if (sets.find(l) == l) roots.push_back(node_of[static_cast<std::size_t>(l)]);
  }
  if (roots.size() > 1) {
    std::sort(roots.begin(), roots.end());
    u.merges.push_back(Merge{next_id, roots, prev});
  }
  return u;
}

LabelMap regions_from_strength(const ContourMap& strength, double t) {
  const Dims dims = strength.pixels();
  UnionFind sets(dims.size());
  for_each_edge(dims, [&](const GridEdge& e) {
    if (strength.data()[e.grid] <= t) {
      const int a = sets.find(static_cast<int>(e.p));
      const int b = sets.find(static_cast<int>(e.q));
      if (a != b) sets.parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  });
  LabelMap out{dims, std::vector<std::uint32_t>(dims.size())};
  for (std::size_t i = 0; i < dims.size(); ++i) out.labels[i] = static_cast<std::uint32_t>(sets.find(static_cast<int>(i)));
  return canonicalize(out);
}

}  // namespace mcg
