#include "mcg/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "mcg/error.hpp"
#include "mcg/eval.hpp"

namespace mcg {

std::string_view feature_name(std::size_t f) {
  static constexpr std::array<std::string_view, kFeatureCount> names = {
      "area",           "perimeter",         "bbox_area",          "center_x",
      "center_y",       "aspect",            "area_balance",       "perimeter_per_sqrt_area",
      "strength_per_sqrt_area", "fill",      "strength_sum",       "strength_mean",
      "min_appearance", "max_appearance",    "min_disappearance",  "max_disappearance"};
  return names.at(f);
}

FeatureVector compute_features(const Proposal& p, const RegionTree& rt) {
  const Dendrogram& tree = rt.tree();
  if (p.nodes.empty()) throw ParameterError("proposal has no nodes");
  for (int n : p.nodes) {
    if (n < 0 || n >= tree.node_count()) throw ParameterError("proposal references a node outside the hierarchy");
  }
  double area = 0.0;
  double perimeter = 0.0;
  double strength = 0.0;
  double min_area = kRootHeight;
  double max_area = 0.0;
  double min_app = kRootHeight, max_app = -kRootHeight;
  double min_dis = kRootHeight, max_dis = -kRootHeight;
  BBox box;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const int n = p.nodes[i];
    const double a = static_cast<double>(rt.area(n));
    area += a;
    min_area = std::min(min_area, a);
    max_area = std::max(max_area, a);
    perimeter += static_cast<double>(rt.perimeter(n));
    strength += rt.boundary_strength(n);
    box.extend(rt.bbox(n));
    const double app = tree.birth(n);
    const double dis = n == tree.root() ? tree.max_lambda() : tree.height(n);
    min_app = std::min(min_app, app);
    max_app = std::max(max_app, app);
    min_dis = std::min(min_dis, dis);
    max_dis = std::max(max_dis, dis);
    for (std::size_t j = i + 1; j < p.nodes.size(); ++j) {
      const EdgeStats s = rt.shared(n, p.nodes[j]);
      perimeter -= 2.0 * static_cast<double>(s.count);
      strength -= 2.0 * s.strength;
    }
  }
  const Dims d = rt.dims();
  const double bw = box.col_max - box.col_min + 1;
  const double bh = box.row_max - box.row_min + 1;
  const double root_area = std::sqrt(area);

  FeatureVector f{};
  f[kArea] = area;
  f[kPerimeter] = perimeter;
  f[kBBoxArea] = static_cast<double>(box.area());
  f[kCenterX] = (box.col_min + box.col_max + 1) / (2.0 * d.width);
  f[kCenterY] = (box.row_min + box.row_max + 1) / (2.0 * d.height);
  f[kAspect] = bw / bh;
  f[kAreaBalance] = min_area / max_area;
  f[kPerimeterPerSqrtArea] = perimeter / root_area;
  f[kStrengthPerSqrtArea] = strength / root_area;
  f[kFill] = area / f[kBBoxArea];
  f[kStrengthSum] = strength;
  f[kStrengthMean] = perimeter > 0 ? strength / perimeter : 0.0;
  f[kMinAppearance] = min_app;
  f[kMaxAppearance] = max_app;
  f[kMinDisappearance] = min_dis;
  f[kMaxDisappearance] = max_dis;
  return f;
}

OverlapRegressor::OverlapRegressor(ForestConfig config, std::vector<Tree> trees)
    : config_(config), trees_(std::move(trees)) {}

double OverlapRegressor::predict(const FeatureVector& x) const {
  if (trees_.empty()) return 0.0;
  double sum = 0.0;
  for (const Tree& t : trees_) {
    int i = 0;
    while (t[static_cast<std::size_t>(i)].feature >= 0) {
      const Node& n = t[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    sum += t[static_cast<std::size_t>(i)].value;
  }
  return std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
}

nlohmann::json OverlapRegressor::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : t) {
      if (n.feature < 0) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"forest",
           {{"trees", config_.trees},
            {"max_depth", config_.max_depth},
            {"min_leaf", config_.min_leaf},
            {"features_per_split", config_.features_per_split},
            {"seed", config_.seed}}},
          {"trees", std::move(trees)}};
}

OverlapRegressor OverlapRegressor::from_json(const nlohmann::json& j) {
  try {
    ForestConfig c;
    const auto& f = j.at("forest");
    c.trees = f.at("trees").get<int>();
    c.max_depth = f.at("max_depth").get<int>();
    c.min_leaf = f.at("min_leaf").get<int>();
    c.features_per_split = f.at("features_per_split").get<int>();
    c.seed = f.at("seed").get<std::uint64_t>();
    std::vector<Tree> trees;
    for (const auto& jt : j.at("trees")) {
      Tree t;
      for (const auto& jn : jt) {
        Node n;
        if (jn.contains("value")) {
          n.value = jn.at("value").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        t.push_back(n);
      }
      // Reject dumps whose child links could loop or escape the node array.
      for (std::size_t i = 0; i < t.size(); ++i) {
        const Node& n = t[i];
        if (n.feature < 0) continue;
        if (n.feature >= static_cast<int>(kFeatureCount) || n.left <= static_cast<int>(i) ||
            n.right <= static_cast<int>(i) || n.left >= static_cast<int>(t.size()) ||
            n.right >= static_cast<int>(t.size())) {
          throw FormatError("regressor: malformed tree node");
        }
      }
      if (t.empty()) throw FormatError("regressor: empty tree");
      trees.push_back(std::move(t));
    }
    return OverlapRegressor(c, std::move(trees));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("regressor: ") + e.what());
  }
}

namespace {

struct TreeBuilder {
  std::span<const FeatureVector> x;
  std::span<const double> y;
  const ForestConfig& config;
  int mtry;
  std::mt19937_64 rng;
  OverlapRegressor::Tree nodes;

  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) mean += y[idx[i]];
    mean /= static_cast<double>(hi - lo);
    nodes[static_cast<std::size_t>(id)].value = mean;

    const std::size_t count = hi - lo;
    const auto min_leaf = static_cast<std::size_t>(std::max(1, config.min_leaf));
    if (depth >= config.max_depth || count < 2 * min_leaf) return id;
    double sse = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sse += (y[idx[i]] - mean) * (y[idx[i]] - mean);
    if (sse <= 0.0) return id;

    std::array<std::size_t, kFeatureCount> features{};
    std::iota(features.begin(), features.end(), std::size_t{0});
    std::shuffle(features.begin(), features.end(), rng);

    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted(idx.begin() + static_cast<long>(lo), idx.begin() + static_cast<long>(hi));
    for (int fi = 0; fi < mtry; ++fi) {
      const std::size_t f = features[static_cast<std::size_t>(fi)];
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        if (x[a][f] != x[b][f]) return x[a][f] < x[b][f];
        return a < b;
      });
      double left_sum = 0.0, left_sq = 0.0, total_sum = 0.0, total_sq = 0.0;
      for (std::size_t s : sorted) {
        total_sum += y[s];
        total_sq += y[s] * y[s];
      }
      for (std::size_t k = 0; k + 1 < count; ++k) {
        left_sum += y[sorted[k]];
        left_sq += y[sorted[k]] * y[sorted[k]];
        const double xv = x[sorted[k]][f];
        const double xn = x[sorted[k + 1]][f];
        if (xv == xn) continue;
        const auto nl = static_cast<double>(k + 1);
        const auto nr = static_cast<double>(count - k - 1);
        if (k + 1 < min_leaf || count - k - 1 < min_leaf) continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double child_sse =
            (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        const double gain = sse - child_sse;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (xv + xn);
        }
      }
    }
    if (best_feature < 0) return id;

    const auto mid = std::partition(idx.begin() + static_cast<long>(lo), idx.begin() + static_cast<long>(hi),
                                    [&](std::size_t s) { return x[s][static_cast<std::size_t>(best_feature)] <= best_threshold; });
    const auto split = static_cast<std::size_t>(mid - idx.begin());
    const int left = build(idx, lo, split, depth + 1);
    const int right = build(idx, split, hi, depth + 1);
    auto& node = nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return id;
  }
};

std::uint64_t tree_seed(std::uint64_t seed, int t) {
  // splitmix64 step keeps per-tree streams independent of tree count.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(t + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

OverlapRegressor train_regressor(std::span<const FeatureVector> x, std::span<const double> y,
                                 const ForestConfig& config) {
  if (x.size() != y.size()) throw ParameterError("train_regressor: features and targets differ in length");
  if (x.empty()) throw ParameterError("train_regressor: no training rows");
  if (config.trees < 1 || config.max_depth < 0) throw ParameterError("train_regressor: bad forest size");
  for (const auto& row : x) {
    for (double v : row) {
      if (!std::isfinite(v)) throw ParameterError("train_regressor: non-finite feature");
    }
  }
  int mtry = config.features_per_split;
  if (mtry <= 0) mtry = static_cast<int>(std::floor(std::sqrt(static_cast<double>(kFeatureCount))));
  mtry = std::min(mtry, static_cast<int>(kFeatureCount));

  std::vector<OverlapRegressor::Tree> trees;
  for (int t = 0; t < config.trees; ++t) {
    TreeBuilder b{x, y, config, mtry, std::mt19937_64(tree_seed(config.seed, t)), {}};
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<std::size_t> idx(x.size());
    for (auto& i : idx) i = pick(b.rng);
    b.build(idx, 0, idx.size(), 0);
    trees.push_back(std::move(b.nodes));
  }
  return OverlapRegressor(config, std::move(trees));
}

double mean_absolute_error(const OverlapRegressor& reg, std::span<const FeatureVector> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw ParameterError("mean_absolute_error: bad rows");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(reg.predict(x[i]) - y[i]);
  return sum / static_cast<double>(x.size());
}

std::vector<std::size_t> mmr_order(std::span<const double> scores, std::span<const BinaryMask> masks,
                                   double mmr_lambda) {
  if (!(mmr_lambda >= 0.0 && mmr_lambda <= 1.0)) throw ParameterError("mmr_lambda must lie in [0,1]");
  if (mmr_lambda > 0.0 && scores.size() != masks.size()) throw ParameterError("mmr_order: one mask per score");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order;
  order.reserve(n);
  if (mmr_lambda == 0.0) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
  }
  std::vector<double> redundancy(n, 0.0);
  std::vector<char> taken(n, 0);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    double best_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double v = (1.0 - mmr_lambda) * scores[i] - mmr_lambda * redundancy[i];
      if (best == n || v > best_value) {
        best = i;
        best_value = v;
      }
    }
    taken[best] = 1;
    order.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) redundancy[i] = std::max(redundancy[i], jaccard(masks[i], masks[best]));
    }
  }
  return order;
}

}  // namespace mcg
