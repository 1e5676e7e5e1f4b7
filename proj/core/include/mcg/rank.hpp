#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mcg/grouping.hpp"
#include "mcg/region_tree.hpp"

namespace mcg {

inline constexpr std::size_t kFeatureCount = 16;
using FeatureVector = std::array<double, kFeatureCount>;

enum Feature : std::size_t {
  kArea,
  kPerimeter,
  kBBoxArea,
  kCenterX,
  kCenterY,
  kAspect,
  kAreaBalance,
  kPerimeterPerSqrtArea,
  kStrengthPerSqrtArea,
  kFill,
  kStrengthSum,
  kStrengthMean,
  kMinAppearance,
  kMaxAppearance,
  kMinDisappearance,
  kMaxDisappearance,
};

std::string_view feature_name(std::size_t f);

/// Features of p from tree descriptors only; the root disappears at the
/// hierarchy's largest merge strength.
FeatureVector compute_features(const Proposal& p, const RegionTree& tree);

struct ForestConfig {
  int trees = 50;
  int max_depth = 12;
  int min_leaf = 1;
  int features_per_split = 0;  ///< 0 selects floor(sqrt(kFeatureCount))
  std::uint64_t seed = 0;
};

class OverlapRegressor {
 public:
  struct Node {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  OverlapRegressor() = default;
  OverlapRegressor(ForestConfig config, std::vector<Tree> trees);

  /// Mean of the trees' leaves, clipped to [0,1].
  double predict(const FeatureVector& x) const;
  const ForestConfig& config() const { return config_; }
  const std::vector<Tree>& trees() const { return trees_; }

  nlohmann::json to_json() const;
  static OverlapRegressor from_json(const nlohmann::json& j);

 private:
  ForestConfig config_;
  std::vector<Tree> trees_;
};

/// Bootstrap forest of variance-reduction regression trees.
OverlapRegressor train_regressor(std::span<const FeatureVector> x, std::span<const double> y,
                                 const ForestConfig& config);

double mean_absolute_error(const OverlapRegressor& reg, std::span<const FeatureVector> x, std::span<const double> y);

/// Maximum marginal relevance order: repeatedly take the remaining item
/// maximising (1-lambda)*score - lambda*max Jaccard with the items taken so
/// far; ties go to the earlier item. Returns a permutation of indices.
std::vector<std::size_t> mmr_order(std::span<const double> scores, std::span<const BinaryMask> masks,
                                   double mmr_lambda);

}  // namespace mcg
