#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcg/types.hpp"

namespace mcg {

/// |a ∩ b| / |a ∪ b|; two empty masks score 0.
double jaccard(const BinaryMask& a, const BinaryMask& b);

/// For each instance k = 1..K, the best Jaccard any pool mask reaches.
std::vector<double> best_overlap_per_instance(std::span<const BinaryMask> pool, const InstanceGroundTruth& gt);

/// Jaccard of every proposal (rows) against every instance (columns).
std::vector<std::vector<double>> overlap_matrix(std::span<const BinaryMask> pool, const InstanceGroundTruth& gt);

/// One image of an evaluation corpus.
struct PoolView {
  std::span<const BinaryMask> pool;
  const InstanceGroundTruth* gt = nullptr;
};

/// Mean best overlap over all instances of all images (J_i).
double instance_level_jaccard(std::span<const PoolView> corpus);
/// Fraction of instances whose best overlap is >= threshold.
double recall_at(std::span<const PoolView> corpus, double threshold);

/// Same measures from precomputed per-image best overlaps.
double mean_best_overlap(const std::vector<std::vector<double>>& best);
double recall_from_best(const std::vector<std::vector<double>>& best, double threshold);

struct QualityCurve {
  std::vector<std::size_t> counts;
  std::vector<double> j_i;
  std::vector<double> recall_050;
  std::vector<double> recall_070;
  std::vector<double> recall_085;
};

/// Metrics of every ranked pool's prefix of each length in `counts`.
QualityCurve quality_vs_count_curve(std::span<const PoolView> corpus, std::span<const std::size_t> counts);

/// Header "n_proposals,j_i,recall_050,recall_070,recall_085", one row per count.
std::string curve_to_csv(const QualityCurve& curve);

/// `count` levels from 0 to `max` inclusive, geometric in between.
std::vector<std::size_t> geometric_levels(std::size_t max, std::size_t count);

}  // namespace mcg
