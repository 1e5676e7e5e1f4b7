#include "mcg/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "mcg/error.hpp"

namespace mcg {

double jaccard(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.dims() == b.dims())) throw ParameterError("jaccard: mask dimensions differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    inter += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
    uni += static_cast<std::size_t>(std::popcount(wa[i] | wb[i]));
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::vector<double>> overlap_matrix(std::span<const BinaryMask> pool, const InstanceGroundTruth& gt) {
  const std::uint32_t k = gt.instance_count();
  std::vector<BinaryMask> instances;
  instances.reserve(k);
  for (std::uint32_t i = 1; i <= k; ++i) instances.push_back(gt.instance_mask(i));
  std::vector<std::vector<double>> out(pool.size(), std::vector<double>(k, 0.0));
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (!(pool[p].dims() == gt.dims)) throw ParameterError("proposal and ground truth dimensions differ");
    for (std::uint32_t i = 0; i < k; ++i) out[p][i] = jaccard(pool[p], instances[i]);
  }
  return out;
}

std::vector<double> best_overlap_per_instance(std::span<const BinaryMask> pool, const InstanceGroundTruth& gt) {
  std::vector<double> best(gt.instance_count(), 0.0);
  for (const auto& row : overlap_matrix(pool, gt)) {
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], row[i]);
  }
  return best;
}

double mean_best_overlap(const std::vector<std::vector<double>>& best) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& image : best) {
    for (double v : image) sum += v;
    n += image.size();
  }
  if (n == 0) throw ParameterError("corpus has no ground-truth instances");
  return sum / static_cast<double>(n);
}

double recall_from_best(const std::vector<std::vector<double>>& best, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ParameterError("recall threshold must lie in (0,1]");
  std::size_t hit = 0;
  std::size_t n = 0;
  for (const auto& image : best) {
    for (double v : image) hit += v >= threshold ? 1 : 0;
    n += image.size();
  }
  return n == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(n);
}

namespace {

std::vector<std::vector<double>> corpus_best(std::span<const PoolView> corpus) {
  std::vector<std::vector<double>> best;
  best.reserve(corpus.size());
  for (const PoolView& image : corpus) best.push_back(best_overlap_per_instance(image.pool, *image.gt));
  return best;
}

}  // namespace

double instance_level_jaccard(std::span<const PoolView> corpus) { return mean_best_overlap(corpus_best(corpus)); }

double recall_at(std::span<const PoolView> corpus, double threshold) {
  return recall_from_best(corpus_best(corpus), threshold);
}

QualityCurve quality_vs_count_curve(std::span<const PoolView> corpus, std::span<const std::size_t> counts) {
  QualityCurve curve;
  std::vector<std::vector<std::vector<double>>> overlaps;
  overlaps.reserve(corpus.size());
  for (const PoolView& image : corpus) overlaps.push_back(overlap_matrix(image.pool, *image.gt));
  for (std::size_t c : counts) {
    std::vector<std::vector<double>> best;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      std::vector<double> b(corpus[i].gt->instance_count(), 0.0);
      const std::size_t limit = std::min(c, overlaps[i].size());
      for (std::size_t p = 0; p < limit; ++p) {
        for (std::size_t k = 0; k < b.size(); ++k) b[k] = std::max(b[k], overlaps[i][p][k]);
      }
      best.push_back(std::move(b));
    }
    curve.counts.push_back(c);
    curve.j_i.push_back(mean_best_overlap(best));
    curve.recall_050.push_back(recall_from_best(best, 0.5));
    curve.recall_070.push_back(recall_from_best(best, 0.7));
    curve.recall_085.push_back(recall_from_best(best, 0.85));
  }
  return curve;
}

std::string curve_to_csv(const QualityCurve& curve) {
  std::string out = "n_proposals,j_i,recall_050,recall_070,recall_085\n";
  char line[160];
  for (std::size_t i = 0; i < curve.counts.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.6f,%.6f,%.6f\n", curve.counts[i], curve.j_i[i], curve.recall_050[i],
                  curve.recall_070[i], curve.recall_085[i]);
    out += line;
  }
  return out;
}

std::vector<std::size_t> geometric_levels(std::size_t max, std::size_t count) {
  if (count < 2) throw ParameterError("geometric_levels: need at least two levels");
  std::vector<std::size_t> levels(count, 0);
  levels.back() = max;
  if (max == 0) return levels;
  // Levels 1..count-1 run geometrically from 1 to max.
  for (std::size_t j = 1; j + 1 < count; ++j) {
    const double f = count > 2 ? static_cast<double>(j - 1) / static_cast<double>(count - 2) : 1.0;
    levels[j] = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(max), f)));
  }
  return levels;
}

}  // namespace mcg
