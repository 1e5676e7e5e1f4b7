#include "mcg/align.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mcg/error.hpp"

namespace mcg {
namespace {

int nearest_source(int target, int target_size, int source_size) {
  const double ratio = static_cast<double>(source_size) / target_size;
  const long v = std::lround(target * ratio - 0.5 + 0.5 * ratio);
  return static_cast<int>(std::clamp<long>(v, 0, source_size - 1));
}

}  // namespace

LabelMap project(const LabelMap& r, const LabelMap& s) {
  if (!(r.dims == s.dims)) throw ParameterError("project: dimension mismatch");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(s.labels.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = {s.labels[i], r.labels[i]};
  std::sort(pairs.begin(), pairs.end());

  std::vector<std::uint32_t> mode(label_count(s));
  for (std::size_t i = 0; i < pairs.size();) {
    const std::uint32_t region = pairs[i].first;
    std::uint32_t best = pairs[i].second;
    std::size_t best_count = 0;
    while (i < pairs.size() && pairs[i].first == region) {
      std::size_t j = i;
      while (j < pairs.size() && pairs[j] == pairs[i]) ++j;
      // Runs arrive in ascending r-label order, so strict > keeps the smaller label on ties.
      if (j - i > best_count) {
        best_count = j - i;
        best = pairs[i].second;
      }
      i = j;
    }
    mode[region] = best;
  }
  LabelMap out{s.dims, std::vector<std::uint32_t>(s.labels.size())};
  for (std::size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = mode[s.labels[i]];
  return canonicalize(out);
}

LabelMap rescale_segmentation(const LabelMap& s, Dims target) {
  if (target.height < 1 || target.width < 1) throw ParameterError("rescale_segmentation: empty target");
  LabelMap out{target, std::vector<std::uint32_t>(target.size())};
  std::vector<int> cols(static_cast<std::size_t>(target.width));
  for (int x = 0; x < target.width; ++x) cols[static_cast<std::size_t>(x)] = nearest_source(x, target.width, s.dims.width);
  for (int y = 0; y < target.height; ++y) {
    const int sy = nearest_source(y, target.height, s.dims.height);
    for (int x = 0; x < target.width; ++x) out.labels[target.index(y, x)] = s.at(sy, cols[static_cast<std::size_t>(x)]);
  }
  return canonicalize(out);
}

Ucm align_ucm(const Ucm& u, const LabelMap& target_superpixels) {
  const LabelMap target = canonicalize(target_superpixels);
  if (u.finest == target) return u;
  ContourMap aligned(target.dims);
  for (double t : merge_levels(u)) {
    const Partition level = sample_hierarchy_below(u, t);
    const LabelMap snapped = project(rescale_segmentation(level.labels, target.dims), target);
    for (std::size_t e : extract_boundary(snapped)) aligned.data()[e] = std::max(aligned.data()[e], t);
  }
  return ucm_from_strength_grid(target, aligned);
}

ContourMap combine_strengths(std::span<const Ucm> aligned, std::span<const double> weights,
                             const Calibration& calibration) {
  if (aligned.empty()) throw ParameterError("multiscale_combine: no hierarchies");
  if (aligned.size() != weights.size()) throw ParameterError("multiscale_combine: one weight per hierarchy required");
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("multiscale_combine: weights must sum to 1");
  const LabelMap& finest = aligned.front().finest;
  for (std::size_t i = 1; i < aligned.size(); ++i) {
    if (!(aligned[i].finest == finest)) {
      throw ParameterError("multiscale_combine: hierarchy " + std::to_string(i) + " has a different finest partition");
    }
  }
  ContourMap combined(finest.dims);
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    const ContourMap grid = ucm_strength_grid(aligned[i]);
    for (std::size_t e = 0; e < grid.data().size(); ++e) combined.data()[e] += weights[i] * grid.data()[e];
  }
  if (calibration.enabled) {
    for_each_edge(finest.dims, [&](const GridEdge& e) {
      if (finest.labels[e.p] == finest.labels[e.q]) return;
      double& v = combined.data()[e.grid];
      v = 1.0 / (1.0 + std::exp(-(calibration.a * v + calibration.b)));
    });
  }
  return combined;
}

Ucm multiscale_combine(std::span<const Ucm> aligned, std::span<const double> weights, const Calibration& calibration) {
  const ContourMap combined = combine_strengths(aligned, weights, calibration);
  if (aligned.size() == 1 && weights[0] == 1.0 && !calibration.enabled) return aligned.front();
  return build_ucm(aligned.front().finest, combined);
}

}  // namespace mcg
