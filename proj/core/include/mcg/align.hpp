#pragma once

#include <span>

#include "mcg/hierarchy.hpp"

namespace mcg {

/// Optional sigmoid calibration of combined boundary strengths.
struct Calibration {
  bool enabled = false;
  double a = 1.0;
  double b = 0.0;
};

/// Snaps r onto s: every region of s takes the majority label of r over
/// its pixels (ties to the smaller r label). Output is canonical.
LabelMap project(const LabelMap& r, const LabelMap& s);

/// Pixel-centre nearest-neighbour resampling to `target`, canonicalized.
LabelMap rescale_segmentation(const LabelMap& s, Dims target);

/// Re-expresses u over `target_superpixels`: every strength level is
/// sampled, rescaled, projected and its boundary stamped with the level.
/// Regions of the result never split a target superpixel.
Ucm align_ucm(const Ucm& u, const LabelMap& target_superpixels);

/// Per-edge sum_i weights[i] * strength_i over the shared finest
/// partition, optionally passed through sigmoid(a x + b). Edges inside a
/// superpixel stay 0.
ContourMap combine_strengths(std::span<const Ucm> aligned, std::span<const double> weights,
                             const Calibration& calibration = {});

/// Combines aligned hierarchies and rebuilds the merge tree greedily on the
/// combined strengths. One input with weight 1 is returned unchanged.
Ucm multiscale_combine(std::span<const Ucm> aligned, std::span<const double> weights,
                       const Calibration& calibration = {});

}  // namespace mcg
