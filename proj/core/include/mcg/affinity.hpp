#pragma once

#include <span>

#include <Eigen/SparseCore>

#include "mcg/types.hpp"

namespace mcg {

/// Symmetric non-negative pixel affinity over a row-major image grid.
using SparseAffinity = Eigen::SparseMatrix<double>;

/// Oriented half-disk mean-difference cue. For every inter-pixel edge the
/// strength is the largest |mean(side A) - mean(side B)| over all radii
/// and channels, where each side is the half-disk of pixels whose centres
/// lie within `radius` of the edge midpoint. Disks shrink at the border.
ContourMap local_contour_cue(const Image& img, std::span<const int> half_disk_radii);

/// Intervening-contour affinity: for pixel pairs within Chebyshev distance
/// `radius`, weight = exp(-max contour crossed by the Bresenham line / sigma).
/// The diagonal carries weight 1.
SparseAffinity build_affinity(const ContourMap& cm, int radius, double sigma);

/// Strongest contour crossed walking the Bresenham line from pixel p to q
/// (p < q in row-major order). A diagonal step through a lattice corner
/// takes the cheaper of its two L-shaped routes.
double intervening_contour(const ContourMap& cm, int py, int px, int qy, int qx);

}  // namespace mcg
