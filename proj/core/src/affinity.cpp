#include "mcg/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "mcg/error.hpp"

namespace mcg {
namespace {

struct Offset {
  int dy;
  int dx;
};

// Offsets of the pixels on the near (dx <= 0) and far (dx >= 1) side of a
// vertical boundary that sits half a pixel right of the origin pixel.
void half_disk_offsets(int radius, std::vector<Offset>& near_side, std::vector<Offset>& far_side) {
  const double r2 = static_cast<double>(radius) * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius + 1; ++dx) {
      const double cx = dx - 0.5;
      if (dy * dy + cx * cx > r2) continue;
      (dx <= 0 ? near_side : far_side).push_back(Offset{dy, dx});
    }
  }
}

// Step crossing strength between adjacent or diagonal pixels a and b.
double step_strength(const ContourMap& cm, int ay, int ax, int by, int bx) {
  if (ay == by) return cm.right(ay, std::min(ax, bx));
  if (ax == bx) return cm.down(std::min(ay, by), ax);
  const int y0 = std::min(ay, by);
  const int x0 = std::min(ax, bx);
  const double top = cm.right(y0, x0);
  const double bottom = cm.right(y0 + 1, x0);
  const double left = cm.down(y0, x0);
  const double right = cm.down(y0, x0 + 1);
  // The two L routes around the corner pass one horizontal-neighbour edge
  // and one vertical-neighbour edge, on opposite sides.
  const bool main_diagonal = (ay < by) == (ax < bx);
  if (main_diagonal) {
    return std::min(std::max(top, right), std::max(left, bottom));
  }
  return std::min(std::max(top, left), std::max(right, bottom));
}

}  // namespace

ContourMap local_contour_cue(const Image& img, std::span<const int> half_disk_radii) {
  if (half_disk_radii.empty()) throw ParameterError("local_contour_cue: no radii given");
  const Dims dims = img.dims;
  const int limit = std::min(dims.height, dims.width);
  for (int r : half_disk_radii) {
    if (r < 1) throw ParameterError("local_contour_cue: radius must be >= 1");
    if (r > limit) {
      throw ParameterError("local_contour_cue: radius " + std::to_string(r) + " exceeds min(H,W) = " +
                           std::to_string(limit));
    }
  }
  ContourMap cm(dims);
  for (int r : half_disk_radii) {
    std::vector<Offset> near_side;
    std::vector<Offset> far_side;
    half_disk_offsets(r, near_side, far_side);
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        for (int vertical = 0; vertical < 2; ++vertical) {
          // vertical == 0: edge to the right neighbour; 1: edge to the pixel below.
          if (vertical == 0 && x + 1 >= dims.width) continue;
          if (vertical == 1 && y + 1 >= dims.height) continue;
          for (int c = 0; c < img.channels; ++c) {
            // Offsets from the edge's own pixel keep flat regions exactly 0.
            const double ref = img.at(y, x, c);
            double sum[2] = {0.0, 0.0};
            int count[2] = {0, 0};
            for (int side = 0; side < 2; ++side) {
              for (const Offset& o : side == 0 ? near_side : far_side) {
                const int py = vertical == 0 ? y + o.dy : y + o.dx;
                const int px = vertical == 0 ? x + o.dx : x + o.dy;
                if (py < 0 || px < 0 || py >= dims.height || px >= dims.width) continue;
                sum[side] += img.at(py, px, c) - ref;
                ++count[side];
              }
            }
            const double diff = std::min(1.0, std::abs(sum[0] / count[0] - sum[1] / count[1]));
            double& slot = vertical == 0 ? cm.right(y, x) : cm.down(y, x);
            slot = std::max(slot, diff);
          }
        }
      }
    }
  }
  return cm;
}

double intervening_contour(const ContourMap& cm, int py, int px, int qy, int qx) {
  const int dx = std::abs(qx - px);
  const int dy = -std::abs(qy - py);
  const int sx = px < qx ? 1 : -1;
  const int sy = py < qy ? 1 : -1;
  int err = dx + dy;
  int y = py;
  int x = px;
  double strongest = 0.0;
  while (y != qy || x != qx) {
    const int e2 = 2 * err;
    int ny = y;
    int nx = x;
    if (e2 >= dy) {
      err += dy;
      nx += sx;
    }
    if (e2 <= dx) {
      err += dx;
      ny += sy;
    }
    strongest = std::max(strongest, step_strength(cm, y, x, ny, nx));
    y = ny;
    x = nx;
  }
  return strongest;
}

SparseAffinity build_affinity(const ContourMap& cm, int radius, double sigma) {
  if (radius < 1) throw ParameterError("build_affinity: radius must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("build_affinity: sigma must be positive");
  const Dims dims = cm.pixels();
  const auto n = static_cast<Eigen::Index>(dims.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(dims.size() * static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const auto p = static_cast<Eigen::Index>(dims.index(y, x));
      triplets.emplace_back(p, p, 1.0);
      for (int qy = y; qy <= std::min(dims.height - 1, y + radius); ++qy) {
        const int x_begin = qy == y ? x + 1 : std::max(0, x - radius);
        for (int qx = x_begin; qx <= std::min(dims.width - 1, x + radius); ++qx) {
          const double w = std::exp(-intervening_contour(cm, y, x, qy, qx) / sigma);
          if (w <= 0.0) continue;
          const auto q = static_cast<Eigen::Index>(dims.index(qy, qx));
          triplets.emplace_back(p, q, w);
          triplets.emplace_back(q, p, w);
        }
      }
    }
  }
  SparseAffinity a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

}  // namespace mcg
