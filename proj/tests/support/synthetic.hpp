// Generated scenes of axis-aligned coloured rectangles on a contrasting
// background, with their instance annotations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mcg/types.hpp"

namespace synthetic {

struct Scene {
  mcg::Image image;
  mcg::InstanceGroundTruth gt;
};

struct Rect {
  int y0, x0, y1, x1;  // half-open
};

inline bool overlaps(const Rect& a, const Rect& b, int gap) {
  return a.y0 < b.y1 + gap && b.y0 < a.y1 + gap && a.x0 < b.x1 + gap && b.x0 < a.x1 + gap;
}

/// 2-3 non-overlapping rectangles, each at least `min_side` pixels a side,
/// whose colour differs from the background by >= 0.4 in some channel.
inline Scene rectangles(std::mt19937_64& rng, mcg::Dims d, int min_side = 12) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int count = 2 + static_cast<int>(rng() % 2);
  std::vector<Rect> rects;
  const int max_h = std::max(min_side, d.height / 3);
  const int max_w = std::max(min_side, d.width / 3);
  int attempts = 0;
  while (static_cast<int>(rects.size()) < count) {
    if (++attempts > 200) {  // crowded layout; start over
      rects.clear();
      attempts = 0;
    }
    const int h = min_side + static_cast<int>(rng() % static_cast<unsigned>(max_h - min_side + 1));
    const int w = min_side + static_cast<int>(rng() % static_cast<unsigned>(max_w - min_side + 1));
    const int y = 2 + static_cast<int>(rng() % static_cast<unsigned>(d.height - h - 3));
    const int x = 2 + static_cast<int>(rng() % static_cast<unsigned>(d.width - w - 3));
    const Rect r{y, x, y + h, x + w};
    bool clash = false;
    for (const Rect& o : rects) clash = clash || overlaps(r, o, 2);
    if (!clash) rects.push_back(r);
  }
  std::vector<double> bg{unit(rng), unit(rng), unit(rng)};
  Scene s{mcg::Image{d, 3, std::vector<double>(d.size() * 3)}, mcg::InstanceGroundTruth{d, std::vector<std::uint32_t>(d.size(), 0)}};
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      for (int c = 0; c < 3; ++c) s.image.at(y, x, c) = bg[static_cast<std::size_t>(c)];
    }
  }
  for (std::size_t i = 0; i < rects.size(); ++i) {
    std::vector<double> col(3);
    double contrast = 0.0;
    do {
      for (double& v : col) v = unit(rng);
      contrast = 0.0;
      for (int c = 0; c < 3; ++c) contrast = std::max(contrast, std::abs(col[static_cast<std::size_t>(c)] - bg[static_cast<std::size_t>(c)]));
    } while (contrast < 0.4);
    const Rect& r = rects[i];
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) {
        for (int c = 0; c < 3; ++c) s.image.at(y, x, c) = col[static_cast<std::size_t>(c)];
        s.gt.ids[d.index(y, x)] = static_cast<std::uint32_t>(i + 1);
      }
    }
  }
  return s;
}

}  // namespace synthetic
