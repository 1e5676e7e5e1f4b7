#include "mcg/types.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace mcg {

LabelMap canonicalize(const LabelMap& map) {
  LabelMap out{map.dims, std::vector<std::uint32_t>(map.labels.size())};
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(map.labels[i], static_cast<std::uint32_t>(remap.size()));
    out.labels[i] = it->second;
  }
  return out;
}

std::size_t label_count(const LabelMap& map) {
  if (map.labels.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(map.labels.begin(), map.labels.end())) + 1;
}

LabelMap split_components(const LabelMap& map) {
  constexpr std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
  LabelMap out{map.dims, std::vector<std::uint32_t>(map.labels.size(), unset)};
  std::vector<std::size_t> stack;
  std::uint32_t next = 0;
  const int h = map.dims.height;
  const int w = map.dims.width;
  for (std::size_t seed = 0; seed < map.labels.size(); ++seed) {
    if (out.labels[seed] != unset) continue;
    const std::uint32_t label = map.labels[seed];
    out.labels[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int y = static_cast<int>(p / static_cast<std::size_t>(w));
      const int x = static_cast<int>(p % static_cast<std::size_t>(w));
      auto visit = [&](int ny, int nx) {
        if (ny < 0 || nx < 0 || ny >= h || nx >= w) return;
        const std::size_t q = map.dims.index(ny, nx);
        if (out.labels[q] == unset && map.labels[q] == label) {
          out.labels[q] = next;
          stack.push_back(q);
        }
      };
      visit(y - 1, x);
      visit(y + 1, x);
      visit(y, x - 1);
      visit(y, x + 1);
    }
    ++next;
  }
  return out;
}

ContourMap::ContourMap(Dims pixels) : pixels_(pixels) {
  data_.assign(static_cast<std::size_t>(grid_height()) * static_cast<std::size_t>(grid_width()), 0.0);
}

double ContourMap::max_strength() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, v);
  return m;
}

void BBox::extend(int y, int x) {
  if (empty()) {
    row_min = row_max = y;
    col_min = col_max = x;
    return;
  }
  row_min = std::min(row_min, y);
  row_max = std::max(row_max, y);
  col_min = std::min(col_min, x);
  col_max = std::max(col_max, x);
}

void BBox::extend(const BBox& other) {
  if (other.empty()) return;
  if (empty()) {
    *this = other;
    return;
  }
  row_min = std::min(row_min, other.row_min);
  row_max = std::max(row_max, other.row_max);
  col_min = std::min(col_min, other.col_min);
  col_max = std::max(col_max, other.col_max);
}

BinaryMask::BinaryMask(Dims dims) : dims_(dims), words_((dims.size() + 63) / 64, 0) {}

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

BBox BinaryMask::bbox() const {
  BBox box;
  for (int y = 0; y < dims_.height; ++y) {
    for (int x = 0; x < dims_.width; ++x) {
      if (test(y, x)) box.extend(y, x);
    }
  }
  return box;
}

std::uint32_t InstanceGroundTruth::instance_count() const {
  std::uint32_t k = 0;
  for (std::uint32_t id : ids) k = std::max(k, id);
  return k;
}

BinaryMask InstanceGroundTruth::instance_mask(std::uint32_t instance) const {
  BinaryMask mask(dims);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == instance) mask.set(i);
  }
  return mask;
}

}  // namespace mcg
