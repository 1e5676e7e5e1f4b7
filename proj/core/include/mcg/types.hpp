#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mcg {

/// Pixel-grid dimensions.
struct Dims {
  int height = 0;
  int width = 0;

  std::size_t size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x); }
  bool operator==(const Dims&) const = default;
};

/// Row-major image with 1 or 3 channels, values in [0,1].
struct Image {
  Dims dims;
  int channels = 1;
  std::vector<double> data;

  double at(int y, int x, int c) const {
    return data[(dims.index(y, x)) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
  }
  double& at(int y, int x, int c) {
    return data[(dims.index(y, x)) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
  }
};

/// A partition of the pixel grid. Canonical maps use labels 0..K-1 in
/// first-occurrence order of a row-major scan.
struct LabelMap {
  Dims dims;
  std::vector<std::uint32_t> labels;

  std::uint32_t at(int y, int x) const { return labels[dims.index(y, x)]; }
  bool operator==(const LabelMap&) const = default;
};

/// Relabels by first occurrence in row-major order. Idempotent.
LabelMap canonicalize(const LabelMap& map);

/// Number of distinct labels, assuming a canonical map.
std::size_t label_count(const LabelMap& map);

/// Splits every label into its 4-connected components, then canonicalizes.
LabelMap split_components(const LabelMap& map);

/// Strengths on the (2H-1)x(2W-1) contour grid. Pixel (y,x) sits at grid
/// (2y,2x); the edge to its right neighbour at (2y,2x+1), the edge to the
/// pixel below at (2y+1,2x). Pixel sites and odd/odd corners stay 0.
class ContourMap {
 public:
  ContourMap() = default;
  explicit ContourMap(Dims pixels);

  Dims pixels() const { return pixels_; }
  int grid_height() const { return pixels_.height > 0 ? 2 * pixels_.height - 1 : 0; }
  int grid_width() const { return pixels_.width > 0 ? 2 * pixels_.width - 1 : 0; }

  double at(int gy, int gx) const { return data_[grid_index(gy, gx)]; }
  double& at(int gy, int gx) { return data_[grid_index(gy, gx)]; }
  std::size_t grid_index(int gy, int gx) const {
    return static_cast<std::size_t>(gy) * static_cast<std::size_t>(grid_width()) + static_cast<std::size_t>(gx);
  }

  /// Edge between (y,x) and (y,x+1).
  double right(int y, int x) const { return at(2 * y, 2 * x + 1); }
  double& right(int y, int x) { return at(2 * y, 2 * x + 1); }
  /// Edge between (y,x) and (y+1,x).
  double down(int y, int x) const { return at(2 * y + 1, 2 * x); }
  double& down(int y, int x) { return at(2 * y + 1, 2 * x); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double max_strength() const;
  bool operator==(const ContourMap&) const = default;

 private:
  Dims pixels_;
  std::vector<double> data_;
};

/// One inter-pixel edge: the two pixel indices (p < q) and its contour-grid index.
struct GridEdge {
  std::size_t p;
  std::size_t q;
  std::size_t grid;
};

/// Calls f(GridEdge) for every 4-neighbour edge in row-major order
/// (right edge before down edge for each pixel).
template <class F>
void for_each_edge(Dims dims, F&& f) {
  const std::size_t gw = dims.width > 0 ? static_cast<std::size_t>(2 * dims.width - 1) : 0;
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const std::size_t p = dims.index(y, x);
      if (x + 1 < dims.width) {
        f(GridEdge{p, p + 1, static_cast<std::size_t>(2 * y) * gw + static_cast<std::size_t>(2 * x + 1)});
      }
      if (y + 1 < dims.height) {
        f(GridEdge{p, p + static_cast<std::size_t>(dims.width),
                   static_cast<std::size_t>(2 * y + 1) * gw + static_cast<std::size_t>(2 * x)});
      }
    }
  }
}

/// Inclusive pixel bounding box.
struct BBox {
  int row_min = 0;
  int col_min = 0;
  int row_max = -1;
  int col_max = -1;

  bool empty() const { return row_max < row_min || col_max < col_min; }
  long area() const { return empty() ? 0 : static_cast<long>(row_max - row_min + 1) * (col_max - col_min + 1); }
  void extend(int y, int x);
  void extend(const BBox& other);
  bool operator==(const BBox&) const = default;
};

/// Bit-packed binary pixel mask.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(Dims dims);

  Dims dims() const { return dims_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  bool test(int y, int x) const { return test(dims_.index(y, x)); }
  void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  void set(int y, int x) { set(dims_.index(y, x)); }

  std::size_t count() const;
  BBox bbox() const;
  const std::vector<std::uint64_t>& words() const { return words_; }
  bool operator==(const BinaryMask&) const = default;

 private:
  Dims dims_;
  std::vector<std::uint64_t> words_;
};

/// Per-pixel instance ids: 0 is background, 1..K are object instances.
struct InstanceGroundTruth {
  Dims dims;
  std::vector<std::uint32_t> ids;

  std::uint32_t instance_count() const;
  BinaryMask instance_mask(std::uint32_t instance) const;
};

}  // namespace mcg
