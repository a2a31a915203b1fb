#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modhdr/error.hpp"

namespace modhdr {

/// Planar raster of 64-bit reals: channel-major, then row-major within a
/// channel. Index (c, i, j) maps to data[(c*height + i)*width + j].
struct Image {
  std::vector<double> data;
  int height = 0;
  int width = 0;
  int channels = 0;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : data(static_cast<std::size_t>(h) * w * c, fill), height(h), width(w), channels(c) {
    if (h <= 0 || w <= 0 || c <= 0) throw InvalidArgument("Image: non-positive dimensions");
  }

  std::size_t size() const { return data.size(); }
  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }

  double& at(int c, int i, int j) {
    return data[(static_cast<std::size_t>(c) * height + i) * width + j];
  }
  double at(int c, int i, int j) const {
    return data[(static_cast<std::size_t>(c) * height + i) * width + j];
  }

  std::span<double> plane(int c) {
    return {data.data() + static_cast<std::size_t>(c) * pixels(), pixels()};
  }
  std::span<const double> plane(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * pixels(), pixels()};
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  double max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : data) m = std::max(m, v);
    return m;
  }
  double min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : data) m = std::min(m, v);
    return m;
  }
  double mean() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s / static_cast<double>(data.size());
  }
};

/// Linear-radiance HDR scene. Values are finite and nonnegative.
struct HdrImage {
  Image raster;

  HdrImage() = default;
  explicit HdrImage(Image r) : raster(std::move(r)) { validate(); }

  void validate() const {
    if (raster.channels != 1 && raster.channels != 3)
      throw InvalidArgument("HdrImage: channels must be 1 or 3, got " +
                            std::to_string(raster.channels));
    for (int c = 0; c < raster.channels; ++c)
      for (int i = 0; i < raster.height; ++i)
        for (int j = 0; j < raster.width; ++j) {
          double v = raster.at(c, i, j);
          if (!std::isfinite(v) || v < 0.0)
            throw InvalidArgument("HdrImage: non-finite or negative value at (c=" +
                                  std::to_string(c) + ", i=" + std::to_string(i) +
                                  ", j=" + std::to_string(j) + ")");
        }
  }
};

/// Wrapped (modulo) measurement; values live in [0, 2^bit_depth).
struct ModuloImage {
  Image raster;
  int bit_depth = 8;

  ModuloImage() = default;
  ModuloImage(Image r, int b) : raster(std::move(r)), bit_depth(b) { validate(); }

  double wrap_range() const { return std::ldexp(1.0, bit_depth); }

  void validate() const {
    if (bit_depth < 1) throw InvalidArgument("ModuloImage: bit_depth must be >= 1");
    const double range = wrap_range();
    for (double v : raster.data)
      if (!(v >= 0.0 && v < range))
        throw InvalidArgument("ModuloImage: value outside [0, 2^b)");
  }
};

/// Per-pixel forward-difference pair of a modulo image, re-wrapped into
/// [-2^(b-1), 2^(b-1)]. dh and dv carry the same shape as the source;
/// the last column of dh and last row of dv are zero padding.
struct WrappedGradient {
  Image dh;
  Image dv;
  int bit_depth = 8;

  double half_range() const { return std::ldexp(1.0, bit_depth - 1); }
};

/// Exposure change S_alpha(x) = alpha * x.
struct ScaleTransform {
  double alpha = 1.0;

  explicit ScaleTransform(double a) : alpha(a) {
    if (!(a > 0.0)) throw InvalidArgument("ScaleTransform: alpha must be > 0");
  }
};

}  // namespace modhdr
