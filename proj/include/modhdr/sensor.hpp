#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "modhdr/image.hpp"

namespace modhdr {

/// y = x - 2^b * floor(x / 2^b) for x >= 0. fmod is exact in IEEE
/// arithmetic, so the result is the mathematically exact remainder.
inline double wrap_value(double x, double range) {
  double y = std::fmod(x, range);
  return y;  // x >= 0, so fmod already lands in [0, range)
}

/// M_b: re-center a difference of wrapped values into [-2^(b-1), 2^(b-1)].
/// Ties at half range round away from zero (std::round), which only
/// matters exactly at the Itoh boundary where recovery is undefined.
inline double wrap_centered(double d, double range) {
  return d - range * std::round(d / range);
}

/// Cyclic sensor reset: every pixel independently reduced modulo 2^b.
/// With quantize set, the measurement is floored to integer ADC codes.
inline ModuloImage wrap(const HdrImage& x, int bit_depth, bool quantize = false) {
  if (bit_depth < 1) throw InvalidArgument("wrap: bit_depth must be >= 1");
  const double range = std::ldexp(1.0, bit_depth);
  Image out(x.raster.height, x.raster.width, x.raster.channels);
  for (int c = 0; c < x.raster.channels; ++c)
    for (int i = 0; i < x.raster.height; ++i)
      for (int j = 0; j < x.raster.width; ++j) {
        double v = x.raster.at(c, i, j);
        if (!std::isfinite(v))
          throw InvalidArgument("wrap: non-finite input at (c=" + std::to_string(c) +
                                ", i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")");
        double y = wrap_value(v, range);
        out.at(c, i, j) = quantize ? std::floor(y) : y;
      }
  ModuloImage m;
  m.raster = std::move(out);
  m.bit_depth = bit_depth;
  return m;
}

inline HdrImage scale(const HdrImage& x, const ScaleTransform& t) {
  Image out = x.raster;
  for (double& v : out.data) v *= t.alpha;
  HdrImage s;
  s.raster = std::move(out);
  return s;
}

/// Forward differences of the measurement, re-wrapped by M_b. Output
/// fields share the source shape; last column of dh / last row of dv
/// stay zero.
inline WrappedGradient wrapped_diff(const ModuloImage& y) {
  const Image& r = y.raster;
  const double range = std::ldexp(1.0, y.bit_depth);
  WrappedGradient g;
  g.bit_depth = y.bit_depth;
  g.dh = Image(r.height, r.width, r.channels);
  g.dv = Image(r.height, r.width, r.channels);
  for (int c = 0; c < r.channels; ++c) {
    for (int i = 0; i < r.height; ++i)
      for (int j = 0; j + 1 < r.width; ++j)
        g.dh.at(c, i, j) = wrap_centered(r.at(c, i, j + 1) - r.at(c, i, j), range);
    for (int i = 0; i + 1 < r.height; ++i)
      for (int j = 0; j < r.width; ++j)
        g.dv.at(c, i, j) = wrap_centered(r.at(c, i + 1, j) - r.at(c, i, j), range);
  }
  return g;
}

struct ItohViolation {
  int channel;
  int row;
  int col;
  char axis;  // 'h' or 'v'
  double magnitude;
};

struct ItohReport {
  bool satisfied = true;
  std::vector<ItohViolation> violations;
};

/// True iff every forward difference of x has magnitude strictly below
/// 2^(b-1); violations are reported with their coordinates.
inline ItohReport itoh_satisfied(const HdrImage& x, int bit_depth) {
  if (bit_depth < 1) throw InvalidArgument("itoh_satisfied: bit_depth must be >= 1");
  const double half = std::ldexp(1.0, bit_depth - 1);
  const Image& r = x.raster;
  ItohReport rep;
  for (int c = 0; c < r.channels; ++c) {
    for (int i = 0; i < r.height; ++i)
      for (int j = 0; j + 1 < r.width; ++j) {
        double d = std::abs(r.at(c, i, j + 1) - r.at(c, i, j));
        if (!(d < half)) rep.violations.push_back({c, i, j, 'h', d});
      }
    for (int i = 0; i + 1 < r.height; ++i)
      for (int j = 0; j < r.width; ++j) {
        double d = std::abs(r.at(c, i + 1, j) - r.at(c, i, j));
        if (!(d < half)) rep.violations.push_back({c, i, j, 'v', d});
      }
  }
  rep.satisfied = rep.violations.empty();
  return rep;
}

}  // namespace modhdr
