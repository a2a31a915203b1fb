#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "modhdr/image.hpp"
#include "modhdr/rng.hpp"
#include "modhdr/sensor.hpp"

namespace modhdr {

enum class SceneKind { Ramp, GaussianBlobs, Sinusoid, PiecewiseConstant, Composite };
enum class ItohMode { Enforce, Free };

inline std::string scene_kind_name(SceneKind k) {
  switch (k) {
    case SceneKind::Ramp: return "ramp";
    case SceneKind::GaussianBlobs: return "gaussian-blobs";
    case SceneKind::Sinusoid: return "sinusoid";
    case SceneKind::PiecewiseConstant: return "piecewise-constant";
    case SceneKind::Composite: return "composite";
  }
  throw InvalidArgument("unknown scene kind");
}

inline SceneKind parse_scene_kind(const std::string& s) {
  if (s == "ramp") return SceneKind::Ramp;
  if (s == "gaussian-blobs") return SceneKind::GaussianBlobs;
  if (s == "sinusoid") return SceneKind::Sinusoid;
  if (s == "piecewise-constant") return SceneKind::PiecewiseConstant;
  if (s == "composite") return SceneKind::Composite;
  throw InvalidArgument("unknown scene kind: " + s);
}

inline std::string itoh_mode_name(ItohMode m) {
  return m == ItohMode::Enforce ? "enforce" : "free";
}

inline ItohMode parse_itoh_mode(const std::string& s) {
  if (s == "enforce") return ItohMode::Enforce;
  if (s == "free") return ItohMode::Free;
  throw InvalidArgument("unknown itoh mode: " + s);
}

struct SceneSpec {
  SceneKind kind = SceneKind::GaussianBlobs;
  int height = 64;
  int width = 64;
  int channels = 1;
  double peak_factor = 4.0;  // max radiance ~ peak_factor * 2^bit_depth
  int bit_depth = 8;
  std::uint64_t seed = 0;
  ItohMode itoh_mode = ItohMode::Free;

  void validate() const {
    if (height < 8 || width < 8) throw InvalidArgument("SceneSpec: size must be at least 8x8");
    if (channels != 1 && channels != 3) throw InvalidArgument("SceneSpec: channels must be 1 or 3");
    if (!(peak_factor > 0.0)) throw InvalidArgument("SceneSpec: peak_factor must be > 0");
    if (bit_depth < 1 || bit_depth > 16)
      throw InvalidArgument("SceneSpec: bit_depth must be in [1, 16]");
  }
};

namespace detail {

inline void channel_gains(Rng& rng, int channels, double lo, double hi, std::vector<double>& g) {
  g.assign(channels, 1.0);
  if (channels > 1)
    for (double& v : g) v = rng.uniform(lo, hi);
}

inline void scene_ramp(Image& x, double peak) {
  const double denom = static_cast<double>(x.height - 1 + x.width - 1);
  const double gains3[3] = {0.8, 1.0, 0.9};
  for (int c = 0; c < x.channels; ++c) {
    const double gain = x.channels == 3 ? gains3[c] : 1.0;
    for (int i = 0; i < x.height; ++i)
      for (int j = 0; j < x.width; ++j)
        x.at(c, i, j) = gain * peak * static_cast<double>(i + j) / denom;
  }
}

inline void scene_gaussian_blobs(Image& x, double peak, Rng& rng) {
  const double base = 0.02 * peak;
  const int nblobs = rng.uniform_int(3, 6);
  struct Blob {
    double ci, cj, s2, amp;
  };
  std::vector<Blob> blobs(nblobs);
  const double side = static_cast<double>(std::min(x.height, x.width));
  for (auto& bl : blobs) {
    bl.ci = rng.uniform(0.0, static_cast<double>(x.height - 1));
    bl.cj = rng.uniform(0.0, static_cast<double>(x.width - 1));
    const double sigma = rng.uniform(0.04, 0.15) * side;
    bl.s2 = 2.0 * sigma * sigma;
    bl.amp = rng.uniform(0.3, 1.0) * (peak - base);
  }
  std::vector<double> gains;
  channel_gains(rng, x.channels, 0.6, 1.0, gains);
  for (int c = 0; c < x.channels; ++c)
    for (int i = 0; i < x.height; ++i)
      for (int j = 0; j < x.width; ++j) {
        double v = base;
        for (const auto& bl : blobs) {
          const double di = static_cast<double>(i) - bl.ci;
          const double dj = static_cast<double>(j) - bl.cj;
          v += bl.amp * std::exp(-(di * di + dj * dj) / bl.s2);
        }
        x.at(c, i, j) = gains[c] * v;
      }
  const double m = x.max_value();
  if (m > 0.0) {
    const double s = peak / m;
    for (double& v : x.data) v *= s;
  }
}

inline void scene_sinusoid(Image& x, double peak, Rng& rng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const double fi = static_cast<double>(rng.uniform_int(1, 3));
  const double fj = static_cast<double>(rng.uniform_int(1, 3));
  const double p1 = rng.uniform(0.0, kTwoPi);
  const double p2 = rng.uniform(0.0, kTwoPi);
  const double amp = 0.5 * peak * rng.uniform(0.7, 1.0);
  const double offset = 0.5 * peak;
  std::vector<double> gains;
  channel_gains(rng, x.channels, 0.6, 1.0, gains);
  for (int c = 0; c < x.channels; ++c)
    for (int i = 0; i < x.height; ++i)
      for (int j = 0; j < x.width; ++j)
        x.at(c, i, j) =
            gains[c] * (offset + amp * std::sin(kTwoPi * fi * i / x.height + p1) *
                                     std::sin(kTwoPi * fj * j / x.width + p2));
}

inline void scene_piecewise_constant(Image& x, double peak, Rng& rng) {
  const double base = rng.uniform(0.0, 0.2 * peak);
  for (double& v : x.data) v = base;
  const int nrects = rng.uniform_int(4, 8);
  for (int r = 0; r < nrects; ++r) {
    const int i0 = rng.uniform_int(0, x.height - 4);
    const int hr = rng.uniform_int(3, x.height - i0);
    const int j0 = rng.uniform_int(0, x.width - 4);
    const int wr = rng.uniform_int(3, x.width - j0);
    const double level = rng.uniform(0.1, 1.0) * peak;
    std::vector<double> gains;
    channel_gains(rng, x.channels, 0.5, 1.0, gains);
    for (int c = 0; c < x.channels; ++c)
      for (int i = i0; i < i0 + hr; ++i)
        for (int j = j0; j < j0 + wr; ++j) x.at(c, i, j) = gains[c] * level;
  }
}

inline void scene_composite(Image& x, double peak, Rng& rng) {
  // low-frequency base: gentle ramp plus two broad humps
  const double denom = static_cast<double>(x.height - 1 + x.width - 1);
  struct Hump {
    double ci, cj, s2, amp;
  };
  const double side = static_cast<double>(std::min(x.height, x.width));
  Hump humps[2];
  for (auto& hm : humps) {
    hm.ci = rng.uniform(0.0, static_cast<double>(x.height - 1));
    hm.cj = rng.uniform(0.0, static_cast<double>(x.width - 1));
    const double sigma = rng.uniform(0.3, 0.6) * side;
    hm.s2 = 2.0 * sigma * sigma;
    hm.amp = rng.uniform(0.1, 0.3) * peak;
  }
  const bool with_blobs = rng.uniform() < 0.5;
  std::vector<Hump> blobs;
  if (with_blobs) {
    blobs.resize(rng.uniform_int(1, 3));
    for (auto& bl : blobs) {
      bl.ci = rng.uniform(0.0, static_cast<double>(x.height - 1));
      bl.cj = rng.uniform(0.0, static_cast<double>(x.width - 1));
      const double sigma = rng.uniform(0.03, 0.08) * side;
      bl.s2 = 2.0 * sigma * sigma;
      bl.amp = rng.uniform(0.5, 1.0) * peak;
    }
  }
  std::vector<double> gains;
  channel_gains(rng, x.channels, 0.6, 1.0, gains);
  for (int c = 0; c < x.channels; ++c)
    for (int i = 0; i < x.height; ++i)
      for (int j = 0; j < x.width; ++j) {
        double v = 0.15 * peak * (0.5 + 0.5 * static_cast<double>(i + j) / denom);
        for (const auto& hm : humps) {
          const double di = i - hm.ci, dj = j - hm.cj;
          v += hm.amp * std::exp(-(di * di + dj * dj) / hm.s2);
        }
        for (const auto& bl : blobs) {
          const double di = i - bl.ci, dj = j - bl.cj;
          v += bl.amp * std::exp(-(di * di + dj * dj) / bl.s2);
        }
        x.at(c, i, j) = gains[c] * v;
      }
  const double m = x.max_value();
  if (m > peak) {
    const double s = peak / m;
    for (double& v : x.data) v *= s;
  }
}

}  // namespace detail

/// Deterministic synthetic HDR scene for (spec, seed). In enforce mode
/// the whole image is rescaled (bounded retries) until every finite
/// difference is strictly below half the wrap range.
inline HdrImage generate(const SceneSpec& spec) {
  spec.validate();
  const double peak = spec.peak_factor * std::ldexp(1.0, spec.bit_depth);
  Image x(spec.height, spec.width, spec.channels);
  Rng rng(spec.seed);
  switch (spec.kind) {
    case SceneKind::Ramp: detail::scene_ramp(x, peak); break;
    case SceneKind::GaussianBlobs: detail::scene_gaussian_blobs(x, peak, rng); break;
    case SceneKind::Sinusoid: detail::scene_sinusoid(x, peak, rng); break;
    case SceneKind::PiecewiseConstant: detail::scene_piecewise_constant(x, peak, rng); break;
    case SceneKind::Composite: detail::scene_composite(x, peak, rng); break;
  }

  if (spec.itoh_mode == ItohMode::Enforce) {
    const double half = std::ldexp(1.0, spec.bit_depth - 1);
    for (int attempt = 0; attempt < 8; ++attempt) {
      HdrImage probe(x);
      if (itoh_satisfied(probe, spec.bit_depth).satisfied) return probe;
      double gmax = 0.0;
      for (int c = 0; c < x.channels; ++c)
        for (int i = 0; i < x.height; ++i)
          for (int j = 0; j < x.width; ++j) {
            if (j + 1 < x.width)
              gmax = std::max(gmax, std::abs(x.at(c, i, j + 1) - x.at(c, i, j)));
            if (i + 1 < x.height)
              gmax = std::max(gmax, std::abs(x.at(c, i + 1, j) - x.at(c, i, j)));
          }
      const double s = 0.95 * half / gmax;
      if (!(s > 1e-9))
        throw NumericError("itoh enforcement needs a degenerate rescale for this spec");
      for (double& v : x.data) v *= s;
    }
    HdrImage probe(x);
    if (!itoh_satisfied(probe, spec.bit_depth).satisfied)
      throw NumericError("itoh enforcement did not converge within bounded attempts");
    return probe;
  }
  return HdrImage(std::move(x));
}

}  // namespace modhdr
