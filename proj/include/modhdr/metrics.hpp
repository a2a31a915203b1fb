#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "modhdr/image.hpp"

namespace modhdr {

/// Perceptually uniform encoder for absolute luminance in cd/m².
///
/// The curve is the SMPTE ST 2084 (PQ) nonlinearity, re-anchored to the
/// PU convention for HDR metrics: encode(0.005 cd/m²) = 0 and
/// encode(100 cd/m²) = 256, so SDR white spans roughly the usual 8-bit
/// range and values above 100 cd/m² extend beyond it. Inputs are clamped
/// to [0.005, 10000] cd/m². Strictly increasing on that range.
class Pu21Encoder {
 public:
  // ST 2084 constants (exact rationals).
  static constexpr double m1 = 2610.0 / 16384.0;         // 0.1593017578125
  static constexpr double m2 = 2523.0 / 4096.0 * 128.0;  // 78.84375
  static constexpr double c1 = 3424.0 / 4096.0;          // 0.8359375
  static constexpr double c2 = 2413.0 / 4096.0 * 32.0;   // 18.8515625
  static constexpr double c3 = 2392.0 / 4096.0 * 32.0;   // 18.6875
  static constexpr double min_luminance = 0.005;
  static constexpr double max_luminance = 10000.0;

  Pu21Encoder()
      : offset_(pq(min_luminance)), scale_(256.0 / (pq(100.0) - pq(min_luminance))) {}

  static double pq(double y_cd) {
    const double t = std::pow(y_cd / 10000.0, m1);
    return std::pow((c1 + c2 * t) / (1.0 + c3 * t), m2);
  }

  double encode(double y_cd) const {
    const double y = std::clamp(y_cd, min_luminance, max_luminance);
    return scale_ * (pq(y) - offset_);
  }

  /// Elementwise encode of a linear raster; cd_per_unit converts scene
  /// units into cd/m² first.
  Image encode_raster(const Image& linear, double cd_per_unit) const {
    Image out(linear.height, linear.width, linear.channels);
    for (std::size_t k = 0; k < linear.data.size(); ++k)
      out.data[k] = encode(cd_per_unit * linear.data[k]);
    return out;
  }

 private:
  double offset_, scale_;
};

/// Scene-units → cd/m² mapping for absolute-luminance metrics. fit()
/// sends the reference's 99.9th-percentile luminance to peak_luminance
/// (the single largest free parameter of absolute PU numbers; recorded
/// in every resolved config).
struct DisplayMap {
  double scale = 1.0;
  double peak_luminance = 1000.0;

  static DisplayMap fit(const Image& ref, double peak = 1000.0) {
    if (!(peak > 0.0)) throw InvalidArgument("DisplayMap: peak must be > 0");
    std::vector<double> vals;
    if (ref.channels == 3) {
      vals.resize(static_cast<std::size_t>(ref.height) * ref.width);
      auto r = ref.plane(0), g = ref.plane(1), b = ref.plane(2);
      for (std::size_t k = 0; k < vals.size(); ++k)
        vals[k] = 0.2126 * r[k] + 0.7152 * g[k] + 0.0722 * b[k];
    } else {
      vals.assign(ref.data.begin(), ref.data.end());
    }
    std::sort(vals.begin(), vals.end());
    const double n = static_cast<double>(vals.size());
    const double rank = 0.999 * (n - 1.0);
    const auto lo = static_cast<std::size_t>(rank);
    const double frac = rank - static_cast<double>(lo);
    double p = vals[lo];
    if (lo + 1 < vals.size()) p = vals[lo] * (1.0 - frac) + vals[lo + 1] * frac;
    if (!(p > 0.0)) p = vals.back();  // degenerate reference: fall back to max
    DisplayMap dm;
    dm.peak_luminance = peak;
    dm.scale = p > 0.0 ? peak / p : 1.0;
    return dm;
  }
};

/// Rec. 709 luma weights; the scalar overload is shared by tone mapping.
inline double luminance709(double r, double g, double b) {
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

inline Image luminance(const Image& img) {
  if (img.channels != 3)
    throw InvalidArgument("luminance: expected 3 channels, got " + std::to_string(img.channels));
  Image out(img.height, img.width, 1);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = luminance709(r[k], g[k], b[k]);
  return out;
}

inline double psnr(const Image& ref, const Image& test, double peak) {
  if (!ref.same_shape(test)) throw InvalidArgument("psnr: shape mismatch");
  if (!(peak > 0.0)) throw InvalidArgument("psnr: peak must be > 0");
  double mse = 0.0;
  for (std::size_t k = 0; k < ref.data.size(); ++k) {
    const double d = ref.data[k] - test.data[k];
    mse += d * d;
  }
  mse /= static_cast<double>(ref.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

struct SsimParams {
  double peak = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double sigma = 1.5;
};

namespace detail {

inline std::vector<double> gaussian_window(int n, double sigma) {
  std::vector<double> g(n);
  const double half = 0.5 * static_cast<double>(n - 1);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = static_cast<double>(k) - half;
    g[k] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += g[k];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable valid-mode filtering: output is (h-n+1) x (w-n+1).
inline std::vector<double> filter_valid(const double* src, int h, int w,
                                        const std::vector<double>& g) {
  const int n = static_cast<int>(g.size());
  const int wv = w - n + 1, hv = h - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * wv);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < wv; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += g[k] * src[static_cast<std::size_t>(i) * w + j + k];
      rows[static_cast<std::size_t>(i) * wv + j] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(hv) * wv);
  for (int i = 0; i < hv; ++i)
    for (int j = 0; j < wv; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += g[k] * rows[static_cast<std::size_t>(i + k) * wv + j];
      out[static_cast<std::size_t>(i) * wv + j] = acc;
    }
  return out;
}

struct SsimPair {
  double ssim;     // mean of the full SSIM map
  double mean_cs;  // mean of the contrast-structure term alone
};

inline SsimPair ssim_pair(const double* a, const double* b, int h, int w, const SsimParams& p) {
  if (h < p.window || w < p.window)
    throw InvalidArgument("ssim: image smaller than the " + std::to_string(p.window) +
                          "x" + std::to_string(p.window) + " window");
  const std::vector<double> g = gaussian_window(p.window, p.sigma);
  const std::size_t npx = static_cast<std::size_t>(h) * w;
  std::vector<double> aa(npx), bb(npx), ab(npx);
  for (std::size_t k = 0; k < npx; ++k) {
    aa[k] = a[k] * a[k];
    bb[k] = b[k] * b[k];
    ab[k] = a[k] * b[k];
  }
  const std::vector<double> mu1 = filter_valid(a, h, w, g);
  const std::vector<double> mu2 = filter_valid(b, h, w, g);
  const std::vector<double> m11 = filter_valid(aa.data(), h, w, g);
  const std::vector<double> m22 = filter_valid(bb.data(), h, w, g);
  const std::vector<double> m12 = filter_valid(ab.data(), h, w, g);
  const double cc1 = (p.k1 * p.peak) * (p.k1 * p.peak);
  const double cc2 = (p.k2 * p.peak) * (p.k2 * p.peak);
  double sum_ssim = 0.0, sum_cs = 0.0;
  for (std::size_t k = 0; k < mu1.size(); ++k) {
    const double u1 = mu1[k], u2 = mu2[k];
    const double s1 = m11[k] - u1 * u1;
    const double s2 = m22[k] - u2 * u2;
    const double s12 = m12[k] - u1 * u2;
    const double cs = (2.0 * s12 + cc2) / (s1 + s2 + cc2);
    const double l = (2.0 * u1 * u2 + cc1) / (u1 * u1 + u2 * u2 + cc1);
    sum_cs += cs;
    sum_ssim += l * cs;
  }
  const double m = static_cast<double>(mu1.size());
  return {sum_ssim / m, sum_cs / m};
}

// 2x2 box downsample with ceil sizes; odd edges replicate.
inline Image downsample2(const Image& a) {
  const int hh = (a.height + 1) / 2, ww = (a.width + 1) / 2;
  Image out(hh, ww, a.channels);
  for (int c = 0; c < a.channels; ++c) {
    auto src = a.plane(c);
    auto dst = out.plane(c);
    for (int i = 0; i < hh; ++i) {
      const int i0 = 2 * i, i1 = std::min(2 * i + 1, a.height - 1);
      for (int j = 0; j < ww; ++j) {
        const int j0 = 2 * j, j1 = std::min(2 * j + 1, a.width - 1);
        dst[static_cast<std::size_t>(i) * ww + j] =
            0.25 * (src[static_cast<std::size_t>(i0) * a.width + j0] +
                    src[static_cast<std::size_t>(i0) * a.width + j1] +
                    src[static_cast<std::size_t>(i1) * a.width + j0] +
                    src[static_cast<std::size_t>(i1) * a.width + j1]);
      }
    }
  }
  return out;
}

}  // namespace detail

inline double ssim(const Image& ref, const Image& test, const SsimParams& p = {}) {
  if (!ref.same_shape(test)) throw InvalidArgument("ssim: shape mismatch");
  if (ref.channels != 1) throw InvalidArgument("ssim: expected single-channel inputs");
  return detail::ssim_pair(ref.data.data(), test.data.data(), ref.height, ref.width, p).ssim;
}

/// Largest number of dyadic scales for which the image still covers the
/// SSIM window after repeated ceil-halving.
inline int msssim_max_scales(int height, int width, int window = 11) {
  int s = 0, h = height, w = width;
  while (std::min(h, w) >= window) {
    ++s;
    h = (h + 1) / 2;
    w = (w + 1) / 2;
  }
  return s;
}

inline constexpr double kMsssimWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

/// Multi-scale SSIM: contrast-structure terms at scales 1..M-1, full
/// SSIM at the coarsest, combined as a weighted geometric mean. With
/// fewer than 5 scales the leading standard weights are renormalized,
/// so scales=1 reduces exactly to ssim(). Negative factors are clamped
/// to 0 before the fractional powers.
inline double msssim(const Image& ref, const Image& test, const SsimParams& p = {},
                     int scales = 5) {
  if (!ref.same_shape(test)) throw InvalidArgument("msssim: shape mismatch");
  if (ref.channels != 1) throw InvalidArgument("msssim: expected single-channel inputs");
  if (scales < 1 || scales > 5) throw InvalidArgument("msssim: scales must be in [1, 5]");
  const int feasible = msssim_max_scales(ref.height, ref.width, p.window);
  if (scales > feasible)
    throw InvalidArgument("msssim: " + std::to_string(ref.height) + "x" +
                          std::to_string(ref.width) + " image supports at most " +
                          std::to_string(feasible) + " scales, requested " +
                          std::to_string(scales));
  std::vector<double> weights(kMsssimWeights, kMsssimWeights + scales);
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  for (double& w : weights) w /= wsum;

  Image a = ref, b = test;
  double score = 1.0;
  for (int s = 0; s < scales; ++s) {
    const auto pair = detail::ssim_pair(a.data.data(), b.data.data(), a.height, a.width, p);
    const double base = s + 1 < scales ? pair.mean_cs : pair.ssim;
    score *= std::pow(std::max(base, 0.0), weights[s]);
    if (s + 1 < scales) {
      a = detail::downsample2(a);
      b = detail::downsample2(b);
    }
  }
  return score;
}

struct MetricReport {
  double psnr_y_pu = 0.0;
  double psnr_pu = 0.0;
  double ssim_y_pu = 0.0;
  double msssim_y_pu = 0.0;
  double psnr_l = 0.0;
  double ssim_l = 0.0;
};

/// Full metric suite: absolute-luminance metrics after the perceptual
/// encoding (peak = encoder value at the display peak), plus linear
/// metrics with peak = max(ref).
inline MetricReport evaluate(const HdrImage& ref, const HdrImage& test, const DisplayMap& dm) {
  if (!ref.raster.same_shape(test.raster)) throw InvalidArgument("evaluate: shape mismatch");
  const Pu21Encoder pu;
  const double peak_pu = pu.encode(dm.peak_luminance);

  const Image y_ref = ref.raster.channels == 3 ? luminance(ref.raster) : ref.raster;
  const Image y_test = test.raster.channels == 3 ? luminance(test.raster) : test.raster;
  const Image ey_ref = pu.encode_raster(y_ref, dm.scale);
  const Image ey_test = pu.encode_raster(y_test, dm.scale);

  MetricReport r;
  r.psnr_y_pu = psnr(ey_ref, ey_test, peak_pu);
  if (ref.raster.channels == 3) {
    const Image e_ref = pu.encode_raster(ref.raster, dm.scale);
    const Image e_test = pu.encode_raster(test.raster, dm.scale);
    r.psnr_pu = psnr(e_ref, e_test, peak_pu);
  } else {
    r.psnr_pu = r.psnr_y_pu;
  }
  SsimParams sp_pu;
  sp_pu.peak = peak_pu;
  r.ssim_y_pu = ssim(ey_ref, ey_test, sp_pu);
  const int scales = std::min(5, msssim_max_scales(ref.raster.height, ref.raster.width));
  if (scales < 1) throw InvalidArgument("evaluate: image smaller than the SSIM window");
  r.msssim_y_pu = msssim(ey_ref, ey_test, sp_pu, scales);

  double peak_l = ref.raster.max_value();
  if (!(peak_l > 0.0)) peak_l = 1.0;
  r.psnr_l = psnr(ref.raster, test.raster, peak_l);
  SsimParams sp_l;
  sp_l.peak = peak_l;
  double acc = 0.0;
  for (int c = 0; c < ref.raster.channels; ++c) {
    Image rc(ref.raster.height, ref.raster.width, 1), tc(rc.height, rc.width, 1);
    auto rp = ref.raster.plane(c), tp = test.raster.plane(c);
    std::copy(rp.begin(), rp.end(), rc.data.begin());
    std::copy(tp.begin(), tp.end(), tc.data.begin());
    acc += ssim(rc, tc, sp_l);
  }
  r.ssim_l = acc / static_cast<double>(ref.raster.channels);
  return r;
}

inline MetricReport evaluate(const HdrImage& ref, const HdrImage& test,
                             double peak_display = 1000.0) {
  return evaluate(ref, test, DisplayMap::fit(ref.raster, peak_display));
}

/// Global Reinhard operator L/(1+L) on luminance with color ratios
/// preserved; output clamped to [0, 1].
inline Image reinhard_tonemap(const HdrImage& x) {
  const Image& src = x.raster;
  Image out(src.height, src.width, src.channels);
  const std::size_t npx = static_cast<std::size_t>(src.height) * src.width;
  if (src.channels == 3) {
    auto r = src.plane(0), g = src.plane(1), b = src.plane(2);
    for (std::size_t k = 0; k < npx; ++k) {
      const double lum = luminance709(r[k], g[k], b[k]);
      const double gain = lum > 0.0 ? (lum / (1.0 + lum)) / lum : 0.0;
      out.data[k] = std::clamp(r[k] * gain, 0.0, 1.0);
      out.data[npx + k] = std::clamp(g[k] * gain, 0.0, 1.0);
      out.data[2 * npx + k] = std::clamp(b[k] * gain, 0.0, 1.0);
    }
  } else {
    for (std::size_t k = 0; k < npx; ++k) {
      const double lum = src.data[k];
      out.data[k] = std::clamp(lum / (1.0 + lum), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace modhdr
