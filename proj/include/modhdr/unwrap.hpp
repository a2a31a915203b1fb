#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "modhdr/dct.hpp"
#include "modhdr/image.hpp"
#include "modhdr/sensor.hpp"

namespace modhdr {

/// Gradient-domain reconstruction fixes the image only up to an additive
/// constant; the gauge names how that constant is pinned.
enum class Gauge {
  ZeroMean,
  AnchorFirstPixel,
  AnchorToValue,
};

struct UnwrapSolution {
  Image image;  // may hold negative values before anchoring
  Gauge gauge = Gauge::ZeroMean;
  double anchor_value = 0.0;
  double residual_norm = 0.0;  // ||forward_diff(image) - g||_2
};

namespace detail {

/// || forward differences of x minus (dh, dv) ||_2 over one channel.
/// Padding entries are zero on both sides, so full-plane sums match the
/// valid-entry definition.
inline double gradient_residual(const Image& x, const Image& dh, const Image& dv, int c) {
  double acc = 0.0;
  for (int i = 0; i < x.height; ++i)
    for (int j = 0; j + 1 < x.width; ++j) {
      double r = (x.at(c, i, j + 1) - x.at(c, i, j)) - dh.at(c, i, j);
      acc += r * r;
    }
  for (int i = 0; i + 1 < x.height; ++i)
    for (int j = 0; j < x.width; ++j) {
      double r = (x.at(c, i + 1, j) - x.at(c, i, j)) - dv.at(c, i, j);
      acc += r * r;
    }
  return acc;
}

/// Zero-mean least-squares integrator for one channel: divergence of the
/// gradient field, DCT-II, divide by the Neumann Laplacian eigenvalues
/// D(u,v) = 2cos(pi u/M) + 2cos(pi v/N) - 4, zero the DC term, inverse.
inline std::vector<double> poisson_solve_channel(const Image& dh, const Image& dv, int c) {
  const int m = dh.height, n = dh.width;
  std::vector<double> rho(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double v = dh.at(c, i, j) + dv.at(c, i, j);
      if (j > 0) v -= dh.at(c, i, j - 1);
      if (i > 0) v -= dv.at(c, i - 1, j);
      rho[static_cast<std::size_t>(i) * n + j] = v;
    }
  std::vector<double> coef = dct2(rho, m, n);
  const double pi = 3.14159265358979323846264338327950288;
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == 0 && v == 0) {
        coef[0] = 0.0;
        continue;
      }
      double d = 2.0 * std::cos(pi * u / m) + 2.0 * std::cos(pi * v / n) - 4.0;
      coef[static_cast<std::size_t>(u) * n + v] /= d;
    }
  return idct2(coef, m, n);
}

inline void apply_gauge(Image& img, Gauge gauge, double anchor_value) {
  for (int c = 0; c < img.channels; ++c) {
    auto p = img.plane(c);
    double shift = 0.0;
    switch (gauge) {
      case Gauge::ZeroMean: {
        double s = 0.0;
        for (double v : p) s += v;
        shift = s / static_cast<double>(p.size());
        break;
      }
      case Gauge::AnchorFirstPixel:
        shift = p[0];
        break;
      case Gauge::AnchorToValue:
        shift = p[0] - anchor_value;
        break;
    }
    for (double& v : p) v -= shift;
  }
}

}  // namespace detail

/// Closed-form least-squares unwrap x0 = argmin ||forward_diff(x) - g||^2
/// via the 2D-DCT Poisson solver. Channels solve independently.
inline UnwrapSolution solve_dct(const WrappedGradient& g, Gauge gauge = Gauge::ZeroMean,
                                double anchor_value = 0.0) {
  const int m = g.dh.height, n = g.dh.width;
  if (m < 2 || n < 2) throw InvalidArgument("solve_dct: image must be at least 2x2");
  if (!g.dh.same_shape(g.dv)) throw InvalidArgument("solve_dct: dh/dv shape mismatch");

  UnwrapSolution sol;
  sol.gauge = gauge;
  sol.anchor_value = anchor_value;
  sol.image = Image(m, n, g.dh.channels);
  double res = 0.0;
  for (int c = 0; c < g.dh.channels; ++c) {
    std::vector<double> x = detail::poisson_solve_channel(g.dh, g.dv, c);
    auto p = sol.image.plane(c);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = x[k];
    res += detail::gradient_residual(sol.image, g.dh, g.dv, c);
  }
  sol.residual_norm = std::sqrt(res);
  detail::apply_gauge(sol.image, gauge, anchor_value);
  return sol;
}

/// Convenience composition solve_dct(wrapped_diff(y)).
inline UnwrapSolution unwrap_exact(const ModuloImage& y, Gauge gauge = Gauge::ZeroMean,
                                   double anchor_value = 0.0) {
  return solve_dct(wrapped_diff(y), gauge, anchor_value);
}

}  // namespace modhdr
