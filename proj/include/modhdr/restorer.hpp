#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modhdr/features.hpp"
#include "modhdr/image.hpp"
#include "modhdr/rng.hpp"

namespace modhdr {

namespace detail {

// Clamped neighbor tables for replicate padding: index k in [0, n+1]
// maps to clamp(k-1, 0, n-1).
inline std::vector<int> clamp_table(int n) {
  std::vector<int> t(n + 2);
  for (int k = 0; k < n + 2; ++k) t[k] = std::min(std::max(k - 1, 0), n - 1);
  return t;
}

// 3x3 convolution with replicate padding.
// weights layout: [oc][ic][3][3], biases: [oc].
inline void conv3x3_forward(const double* in, int in_ch, double* out, int out_ch, int h, int w,
                            const double* weights, const double* biases) {
  const std::vector<int> ri = clamp_table(h);
  const std::vector<int> ci = clamp_table(w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int oc = 0; oc < out_ch; ++oc) {
    double* op = out + oc * plane;
    const double bias = biases[oc];
    for (std::size_t k = 0; k < plane; ++k) op[k] = bias;
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* ip = in + ic * plane;
      const double* wk = weights + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
      for (int i = 0; i < h; ++i) {
        double* orow = op + static_cast<std::size_t>(i) * w;
        for (int di = 0; di < 3; ++di) {
          const double* irow = ip + static_cast<std::size_t>(ri[i + di]) * w;
          const double w0 = wk[di * 3 + 0], w1 = wk[di * 3 + 1], w2 = wk[di * 3 + 2];
          for (int j = 0; j < w; ++j)
            orow[j] += w0 * irow[ci[j]] + w1 * irow[ci[j + 1]] + w2 * irow[ci[j + 2]];
        }
      }
    }
  }
}

// Adjoint of conv3x3_forward. Accumulates into dweights/dbiases; din may
// be null when input gradients are not needed (first layer).
inline void conv3x3_backward(const double* in, int in_ch, const double* dout, int out_ch, int h,
                             int w, const double* weights, double* dweights, double* dbiases,
                             double* din) {
  const std::vector<int> ri = clamp_table(h);
  const std::vector<int> ci = clamp_table(w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int oc = 0; oc < out_ch; ++oc) {
    const double* gp = dout + oc * plane;
    double acc_b = 0.0;
    for (std::size_t k = 0; k < plane; ++k) acc_b += gp[k];
    dbiases[oc] += acc_b;
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* ip = in + ic * plane;
      const double* wk = weights + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
      double* dwk = dweights + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
      double* dip = din ? din + ic * plane : nullptr;
      for (int i = 0; i < h; ++i) {
        const double* grow = gp + static_cast<std::size_t>(i) * w;
        for (int di = 0; di < 3; ++di) {
          const double* irow = ip + static_cast<std::size_t>(ri[i + di]) * w;
          double* drow = dip ? dip + static_cast<std::size_t>(ri[i + di]) * w : nullptr;
          for (int dj = 0; dj < 3; ++dj) {
            const double wv = wk[di * 3 + dj];
            double acc_w = 0.0;
            for (int j = 0; j < w; ++j) {
              const double g = grow[j];
              acc_w += g * irow[ci[j + dj]];
              if (drow) drow[ci[j + dj]] += g * wv;
            }
            dwk[di * 3 + dj] += acc_w;
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Activations recorded by a forward pass, consumed by backward().
struct ForwardCache {
  Image stack;             // network input
  std::vector<double> a1;  // relu(conv1)
  std::vector<double> a2;  // relu(conv2)
  bool valid = false;
};

/// Small convolutional restorer: three 3x3 conv layers with replicate
/// padding and max(0, .) activations between them, a global additive
/// skip from the raw-y channels when present, and an output scale that
/// undoes input normalization so predictions are in HDR units.
class ToyRestorer {
 public:
  int in_channels = 1;
  int hidden = 8;
  int out_channels = 1;
  std::vector<int> skip_channels;  // stack index of the raw channel feeding each output, or empty
  double output_scale = 1.0;
  std::vector<double> theta;

  ToyRestorer() = default;

  static ToyRestorer create(const FeatureConfig& cfg, int source_channels, int bit_depth,
                            int hidden_channels = 8) {
    ToyRestorer m;
    m.in_channels = cfg.stack_channels(source_channels);
    m.hidden = hidden_channels;
    m.out_channels = source_channels;
    if (cfg.use_raw) {
      // raw channels occupy the first source_channels slots of the stack
      m.skip_channels.resize(source_channels);
      for (int c = 0; c < source_channels; ++c) m.skip_channels[c] = c;
    }
    m.output_scale =
        cfg.normalization == FeatureNorm::DivideByWrapRange ? std::ldexp(1.0, bit_depth) : 1.0;
    m.theta.assign(m.param_count(), 0.0);
    return m;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (auto [ci, co] : layer_dims()) n += static_cast<std::size_t>(9) * ci * co + co;
    return n;
  }

  /// Seeded init: every parameter of layer l drawn uniform in [-s, s]
  /// with s = 1/sqrt(9 * C_in,l).
  void init_params(std::uint64_t seed) {
    Rng rng(seed);
    std::size_t k = 0;
    for (auto [ci, co] : layer_dims()) {
      const double s = 1.0 / std::sqrt(9.0 * ci);
      const std::size_t n = static_cast<std::size_t>(9) * ci * co + co;
      for (std::size_t t = 0; t < n; ++t) theta[k++] = rng.uniform(-s, s);
    }
  }

  Image forward(const Image& stack) const {
    ForwardCache cache;
    return run_forward(stack, cache, false);
  }

  /// Forward pass that records activations for a later backward() call.
  Image forward_recorded(const Image& stack, ForwardCache& cache) const {
    return run_forward(stack, cache, true);
  }

  Image forward_recorded(const Image& stack) {
    return run_forward(stack, last_cache_, true);
  }

  /// Reverse-mode gradients d(loss)/d(theta) given d(loss)/d(output).
  /// Accumulates into grad (sized param_count()).
  void backward(const ForwardCache& cache, const Image& dout, std::vector<double>& grad) const {
    if (!cache.valid) throw InvalidArgument("backward: no recorded forward pass");
    if (grad.size() != theta.size()) throw InvalidArgument("backward: gradient size mismatch");
    const int h = cache.stack.height, w = cache.stack.width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    const double* w1 = theta.data() + off_w(0);
    const double* w2 = theta.data() + off_w(1);
    const double* w3 = theta.data() + off_w(2);

    // d z3 = output_scale * dout  (skip path carries no parameters)
    std::vector<double> dz3(plane * out_channels);
    for (int c = 0; c < out_channels; ++c) {
      auto dp = dout.plane(c);
      for (std::size_t k = 0; k < plane; ++k) dz3[c * plane + k] = output_scale * dp[k];
    }

    std::vector<double> da2(plane * hidden, 0.0);
    detail::conv3x3_backward(cache.a2.data(), hidden, dz3.data(), out_channels, h, w, w3,
                             grad.data() + off_w(2), grad.data() + off_b(2), da2.data());
    // relu': a2 > 0
    for (std::size_t k = 0; k < da2.size(); ++k)
      if (!(cache.a2[k] > 0.0)) da2[k] = 0.0;

    std::vector<double> da1(plane * hidden, 0.0);
    detail::conv3x3_backward(cache.a1.data(), hidden, da2.data(), hidden, h, w, w2,
                             grad.data() + off_w(1), grad.data() + off_b(1), da1.data());
    for (std::size_t k = 0; k < da1.size(); ++k)
      if (!(cache.a1[k] > 0.0)) da1[k] = 0.0;

    detail::conv3x3_backward(cache.stack.data.data(), in_channels, da1.data(), hidden, h, w, w1,
                             grad.data() + off_w(0), grad.data() + off_b(0), nullptr);
  }

  void backward(const Image& dout, std::vector<double>& grad) const {
    backward(last_cache_, dout, grad);
  }

  std::array<std::pair<int, int>, 3> layer_dims() const {
    return {{{in_channels, hidden}, {hidden, hidden}, {hidden, out_channels}}};
  }

 private:
  ForwardCache last_cache_;

  std::size_t off_w(int layer) const {
    auto dims = layer_dims();
    std::size_t o = 0;
    for (int l = 0; l < layer; ++l)
      o += static_cast<std::size_t>(9) * dims[l].first * dims[l].second + dims[l].second;
    return o;
  }
  std::size_t off_b(int layer) const {
    auto dims = layer_dims();
    return off_w(layer) + static_cast<std::size_t>(9) * dims[layer].first * dims[layer].second;
  }

  Image run_forward(const Image& stack, ForwardCache& cache, bool record) const {
    if (stack.channels != in_channels)
      throw InvalidArgument("ToyRestorer: stack has " + std::to_string(stack.channels) +
                            " channels, model expects " + std::to_string(in_channels));
    const int h = stack.height, w = stack.width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    std::vector<double> a1(plane * hidden), a2(plane * hidden), z3(plane * out_channels);
    detail::conv3x3_forward(stack.data.data(), in_channels, a1.data(), hidden, h, w,
                            theta.data() + off_w(0), theta.data() + off_b(0));
    for (double& v : a1) v = v > 0.0 ? v : 0.0;
    detail::conv3x3_forward(a1.data(), hidden, a2.data(), hidden, h, w, theta.data() + off_w(1),
                            theta.data() + off_b(1));
    for (double& v : a2) v = v > 0.0 ? v : 0.0;
    detail::conv3x3_forward(a2.data(), hidden, z3.data(), out_channels, h, w,
                            theta.data() + off_w(2), theta.data() + off_b(2));

    Image out(h, w, out_channels);
    for (int c = 0; c < out_channels; ++c) {
      auto op = out.plane(c);
      const double* zp = z3.data() + c * plane;
      if (!skip_channels.empty()) {
        auto sp = stack.plane(skip_channels[c]);
        for (std::size_t k = 0; k < plane; ++k) op[k] = output_scale * (zp[k] + sp[k]);
      } else {
        for (std::size_t k = 0; k < plane; ++k) op[k] = output_scale * zp[k];
      }
    }

    if (record) {
      cache.stack = stack;
      cache.a1 = std::move(a1);
      cache.a2 = std::move(a2);
      cache.valid = true;
    }
    return out;
  }
};

}  // namespace modhdr
