#pragma once

#include <string>
#include <vector>

#include "modhdr/image.hpp"
#include "modhdr/sensor.hpp"
#include "modhdr/unwrap.hpp"

namespace modhdr {

enum class FeatureNorm {
  None,
  DivideByWrapRange,  // every channel divided by 2^b
};

/// Which hand-computed representations are concatenated into the network
/// input. Channel order is fixed as [raw | wrapped diff | init].
struct FeatureConfig {
  bool use_raw = true;
  bool use_wrapped_diff = false;
  bool use_init = false;
  FeatureNorm normalization = FeatureNorm::DivideByWrapRange;

  int stack_channels(int source_channels) const {
    return source_channels * ((use_raw ? 1 : 0) + (use_wrapped_diff ? 2 : 0) + (use_init ? 1 : 0));
  }

  bool operator==(const FeatureConfig& o) const {
    return use_raw == o.use_raw && use_wrapped_diff == o.use_wrapped_diff &&
           use_init == o.use_init && normalization == o.normalization;
  }
};

struct FeatureStack {
  Image stack;
  std::vector<std::string> channel_layout;
  int source_channels = 1;
  int bit_depth = 8;
};

namespace detail {

inline std::string channel_tag(const char* base, int c, int channels) {
  if (channels == 1) return base;
  static const char* suffix[3] = {"_r", "_g", "_b"};
  return std::string(base) + suffix[c];
}

}  // namespace detail

/// Concatenate the enabled features of a modulo measurement into one
/// planar stack. x0 is computed by the DCT solver in zero-mean gauge.
inline FeatureStack build_features(const ModuloImage& y, const FeatureConfig& cfg) {
  if (!cfg.use_raw && !cfg.use_wrapped_diff && !cfg.use_init)
    throw InvalidArgument("build_features: at least one feature must be enabled");

  const Image& r = y.raster;
  const int src_c = r.channels;
  FeatureStack fs;
  fs.source_channels = src_c;
  fs.bit_depth = y.bit_depth;
  fs.stack = Image(r.height, r.width, cfg.stack_channels(src_c));

  int out_c = 0;
  auto copy_plane = [&](std::span<const double> src, const std::string& tag) {
    auto dst = fs.stack.plane(out_c);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k];
    fs.channel_layout.push_back(tag);
    ++out_c;
  };

  if (cfg.use_raw)
    for (int c = 0; c < src_c; ++c) copy_plane(r.plane(c), detail::channel_tag("raw", c, src_c));

  if (cfg.use_wrapped_diff) {
    WrappedGradient g = wrapped_diff(y);
    for (int c = 0; c < src_c; ++c) {
      copy_plane(g.dh.plane(c), detail::channel_tag("dh", c, src_c));
      copy_plane(g.dv.plane(c), detail::channel_tag("dv", c, src_c));
    }
  }

  if (cfg.use_init) {
    UnwrapSolution x0 = unwrap_exact(y, Gauge::ZeroMean);
    for (int c = 0; c < src_c; ++c)
      copy_plane(x0.image.plane(c), detail::channel_tag("init", c, src_c));
  }

  if (cfg.normalization == FeatureNorm::DivideByWrapRange) {
    const double inv = 1.0 / std::ldexp(1.0, y.bit_depth);
    for (double& v : fs.stack.data) v *= inv;
  }
  return fs;
}

/// The six input rows of the ablation, in row order:
/// {y}, {M}, {x0}, {y,M}, {y,x0}, {y,M,x0}.
inline std::vector<FeatureConfig> table1_configs() {
  auto mk = [](bool raw, bool diff, bool init) {
    FeatureConfig c;
    c.use_raw = raw;
    c.use_wrapped_diff = diff;
    c.use_init = init;
    return c;
  };
  return {mk(true, false, false), mk(false, true, false), mk(false, false, true),
          mk(true, true, false),  mk(true, false, true),  mk(true, true, true)};
}

/// Symbolic names used by the CLI: y | diff | init | y+diff | y+init | all.
inline std::string feature_config_name(const FeatureConfig& c) {
  if (c.use_raw && c.use_wrapped_diff && c.use_init) return "all";
  if (c.use_raw && c.use_wrapped_diff) return "y+diff";
  if (c.use_raw && c.use_init) return "y+init";
  if (c.use_raw) return "y";
  if (c.use_wrapped_diff && c.use_init) return "diff+init";
  if (c.use_wrapped_diff) return "diff";
  if (c.use_init) return "init";
  return "none";
}

inline FeatureConfig parse_feature_config(const std::string& name) {
  for (const FeatureConfig& c : table1_configs())
    if (feature_config_name(c) == name) return c;
  throw InvalidArgument("unknown feature configuration '" + name +
                        "' (expected y|diff|init|y+diff|y+init|all)");
}

}  // namespace modhdr
