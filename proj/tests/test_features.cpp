#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "modhdr/features.hpp"
#include "modhdr/rng.hpp"
#include "modhdr/scenes.hpp"

using namespace modhdr;

namespace {

ModuloImage sample_measurement(int channels, int bit_depth, std::uint64_t seed) {
  SceneSpec spec;
  spec.kind = SceneKind::Composite;
  spec.height = 14;
  spec.width = 11;
  spec.channels = channels;
  spec.bit_depth = bit_depth;
  spec.peak_factor = 2.0;
  spec.seed = seed;
  return wrap(generate(spec), bit_depth);
}

}  // namespace

TEST_CASE("stack channel counts follow the enabled features") {
  FeatureConfig cfg;  // raw only
  CHECK(cfg.stack_channels(1) == 1);
  CHECK(cfg.stack_channels(3) == 3);
  cfg.use_wrapped_diff = true;
  CHECK(cfg.stack_channels(1) == 3);
  cfg.use_init = true;
  CHECK(cfg.stack_channels(1) == 4);
  CHECK(cfg.stack_channels(3) == 12);
}

TEST_CASE("slicing the stack reproduces each feature exactly") {
  ModuloImage y = sample_measurement(1, 4, 77);
  FeatureConfig cfg;
  cfg.use_raw = cfg.use_wrapped_diff = cfg.use_init = true;
  cfg.normalization = FeatureNorm::None;
  FeatureStack fs = build_features(y, cfg);

  REQUIRE(fs.stack.channels == 4);
  REQUIRE(fs.channel_layout == std::vector<std::string>{"raw", "dh", "dv", "init"});

  const WrappedGradient g = wrapped_diff(y);
  const UnwrapSolution x0 = unwrap_exact(y);
  const std::size_t n = y.raster.pixels();
  for (std::size_t k = 0; k < n; ++k) {
    CHECK(fs.stack.plane(0)[k] == y.raster.plane(0)[k]);
    CHECK(fs.stack.plane(1)[k] == g.dh.plane(0)[k]);
    CHECK(fs.stack.plane(2)[k] == g.dv.plane(0)[k]);
    CHECK(fs.stack.plane(3)[k] == x0.image.plane(0)[k]);
  }
}

TEST_CASE("normalization divides every channel by the wrap range") {
  ModuloImage y = sample_measurement(1, 4, 78);
  FeatureConfig plain;
  plain.use_raw = plain.use_wrapped_diff = plain.use_init = true;
  plain.normalization = FeatureNorm::None;
  FeatureConfig norm = plain;
  norm.normalization = FeatureNorm::DivideByWrapRange;

  FeatureStack a = build_features(y, plain);
  FeatureStack b = build_features(y, norm);
  for (std::size_t k = 0; k < a.stack.data.size(); ++k)
    CHECK(b.stack.data[k] == a.stack.data[k] / 16.0);
}

TEST_CASE("init channel carries the zero-mean gauge") {
  ModuloImage y = sample_measurement(3, 8, 79);
  FeatureConfig cfg;
  cfg.use_raw = false;
  cfg.use_init = true;
  FeatureStack fs = build_features(y, cfg);
  REQUIRE(fs.stack.channels == 3);
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (double v : fs.stack.plane(c)) s += v;
    CHECK(std::abs(s / static_cast<double>(fs.stack.pixels())) <= 1e-9);
  }
}

TEST_CASE("three-channel sources interleave per-feature channel tags") {
  ModuloImage y = sample_measurement(3, 4, 80);
  FeatureConfig cfg;
  cfg.use_raw = cfg.use_wrapped_diff = true;
  FeatureStack fs = build_features(y, cfg);
  CHECK(fs.source_channels == 3);
  CHECK(fs.bit_depth == 4);
  CHECK(fs.channel_layout ==
        std::vector<std::string>{"raw_r", "raw_g", "raw_b", "dh_r", "dv_r", "dh_g", "dv_g",
                                 "dh_b", "dv_b"});
}

TEST_CASE("at least one feature must be enabled") {
  ModuloImage y = sample_measurement(1, 4, 81);
  FeatureConfig cfg;
  cfg.use_raw = false;
  CHECK_THROWS_AS(build_features(y, cfg), InvalidArgument);
}

TEST_CASE("the six ablation rows parse and print by name") {
  const std::vector<std::string> names = {"y", "diff", "init", "y+diff", "y+init", "all"};
  const auto rows = table1_configs();
  REQUIRE(rows.size() == names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(feature_config_name(rows[i]) == names[i]);
    CHECK(parse_feature_config(names[i]) == rows[i]);
  }
  CHECK_THROWS_AS(parse_feature_config("raw+diff"), InvalidArgument);
}
