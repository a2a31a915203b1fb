#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "modhdr/rng.hpp"
#include "modhdr/scenes.hpp"
#include "modhdr/sensor.hpp"

using namespace modhdr;

namespace {

HdrImage random_hdr(Rng& rng, int h, int w, int c, double peak) {
  Image img(h, w, c);
  for (double& v : img.data) v = rng.uniform(0.0, peak);
  return HdrImage(std::move(img));
}

}  // namespace

TEST_CASE("wrap_value is the exact remainder") {
  CHECK(wrap_value(17.25, 16.0) == 1.25);
  CHECK(wrap_value(16.0, 16.0) == 0.0);
  CHECK(wrap_value(15.9999, 16.0) == 15.9999);
  CHECK(wrap_value(48.5, 16.0) == 0.5);
  CHECK(wrap_value(0.0, 16.0) == 0.0);
}

TEST_CASE("wrap_centered re-centers into the half-open band") {
  const double range = 16.0;
  CHECK(wrap_centered(7.9, range) == 7.9);
  CHECK(wrap_centered(-7.9, range) == -7.9);
  CHECK(wrap_centered(8.1, range) == Catch::Approx(-7.9).margin(1e-12));
  CHECK(wrap_centered(-8.1, range) == Catch::Approx(7.9).margin(1e-12));
  CHECK(wrap_centered(16.0, range) == 0.0);
  CHECK(wrap_centered(-16.0, range) == 0.0);
  // ties at exactly half range round away from zero
  CHECK(wrap_centered(8.0, range) == -8.0);
  CHECK(wrap_centered(-8.0, range) == 8.0);
}

TEST_CASE("wrap stays in [0, 2^b) and is idempotent") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int b = 2 + 3 * (trial % 3);
    const double range = std::ldexp(1.0, b);
    HdrImage x = random_hdr(rng, 9, 13, trial % 2 ? 3 : 1, 5.0 * range);
    ModuloImage y = wrap(x, b);
    for (double v : y.raster.data) {
      CHECK(v >= 0.0);
      CHECK(v < range);
    }
    // wrapping an already-wrapped image changes nothing, bit for bit
    ModuloImage y2 = wrap(HdrImage(y.raster), b);
    CHECK(y2.raster.data == y.raster.data);
  }
}

TEST_CASE("wrap with quantize floors to integer codes") {
  Image img(2, 2, 1);
  img.data = {3.7, 15.2, 16.0, 31.9};
  ModuloImage y = wrap(HdrImage(std::move(img)), 4, true);
  CHECK(y.raster.data == std::vector<double>{3.0, 15.0, 0.0, 15.0});
}

TEST_CASE("wrap rejects bad inputs") {
  Image img(2, 2, 1);
  img.data = {0.0, 1.0, 2.0, 3.0};
  HdrImage x{Image(img)};
  CHECK_THROWS_AS(wrap(x, 0), InvalidArgument);
  CHECK_THROWS_AS(HdrImage(Image(0, 2, 1)), InvalidArgument);
}

TEST_CASE("ModuloImage validates its domain") {
  Image img(2, 2, 1);
  img.data = {0.0, 1.0, 15.999, 16.0};  // 16.0 is out of [0, 2^4)
  CHECK_THROWS_AS(ModuloImage(std::move(img), 4), InvalidArgument);
}

TEST_CASE("wrapped_diff equals true differences under Itoh") {
  // property: for Itoh-compliant scenes the wrapped differences of the
  // measurement reproduce the true forward differences
  for (int trial = 0; trial < 30; ++trial) {
    SceneSpec spec;
    spec.kind = static_cast<SceneKind>(trial % 5);
    spec.height = 12;
    spec.width = 17;
    spec.channels = trial % 3 == 0 ? 3 : 1;
    spec.bit_depth = 2 + (trial % 3) * 3;  // 2, 5, 8
    spec.peak_factor = 2.5;
    spec.seed = 400 + trial;
    spec.itoh_mode = ItohMode::Enforce;
    HdrImage x = generate(spec);
    REQUIRE(itoh_satisfied(x, spec.bit_depth).satisfied);

    ModuloImage y = wrap(x, spec.bit_depth);
    WrappedGradient g = wrapped_diff(y);
    const Image& r = x.raster;
    double worst = 0.0;
    for (int c = 0; c < r.channels; ++c) {
      for (int i = 0; i < r.height; ++i)
        for (int j = 0; j + 1 < r.width; ++j)
          worst = std::max(worst,
                           std::abs(g.dh.at(c, i, j) - (r.at(c, i, j + 1) - r.at(c, i, j))));
      for (int i = 0; i + 1 < r.height; ++i)
        for (int j = 0; j < r.width; ++j)
          worst = std::max(worst,
                           std::abs(g.dv.at(c, i, j) - (r.at(c, i + 1, j) - r.at(c, i, j))));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("wrapped_diff pads the trailing column and row with zeros") {
  Rng rng(5);
  HdrImage x = random_hdr(rng, 6, 7, 1, 60.0);
  WrappedGradient g = wrapped_diff(wrap(x, 4));
  for (int i = 0; i < 6; ++i) CHECK(g.dh.at(0, i, 6) == 0.0);
  for (int j = 0; j < 7; ++j) CHECK(g.dv.at(0, 5, j) == 0.0);
  CHECK(g.half_range() == 8.0);
}

TEST_CASE("itoh_satisfied reports violation coordinates") {
  Image img(3, 3, 1);
  img.data = {0, 0, 0, 0, 9, 0, 0, 0, 0};  // center jump of 9 > 2^4/2
  HdrImage x(std::move(img));
  ItohReport rep = itoh_satisfied(x, 4);
  CHECK_FALSE(rep.satisfied);
  REQUIRE_FALSE(rep.violations.empty());
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.row == 1 && v.col == 0 && v.axis == 'h' && v.magnitude == 9.0) found = true;
  CHECK(found);
  CHECK(itoh_satisfied(x, 8).satisfied);  // half range 128 clears a jump of 9
}

TEST_CASE("scale transform multiplies and validates") {
  Rng rng(3);
  HdrImage x = random_hdr(rng, 4, 4, 1, 10.0);
  HdrImage s = scale(x, ScaleTransform{2.0});
  for (std::size_t k = 0; k < x.raster.data.size(); ++k)
    CHECK(s.raster.data[k] == 2.0 * x.raster.data[k]);
  CHECK_THROWS_AS(ScaleTransform{0.0}, InvalidArgument);
  CHECK_THROWS_AS(ScaleTransform{-1.0}, InvalidArgument);
}
