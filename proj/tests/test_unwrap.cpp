#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "modhdr/rng.hpp"
#include "modhdr/scenes.hpp"
#include "modhdr/unwrap.hpp"
#include "modhdr/unwrap_oracle.hpp"

using namespace modhdr;

namespace {

double mean_of(const Image& img, int c) {
  double s = 0.0;
  for (double v : img.plane(c)) s += v;
  return s / (static_cast<double>(img.height) * img.width);
}

WrappedGradient random_gradient(Rng& rng, int h, int w, int bit_depth) {
  WrappedGradient g;
  g.bit_depth = bit_depth;
  g.dh = Image(h, w, 1);
  g.dv = Image(h, w, 1);
  const double half = g.half_range();
  for (int i = 0; i < h; ++i)
    for (int j = 0; j + 1 < w; ++j) g.dh.at(0, i, j) = rng.uniform(-half, half);
  for (int i = 0; i + 1 < h; ++i)
    for (int j = 0; j < w; ++j) g.dv.at(0, i, j) = rng.uniform(-half, half);
  return g;
}

}  // namespace

TEST_CASE("dct2/idct2 are orthonormal inverses") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 3 + trial * 2, n = 4 + trial;
    std::vector<double> src(static_cast<std::size_t>(m) * n);
    for (double& v : src) v = rng.uniform(-5.0, 5.0);
    std::vector<double> back = idct2(dct2(src, m, n), m, n);
    for (std::size_t k = 0; k < src.size(); ++k)
      CHECK(std::abs(back[k] - src[k]) <= 1e-12);
  }
}

TEST_CASE("ramp on 4x4 recovers ramp minus its mean") {
  Image img(4, 4, 1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) img.at(0, i, j) = 0.5 * (i + j);
  HdrImage x(std::move(img));
  for (int b : {2, 4, 8}) {
    REQUIRE(itoh_satisfied(x, b).satisfied);
    UnwrapSolution sol = unwrap_exact(wrap(x, b));
    const double xm = mean_of(x.raster, 0);
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        worst = std::max(worst, std::abs(sol.image.at(0, i, j) - (x.raster.at(0, i, j) - xm)));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("Itoh-compliant scenes unwrap exactly up to the gauge") {
  for (int trial = 0; trial < 25; ++trial) {
    SceneSpec spec;
    spec.kind = static_cast<SceneKind>(trial % 5);
    spec.height = 10 + (trial % 4) * 7;
    spec.width = 33 - (trial % 5) * 5;
    spec.channels = trial % 4 == 0 ? 3 : 1;
    spec.bit_depth = trial % 2 ? 4 : 8;
    spec.peak_factor = 2.0;
    spec.seed = 700 + trial;
    spec.itoh_mode = ItohMode::Enforce;
    HdrImage x = generate(spec);

    UnwrapSolution sol = unwrap_exact(wrap(x, spec.bit_depth));
    double worst = 0.0;
    for (int c = 0; c < x.raster.channels; ++c) {
      const double shift = mean_of(x.raster, c) - mean_of(sol.image, c);
      for (int i = 0; i < x.raster.height; ++i)
        for (int j = 0; j < x.raster.width; ++j)
          worst = std::max(worst,
                           std::abs(sol.image.at(c, i, j) + shift - x.raster.at(c, i, j)));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("smooth ramp crossing the wrap threshold leaves no seam") {
  // values rise well past 2^b, so the measurement has a wrap boundary
  Image img(8, 8, 1);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) img.at(0, i, j) = 1.7 * (i + j);
  HdrImage x(std::move(img));
  const int b = 4;
  REQUIRE(x.raster.max_value() > 16.0);
  REQUIRE(itoh_satisfied(x, b).satisfied);
  UnwrapSolution sol = unwrap_exact(wrap(x, b));
  CHECK(sol.residual_norm <= 1e-8);
  // reconstruction is the ramp again: all horizontal steps equal 1.7
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j + 1 < 8; ++j)
      CHECK(std::abs(sol.image.at(0, i, j + 1) - sol.image.at(0, i, j) - 1.7) <= 1e-8);
}

TEST_CASE("zero-mean gauge holds per channel") {
  Rng rng(31);
  WrappedGradient g = random_gradient(rng, 12, 9, 4);
  UnwrapSolution sol = solve_dct(g);
  CHECK(std::abs(mean_of(sol.image, 0)) <= 1e-9);
}

TEST_CASE("anchor gauges pin the first pixel") {
  Rng rng(33);
  WrappedGradient g = random_gradient(rng, 7, 7, 4);
  UnwrapSolution a = solve_dct(g, Gauge::AnchorFirstPixel);
  CHECK(a.image.at(0, 0, 0) == 0.0);
  UnwrapSolution b = solve_dct(g, Gauge::AnchorToValue, 3.25);
  CHECK(std::abs(b.image.at(0, 0, 0) - 3.25) <= 1e-12);
}

TEST_CASE("residual_norm is gauge-invariant") {
  Rng rng(35);
  WrappedGradient g = random_gradient(rng, 9, 11, 8);
  const double r0 = solve_dct(g, Gauge::ZeroMean).residual_norm;
  const double r1 = solve_dct(g, Gauge::AnchorFirstPixel).residual_norm;
  const double r2 = solve_dct(g, Gauge::AnchorToValue, 5.0).residual_norm;
  CHECK(std::abs(r0 - r1) <= 1e-12);
  CHECK(std::abs(r0 - r2) <= 1e-12);
}

TEST_CASE("solver is linear in the gradient field") {
  Rng rng(37);
  WrappedGradient g = random_gradient(rng, 8, 8, 4);
  WrappedGradient gc = g;
  const double c = 2.75;
  for (double& v : gc.dh.data) v *= c;
  for (double& v : gc.dv.data) v *= c;
  Image a = solve_dct(g).image;
  Image b = solve_dct(gc).image;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    num += (b.data[k] - c * a.data[k]) * (b.data[k] - c * a.data[k]);
    den += (c * a.data[k]) * (c * a.data[k]);
  }
  CHECK(std::sqrt(num) <= 1e-10 * std::sqrt(den));
}

TEST_CASE("solve_dct matches the dense oracle on Itoh-violating inputs") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int side = trial % 2 ? 6 : 8;
    WrappedGradient g = random_gradient(rng, side, side, 4);
    Image fast = solve_dct(g).image;
    Image slow = solve_dense_oracle(g).image;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < fast.data.size(); ++k) {
      num += (fast.data[k] - slow.data[k]) * (fast.data[k] - slow.data[k]);
      den += slow.data[k] * slow.data[k];
    }
    REQUIRE(den > 0.0);
    CHECK(std::sqrt(num / den) <= 1e-8);
  }
}

TEST_CASE("solver rejects degenerate inputs") {
  WrappedGradient g;
  g.bit_depth = 4;
  g.dh = Image(1, 5, 1);
  g.dv = Image(1, 5, 1);
  CHECK_THROWS_AS(solve_dct(g), InvalidArgument);

  WrappedGradient h;
  h.bit_depth = 4;
  h.dh = Image(4, 5, 1);
  h.dv = Image(5, 4, 1);
  CHECK_THROWS_AS(solve_dct(h), InvalidArgument);
}
