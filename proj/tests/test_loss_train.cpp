#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "modhdr/bench.hpp"
#include "modhdr/loss.hpp"
#include "modhdr/scenes.hpp"
#include "modhdr/train.hpp"

using namespace modhdr;

namespace {

HdrImage toy_scene(std::uint64_t seed, double peak_factor = 1.5, SceneKind kind = SceneKind::GaussianBlobs) {
  SceneSpec spec;
  spec.kind = kind;
  spec.height = 16;
  spec.width = 16;
  spec.channels = 1;
  spec.bit_depth = 4;
  spec.peak_factor = peak_factor;
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST_CASE("loss_rec computes mean and sum squared error") {
  Image a(2, 2, 1), b(2, 2, 1);
  a.data = {1.0, 2.0, 3.0, 4.0};
  b.data = {1.5, 2.0, 3.0, 2.0};  // diffs: 0.5, 0, 0, -2
  CHECK(loss_rec(a, b, LossMode::Sum) == Catch::Approx(4.25).margin(1e-15));
  CHECK(loss_rec(a, b, LossMode::Mean) == Catch::Approx(1.0625).margin(1e-15));
  CHECK(loss_rec(a, a) == 0.0);
  Image c(2, 3, 1);
  CHECK_THROWS_AS(loss_rec(a, c), InvalidArgument);
}

TEST_CASE("loss_eq validates its scale list") {
  HdrImage x = toy_scene(1);
  FeatureConfig cfg;
  ToyRestorer m = ToyRestorer::create(cfg, 1, 4, 8);
  m.init_params(1);
  CHECK_THROWS_AS(loss_eq(x, m, cfg, {}, 4), InvalidArgument);
  CHECK_THROWS_AS(loss_eq(x, m, cfg, {1.0, 0.0}, 4), InvalidArgument);
  CHECK_THROWS_AS(loss_eq(x, m, cfg, {-0.5}, 4), InvalidArgument);
}

TEST_CASE("an exact inverse has zero equivariance loss") {
  // scene that never wraps (peak below 2^b), zero-parameter model with
  // the raw skip: f(wrap(alpha x)) = alpha x exactly for alpha <= 1
  HdrImage x = toy_scene(2, 0.8);
  REQUIRE(x.raster.max_value() < 16.0);
  FeatureConfig cfg;
  ToyRestorer m = ToyRestorer::create(cfg, 1, 4, 8);  // theta all zero
  CHECK(loss_eq(x, m, cfg, {0.5, 0.9, 1.0}, 4) == 0.0);
}

TEST_CASE("alpha of one collapses loss_eq to loss_rec") {
  HdrImage x = toy_scene(3);
  FeatureConfig cfg;
  cfg.use_wrapped_diff = cfg.use_init = true;
  ToyRestorer m = ToyRestorer::create(cfg, 1, 4, 8);
  m.init_params(7);
  const FeatureStack z = build_features(wrap(x, 4), cfg);
  const double rec = loss_rec(x.raster, m.forward(z.stack));
  CHECK(std::abs(loss_eq(x, m, cfg, {1.0}, 4) - rec) <= 1e-12);
}

TEST_CASE("objective report satisfies total = rec + gamma*eq") {
  std::vector<HdrImage> scenes;
  for (int i = 0; i < 3; ++i) scenes.push_back(toy_scene(10 + i));
  std::vector<const HdrImage*> batch;
  for (const auto& s : scenes) batch.push_back(&s);

  FeatureConfig cfg;
  cfg.use_wrapped_diff = true;
  ToyRestorer m = ToyRestorer::create(cfg, 1, 4, 8);
  m.init_params(8);

  TrainConfig tc;
  tc.gamma = 0.37;
  tc.alpha_draws = 2;
  Rng rng(55);
  LossReport rep = total_objective(batch, m, cfg, 4, tc, rng);
  CHECK(rep.rec >= 0.0);
  CHECK(rep.eq >= 0.0);
  CHECK(std::abs(rep.total - (rep.rec + tc.gamma * rep.eq)) <= 1e-12);
  CHECK(rep.alpha_samples.size() == std::size_t(3 * 2));
  for (double a : rep.alpha_samples) {
    CHECK(a >= tc.alpha_lo);
    CHECK(a <= tc.alpha_hi);
  }
}

TEST_CASE("gamma of zero drops the equivariance term entirely") {
  HdrImage x = toy_scene(20);
  std::vector<const HdrImage*> batch = {&x};
  FeatureConfig cfg;
  ToyRestorer m = ToyRestorer::create(cfg, 1, 4, 8);
  m.init_params(9);
  TrainConfig tc;
  tc.gamma = 0.0;
  Rng rng(56);
  LossReport rep = total_objective(batch, m, cfg, 4, tc, rng);
  CHECK(rep.eq == 0.0);
  CHECK(rep.total == rep.rec);
  CHECK(rep.alpha_samples.empty());
}

TEST_CASE("objective gradient decomposes linearly in gamma") {
  std::vector<HdrImage> scenes = {toy_scene(30), toy_scene(31)};
  std::vector<const HdrImage*> batch = {&scenes[0], &scenes[1]};
  FeatureConfig cfg;
  cfg.use_init = true;
  ToyRestorer m = ToyRestorer::create(cfg, 1, 4, 8);
  m.init_params(12);

  auto grad_at = [&](double gamma) {
    TrainConfig tc;
    tc.gamma = gamma;
    Rng rng(57);  // same stream: gamma>0 runs draw identical alphas
    std::vector<double> g(m.param_count(), 0.0);
    total_objective(batch, m, cfg, 4, tc, rng, &g);
    return g;
  };

  const std::vector<double> g0 = grad_at(0.0);
  const std::vector<double> g1 = grad_at(1.0);
  const std::vector<double> gmid = grad_at(0.3);
  for (std::size_t k = 0; k < g0.size(); ++k) {
    const double expect = g0[k] + 0.3 * (g1[k] - g0[k]);
    CHECK(std::abs(gmid[k] - expect) <= 1e-10);
  }
}

TEST_CASE("adam takes the bias-corrected first step") {
  TrainConfig tc;
  tc.lr = 0.05;
  AdamOptimizer opt(2, tc);
  std::vector<double> theta = {1.0, -2.0};
  std::vector<double> grad = {0.4, -0.3};
  opt.step(theta, grad);
  // with t=1 the bias corrections cancel the (1-beta) factors exactly:
  // mhat = g, vhat = g^2, so the step is lr * g / (|g| + eps)
  CHECK(theta[0] == Catch::Approx(1.0 - 0.05 * (0.4 / (0.4 + 1e-8))).epsilon(1e-12));
  CHECK(theta[1] == Catch::Approx(-2.0 + 0.05 * (0.3 / (0.3 + 1e-8))).epsilon(1e-12));
}

TEST_CASE("training overfits a constant scene") {
  // trivial fit: a constant image that wraps, so the model must learn a
  // fixed offset the skip path cannot supply
  Image img(12, 12, 1, 20.5);
  HdrImage x(std::move(img));
  REQUIRE(x.raster.max_value() > 16.0);
  std::vector<HdrImage> dataset;
  dataset.push_back(x);

  FeatureConfig cfg;
  cfg.use_wrapped_diff = true;
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 1;
  tc.seed = 77;
  tc.gamma = 0.0;    // deterministic objective, so the trace shape is Adam's alone
  tc.lr = 1.5e-4;    // converges within the run without bouncing at the floor
  TrainResult res = train(dataset, cfg, 4, tc);

  REQUIRE(res.trace.size() == 200);
  const double initial = res.trace.front().rec;
  const double final_rec = res.trace.back().rec;
  REQUIRE(initial > 0.0);
  CHECK(final_rec < 0.01 * initial);

  // Adam noise allowance: after epoch 10 the total trace is
  // non-increasing in at least 95% of steps
  int down = 0, count = 0;
  for (std::size_t i = 10; i + 1 < res.trace.size(); ++i) {
    ++count;
    if (res.trace[i + 1].total <= res.trace[i].total) ++down;
  }
  CHECK(down >= static_cast<int>(0.95 * count));
}

TEST_CASE("training reruns bit-identically") {
  std::vector<HdrImage> dataset;
  for (int i = 0; i < 5; ++i) dataset.push_back(toy_scene(50 + i));
  FeatureConfig cfg;
  TrainConfig tc;
  tc.epochs = 8;
  tc.batch_size = 2;
  tc.seed = 123;
  TrainResult a = train(dataset, cfg, 4, tc);
  TrainResult b = train(dataset, cfg, 4, tc);
  CHECK(a.model.theta == b.model.theta);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].rec == b.trace[i].rec);
    CHECK(a.trace[i].eq == b.trace[i].eq);
    CHECK(a.trace[i].total == b.trace[i].total);
  }
}

TEST_CASE("divergence aborts with the epoch index") {
  std::vector<HdrImage> dataset = {toy_scene(60)};
  FeatureConfig cfg;
  TrainConfig tc;
  tc.epochs = 50;
  tc.lr = 1e160;  // one step throws every parameter to ~1e160, overflowing the next loss
  bool thrown = false;
  try {
    train(dataset, cfg, 4, tc);
  } catch (const DivergenceError& e) {
    thrown = true;
    CHECK(e.epoch >= 1);
    CHECK(std::string(e.what()).find(std::to_string(e.epoch)) != std::string::npos);
  }
  CHECK(thrown);
}

TEST_CASE("train validates its dataset") {
  FeatureConfig cfg;
  TrainConfig tc;
  CHECK_THROWS_AS(train({}, cfg, 4, tc), InvalidArgument);

  SceneSpec spec3;
  spec3.kind = SceneKind::Ramp;
  spec3.height = spec3.width = 16;
  spec3.channels = 3;
  spec3.bit_depth = 4;
  spec3.peak_factor = 1.5;
  std::vector<HdrImage> mixed;
  mixed.push_back(toy_scene(61));
  mixed.push_back(generate(spec3));
  CHECK_THROWS_AS(train(mixed, cfg, 4, tc), InvalidArgument);
}

TEST_CASE("checkpoints round-trip every field") {
  FeatureConfig cfg;
  cfg.use_wrapped_diff = cfg.use_init = true;
  cfg.normalization = FeatureNorm::None;
  ToyRestorer m = ToyRestorer::create(cfg, 3, 6, 5);
  m.init_params(31);
  TrainConfig tc;
  tc.gamma = 0.25;
  tc.alpha_lo = 0.8;
  tc.alpha_hi = 1.25;
  tc.lr = 5e-4;
  tc.batch_size = 3;
  tc.epochs = 17;
  tc.seed = 999;
  tc.alpha_draws = 2;
  tc.loss_mode = LossMode::Sum;
  tc.eq_supervise_scaled_pred = true;

  const std::string path = "ckpt_roundtrip.bin";
  save_checkpoint(path, m, cfg, tc, 6);
  Checkpoint ck = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(ck.bit_depth == 6);
  CHECK(ck.model.in_channels == m.in_channels);
  CHECK(ck.model.hidden == m.hidden);
  CHECK(ck.model.out_channels == m.out_channels);
  CHECK(ck.model.skip_channels == m.skip_channels);
  CHECK(ck.model.output_scale == m.output_scale);
  CHECK(ck.model.theta == m.theta);
  CHECK(ck.features == cfg);
  CHECK(ck.train_config.gamma == tc.gamma);
  CHECK(ck.train_config.alpha_lo == tc.alpha_lo);
  CHECK(ck.train_config.alpha_hi == tc.alpha_hi);
  CHECK(ck.train_config.lr == tc.lr);
  CHECK(ck.train_config.batch_size == tc.batch_size);
  CHECK(ck.train_config.epochs == tc.epochs);
  CHECK(ck.train_config.seed == tc.seed);
  CHECK(ck.train_config.alpha_draws == tc.alpha_draws);
  CHECK(ck.train_config.loss_mode == tc.loss_mode);
  CHECK(ck.train_config.eq_supervise_scaled_pred == tc.eq_supervise_scaled_pred);
}

TEST_CASE("checkpoint loading rejects damaged files") {
  FeatureConfig cfg;
  ToyRestorer m = ToyRestorer::create(cfg, 1, 4, 4);
  m.init_params(32);
  TrainConfig tc;
  const std::string good = "ckpt_good.bin";
  save_checkpoint(good, m, cfg, tc, 4);

  SECTION("missing file") {
    CHECK_THROWS_AS(load_checkpoint("ckpt_does_not_exist.bin"), IoError);
  }
  SECTION("wrong format tag") {
    std::ofstream f("ckpt_bad_format.bin", std::ios::binary);
    f << R"({"format":"something-else"})" << '\n';
    f.close();
    CHECK_THROWS_AS(load_checkpoint("ckpt_bad_format.bin"), InvalidArgument);
    std::remove("ckpt_bad_format.bin");
  }
  SECTION("header is not JSON") {
    std::ofstream f("ckpt_bad_json.bin", std::ios::binary);
    f << "not json at all\n";
    f.close();
    CHECK_THROWS_AS(load_checkpoint("ckpt_bad_json.bin"), IoError);
    std::remove("ckpt_bad_json.bin");
  }
  SECTION("truncated parameter blob") {
    std::ifstream in(good, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream f("ckpt_trunc.bin", std::ios::binary);
    f.write(all.data(), static_cast<std::streamsize>(all.size() - 16));
    f.close();
    CHECK_THROWS_AS(load_checkpoint("ckpt_trunc.bin"), IoError);
    std::remove("ckpt_trunc.bin");
  }
  SECTION("parameter count disagrees with architecture") {
    std::ifstream in(good, std::ios::binary);
    std::string line;
    std::getline(in, line);
    in.close();
    nlohmann::json header = nlohmann::json::parse(line);
    header["param_count"] = header["param_count"].get<std::size_t>() + 1;
    std::ofstream f("ckpt_count.bin", std::ios::binary);
    f << header.dump() << '\n';
    f.close();
    CHECK_THROWS_AS(load_checkpoint("ckpt_count.bin"), InvalidArgument);
    std::remove("ckpt_count.bin");
  }
  std::remove(good.c_str());
}

TEST_CASE("loss trace serializes as CSV with full precision") {
  std::vector<EpochLoss> trace = {{0, 1.5, 0.25, 1.525},
                                  {1, 0.1234567890123456789, 0.0, 0.1234567890123456789}};
  const std::string path = "trace_test.csv";
  save_loss_trace(path, trace);
  std::ifstream f(path);
  std::string header, row0, row1;
  std::getline(f, header);
  std::getline(f, row0);
  std::getline(f, row1);
  f.close();
  std::remove(path.c_str());
  CHECK(header == "epoch,rec,eq,total");
  CHECK(row0 == "0,1.5,0.25,1.5249999999999999");
  // value survives a text round trip exactly
  const std::string v = row1.substr(2, row1.find(',', 2) - 2);
  CHECK(std::stod(v) == 0.1234567890123456789);
}
