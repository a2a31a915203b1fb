#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modhdr/loss.hpp"
#include "modhdr/restorer.hpp"

namespace modhdr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian float64");

/// Training aborted because the loss left the finite range.
class DivergenceError : public NumericError {
 public:
  int epoch;
  explicit DivergenceError(int e)
      : NumericError("training diverged at epoch " + std::to_string(e)), epoch(e) {}
};

struct AdamOptimizer {
  double lr, beta1, beta2, eps;
  std::vector<double> m, v;
  long t = 0;

  AdamOptimizer(std::size_t n, const TrainConfig& tc)
      : lr(tc.lr), beta1(tc.adam_beta1), beta2(tc.adam_beta2), eps(tc.adam_eps),
        m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& grad) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

struct EpochLoss {
  int epoch;
  double rec, eq, total;
};

struct TrainResult {
  ToyRestorer model;
  std::vector<EpochLoss> trace;
};

/// Minimize the objective with Adam. Fully deterministic for a fixed
/// config: parameter init consumes Rng(seed), the shuffle/alpha stream
/// is Rng::stream(seed, 1).
inline TrainResult train(const std::vector<HdrImage>& dataset, const FeatureConfig& cfg,
                         int bit_depth, const TrainConfig& tc, int hidden = 8) {
  tc.validate();
  if (dataset.empty()) throw InvalidArgument("train: dataset must be non-empty");
  const int channels = dataset.front().raster.channels;
  for (const auto& x : dataset)
    if (x.raster.channels != channels)
      throw InvalidArgument("train: dataset mixes channel counts");

  TrainResult out;
  out.model = ToyRestorer::create(cfg, channels, bit_depth, hidden);
  out.model.init_params(tc.seed);
  Rng rng = Rng::stream(tc.seed, 1);
  AdamOptimizer opt(out.model.theta.size(), tc);

  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<double> grad(out.model.theta.size());
  const double n = static_cast<double>(dataset.size());

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double ep_rec = 0.0, ep_eq = 0.0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      std::vector<const HdrImage*> batch;
      for (std::size_t k = start; k < order.size() && k < start + tc.batch_size; ++k)
        batch.push_back(&dataset[order[k]]);
      grad.assign(grad.size(), 0.0);
      const LossReport rep = total_objective(batch, out.model, cfg, bit_depth, tc, rng, &grad);
      if (!std::isfinite(rep.total)) throw DivergenceError(epoch);
      opt.step(out.model.theta, grad);
      const double w = static_cast<double>(batch.size()) / n;
      ep_rec += w * rep.rec;
      ep_eq += w * rep.eq;
    }
    out.trace.push_back({epoch, ep_rec, ep_eq, ep_rec + tc.gamma * ep_eq});
  }
  return out;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const FeatureConfig& cfg) {
  return {{"use_raw", cfg.use_raw},
          {"use_wrapped_diff", cfg.use_wrapped_diff},
          {"use_init", cfg.use_init},
          {"normalization",
           cfg.normalization == FeatureNorm::DivideByWrapRange ? "divide_by_wrap_range" : "none"}};
}

inline FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  FeatureConfig cfg;
  cfg.use_raw = j.at("use_raw").get<bool>();
  cfg.use_wrapped_diff = j.at("use_wrapped_diff").get<bool>();
  cfg.use_init = j.at("use_init").get<bool>();
  const std::string norm = j.at("normalization").get<std::string>();
  if (norm == "divide_by_wrap_range")
    cfg.normalization = FeatureNorm::DivideByWrapRange;
  else if (norm == "none")
    cfg.normalization = FeatureNorm::None;
  else
    throw InvalidArgument("unknown feature normalization: " + norm);
  return cfg;
}

inline nlohmann::json to_json(const TrainConfig& tc) {
  return {{"gamma", tc.gamma},
          {"alpha_lo", tc.alpha_lo},
          {"alpha_hi", tc.alpha_hi},
          {"lr", tc.lr},
          {"batch_size", tc.batch_size},
          {"epochs", tc.epochs},
          {"seed", tc.seed},
          {"alpha_draws", tc.alpha_draws},
          {"loss_mode", tc.loss_mode == LossMode::Mean ? "mean" : "sum"},
          {"eq_supervise_scaled_pred", tc.eq_supervise_scaled_pred},
          {"adam_beta1", tc.adam_beta1},
          {"adam_beta2", tc.adam_beta2},
          {"adam_eps", tc.adam_eps}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig tc;
  tc.gamma = j.at("gamma").get<double>();
  tc.alpha_lo = j.at("alpha_lo").get<double>();
  tc.alpha_hi = j.at("alpha_hi").get<double>();
  tc.lr = j.at("lr").get<double>();
  tc.batch_size = j.at("batch_size").get<int>();
  tc.epochs = j.at("epochs").get<int>();
  tc.seed = j.at("seed").get<std::uint64_t>();
  tc.alpha_draws = j.at("alpha_draws").get<int>();
  const std::string mode = j.at("loss_mode").get<std::string>();
  if (mode == "mean")
    tc.loss_mode = LossMode::Mean;
  else if (mode == "sum")
    tc.loss_mode = LossMode::Sum;
  else
    throw InvalidArgument("unknown loss mode: " + mode);
  tc.eq_supervise_scaled_pred = j.at("eq_supervise_scaled_pred").get<bool>();
  tc.adam_beta1 = j.at("adam_beta1").get<double>();
  tc.adam_beta2 = j.at("adam_beta2").get<double>();
  tc.adam_eps = j.at("adam_eps").get<double>();
  return tc;
}

struct Checkpoint {
  ToyRestorer model;
  FeatureConfig features;
  TrainConfig train_config;
  int bit_depth = 8;
};

/// Checkpoint file = one-line JSON header + '\n' + little-endian float64
/// parameter blob.
inline void save_checkpoint(const std::string& path, const ToyRestorer& model,
                            const FeatureConfig& cfg, const TrainConfig& tc, int bit_depth) {
  nlohmann::json header = {{"format", "modhdr-checkpoint"},
                           {"version", 1},
                           {"bit_depth", bit_depth},
                           {"arch",
                            {{"in_channels", model.in_channels},
                             {"hidden", model.hidden},
                             {"out_channels", model.out_channels},
                             {"skip_channels", model.skip_channels},
                             {"output_scale", model.output_scale}}},
                           {"features", to_json(cfg)},
                           {"train", to_json(tc)},
                           {"param_count", model.theta.size()}};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f << header.dump() << '\n';
  f.write(reinterpret_cast<const char*>(model.theta.data()),
          static_cast<std::streamsize>(model.theta.size() * sizeof(double)));
  if (!f) throw IoError("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("checkpoint missing header line: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }
  if (header.value("format", "") != "modhdr-checkpoint")
    throw InvalidArgument("not a checkpoint file: " + path);

  Checkpoint ck;
  ck.bit_depth = header.at("bit_depth").get<int>();
  ck.features = feature_config_from_json(header.at("features"));
  ck.train_config = train_config_from_json(header.at("train"));
  const auto& arch = header.at("arch");
  ck.model.in_channels = arch.at("in_channels").get<int>();
  ck.model.hidden = arch.at("hidden").get<int>();
  ck.model.out_channels = arch.at("out_channels").get<int>();
  ck.model.skip_channels = arch.at("skip_channels").get<std::vector<int>>();
  ck.model.output_scale = arch.at("output_scale").get<double>();
  const auto n = header.at("param_count").get<std::size_t>();
  if (n != ck.model.param_count())
    throw InvalidArgument("checkpoint parameter count does not match architecture");
  ck.model.theta.resize(n);
  f.read(reinterpret_cast<char*>(ck.model.theta.data()),
         static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(f.gcount()) != n * sizeof(double))
    throw IoError("checkpoint blob truncated: " + path);
  return ck;
}

inline void save_loss_trace(const std::string& path, const std::vector<EpochLoss>& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open loss trace for writing: " + path);
  f << "epoch,rec,eq,total\n" << std::setprecision(17);
  for (const auto& e : trace) f << e.epoch << ',' << e.rec << ',' << e.eq << ',' << e.total << '\n';
  if (!f) throw IoError("failed writing loss trace: " + path);
}

}  // namespace modhdr
