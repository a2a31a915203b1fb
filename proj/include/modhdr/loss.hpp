#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "modhdr/features.hpp"
#include "modhdr/image.hpp"
#include "modhdr/restorer.hpp"
#include "modhdr/rng.hpp"
#include "modhdr/sensor.hpp"

namespace modhdr {

/// Mean keeps the objective resolution-independent (default); Sum is the
/// plain squared L2 norm.
enum class LossMode { Mean, Sum };

struct TrainConfig {
  double gamma = 0.1;       // weight of the equivariance term
  double alpha_lo = 0.9;    // exposure-scale range U(alpha_lo, alpha_hi)
  double alpha_hi = 1.1;
  double lr = 1e-3;
  int batch_size = 8;
  int epochs = 500;
  std::uint64_t seed = 0;
  int alpha_draws = 1;      // fresh alpha draws per sample per step
  LossMode loss_mode = LossMode::Mean;
  // Experimental: supervise f(wrap(alpha*x)) against alpha*f(wrap(x))
  // (held constant) instead of against alpha*x.
  bool eq_supervise_scaled_pred = false;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (!(alpha_lo > 0.0) || !(alpha_hi >= alpha_lo))
      throw InvalidArgument("TrainConfig: require 0 < alpha_lo <= alpha_hi");
    if (!(gamma >= 0.0)) throw InvalidArgument("TrainConfig: gamma must be >= 0");
    if (!(lr > 0.0)) throw InvalidArgument("TrainConfig: lr must be > 0");
    if (batch_size < 1) throw InvalidArgument("TrainConfig: batch_size must be >= 1");
    if (epochs < 0) throw InvalidArgument("TrainConfig: epochs must be >= 0");
    if (alpha_draws < 1) throw InvalidArgument("TrainConfig: alpha_draws must be >= 1");
  }
};

struct LossReport {
  double rec = 0.0;
  double eq = 0.0;
  double total = 0.0;
  std::vector<double> alpha_samples;
};

/// Squared-error data term between a target and a prediction.
inline double loss_rec(const Image& x, const Image& xhat, LossMode mode = LossMode::Mean) {
  if (!x.same_shape(xhat)) throw InvalidArgument("loss_rec: shape mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    const double d = xhat.data[k] - x.data[k];
    acc += d * d;
  }
  return mode == LossMode::Mean ? acc / static_cast<double>(x.data.size()) : acc;
}

inline double loss_rec(const HdrImage& x, const HdrImage& xhat, LossMode mode = LossMode::Mean) {
  return loss_rec(x.raster, xhat.raster, mode);
}

namespace detail {

// d loss_rec / d xhat, scaled by `weight`.
inline Image loss_rec_grad(const Image& x, const Image& xhat, LossMode mode, double weight) {
  Image g(x.height, x.width, x.channels);
  const double s =
      mode == LossMode::Mean ? 2.0 * weight / static_cast<double>(x.data.size()) : 2.0 * weight;
  for (std::size_t k = 0; k < x.data.size(); ++k) g.data[k] = s * (xhat.data[k] - x.data[k]);
  return g;
}

}  // namespace detail

/// Equivariance penalty for a fixed list of exposure scales: for each
/// alpha, re-expose the scene, re-wrap, rebuild features, and penalize
/// the distance between the prediction and the scaled scene.
inline double loss_eq(const HdrImage& x, const ToyRestorer& model, const FeatureConfig& cfg,
                      const std::vector<double>& alphas, int bit_depth,
                      LossMode mode = LossMode::Mean) {
  if (alphas.empty()) throw InvalidArgument("loss_eq: alphas must be non-empty");
  double acc = 0.0;
  for (double alpha : alphas) {
    if (!(alpha > 0.0)) throw InvalidArgument("loss_eq: alphas must be positive");
    const HdrImage xs = scale(x, ScaleTransform{alpha});
    const ModuloImage ys = wrap(xs, bit_depth);
    const FeatureStack zs = build_features(ys, cfg);
    const Image xhat = model.forward(zs.stack);
    acc += loss_rec(xs.raster, xhat, mode);
  }
  return acc / static_cast<double>(alphas.size());
}

/// Monte-Carlo estimate of the full objective over a batch, and (when
/// `grad` is non-null) its reverse-mode gradient with respect to theta.
/// `grad` must be zero-filled by the caller if a fresh gradient is
/// wanted; contributions accumulate.
inline LossReport total_objective(const std::vector<const HdrImage*>& batch,
                                  const ToyRestorer& model, const FeatureConfig& cfg,
                                  int bit_depth, const TrainConfig& tc, Rng& rng,
                                  std::vector<double>* grad = nullptr) {
  if (batch.empty()) throw InvalidArgument("total_objective: batch must be non-empty");
  tc.validate();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double inv_k = 1.0 / static_cast<double>(tc.alpha_draws);

  LossReport report;
  ForwardCache cache;
  for (const HdrImage* xp : batch) {
    const HdrImage& x = *xp;
    const ModuloImage y = wrap(x, bit_depth);
    const FeatureStack z = build_features(y, cfg);
    const Image xhat = model.forward_recorded(z.stack, cache);
    report.rec += inv_b * loss_rec(x.raster, xhat, tc.loss_mode);
    if (grad)
      model.backward(cache, detail::loss_rec_grad(x.raster, xhat, tc.loss_mode, inv_b), *grad);

    // gamma == 0 drops the equivariance term from the objective, so the
    // scaled passes (and their alpha draws) are skipped outright.
    if (tc.gamma == 0.0) continue;
    for (int k = 0; k < tc.alpha_draws; ++k) {
      const double alpha = rng.uniform(tc.alpha_lo, tc.alpha_hi);
      report.alpha_samples.push_back(alpha);
      const HdrImage xs = scale(x, ScaleTransform{alpha});
      const ModuloImage ys = wrap(xs, bit_depth);
      const FeatureStack zs = build_features(ys, cfg);
      const Image xhat_s = model.forward_recorded(zs.stack, cache);
      Image target = xs.raster;
      if (tc.eq_supervise_scaled_pred) {
        // constant target: the scaled prediction on the unscaled input
        target = xhat;
        for (double& v : target.data) v *= alpha;
      }
      report.eq += inv_b * inv_k * loss_rec(target, xhat_s, tc.loss_mode);
      if (grad)
        model.backward(
            cache,
            detail::loss_rec_grad(target, xhat_s, tc.loss_mode, tc.gamma * inv_b * inv_k), *grad);
    }
  }
  report.total = report.rec + tc.gamma * report.eq;
  return report;
}

}  // namespace modhdr
