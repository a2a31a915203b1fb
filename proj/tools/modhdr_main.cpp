// modhdr command-line tool: dataset generation, sensor simulation,
// classical unwrapping, feature dumps, training, evaluation, and the
// ablation benchmark. Every run writes a resolved-config JSON next to
// its outputs so any result can be reproduced from that file alone.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error,
// 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modhdr/modhdr.hpp"

namespace {

using nlohmann::ordered_json;

enum class LogLevel { Trace = 0, Debug = 1, Info = 2, Warn = 3, Error = 4 };

LogLevel g_log_level = LogLevel::Info;

LogLevel parse_log_level(const std::string& s) {
  if (s == "trace") return LogLevel::Trace;
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  if (s == "warn") return LogLevel::Warn;
  if (s == "error") return LogLevel::Error;
  throw modhdr::InvalidArgument("unknown log level: " + s);
}

void log_msg(LogLevel lvl, const std::string& msg) {
  static const char* names[] = {"trace", "debug", "info", "warn", "error"};
  if (lvl >= g_log_level)
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
}

struct Globals {
  unsigned long long seed = 0;
  int threads = 1;
  std::string out_dir = ".";
  std::string log_level = "info";
};

void add_globals(CLI::App* cmd, Globals& g) {
  cmd->add_option("--seed", g.seed, "global RNG seed")->capture_default_str();
  cmd->add_option("--threads", g.threads, "threads for batch work (scene generation)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out-dir", g.out_dir, "directory for outputs")->capture_default_str();
  cmd->add_option("--log-level", g.log_level, "trace|debug|info|warn|error")
      ->capture_default_str();
}

void apply_globals(const Globals& g) {
  g_log_level = parse_log_level(g.log_level);
  std::error_code ec;
  std::filesystem::create_directories(g.out_dir, ec);
  if (ec) throw modhdr::IoError("cannot create out-dir: " + g.out_dir + " (" + ec.message() + ")");
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

ordered_json globals_json(const Globals& g) {
  return {{"seed", g.seed}, {"threads", g.threads}, {"out_dir", g.out_dir},
          {"log_level", g.log_level}};
}

void write_resolved_config(const Globals& g, const std::string& name, ordered_json body) {
  body["global"] = globals_json(g);
  const std::string path = join(g.out_dir, name + "_config.json");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw modhdr::IoError("cannot write resolved config: " + path);
  f << body.dump(2) << '\n';
  if (!f) throw modhdr::IoError("failed writing resolved config: " + path);
  log_msg(LogLevel::Debug, "resolved config written to " + path);
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
  std::uint64_t state = global_seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  return modhdr::splitmix64(state);
}

std::string fmt_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

modhdr::FeatureNorm parse_norm_flag(const std::string& s) {
  if (s == "divide") return modhdr::FeatureNorm::DivideByWrapRange;
  if (s == "none") return modhdr::FeatureNorm::None;
  throw modhdr::InvalidArgument("unknown normalization: " + s + " (expected divide|none)");
}

// ---- datagen ---------------------------------------------------------------

struct DatagenFlags {
  Globals g;
  int count = 0;
  int size = 64;
  int channels = 1;
  int bit_depth = 8;
  double peak_factor = 4.0;
  std::string kinds = "gaussian-blobs,piecewise-constant,sinusoid,composite,ramp";
  std::string itoh = "free";
  double train_frac = 0.7;
  double val_frac = 0.15;
};

void run_datagen(const DatagenFlags& f) {
  apply_globals(f.g);
  if (f.count < 1) throw modhdr::InvalidArgument("datagen: --count must be >= 1");

  std::vector<modhdr::SceneKind> kinds;
  {
    std::stringstream ss(f.kinds);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) kinds.push_back(modhdr::parse_scene_kind(tok));
  }
  if (kinds.empty()) throw modhdr::InvalidArgument("datagen: --kinds must name at least one kind");
  const modhdr::ItohMode mode = modhdr::parse_itoh_mode(f.itoh);

  write_resolved_config(f.g, "datagen",
                        {{"command", "datagen"},
                         {"count", f.count},
                         {"size", f.size},
                         {"channels", f.channels},
                         {"bit_depth", f.bit_depth},
                         {"peak_factor", f.peak_factor},
                         {"kinds", f.kinds},
                         {"itoh", f.itoh},
                         {"train_frac", f.train_frac},
                         {"val_frac", f.val_frac}});

  std::vector<modhdr::SceneSpec> specs;
  specs.reserve(f.count);
  for (int i = 0; i < f.count; ++i) {
    modhdr::SceneSpec s;
    s.kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
    s.height = f.size;
    s.width = f.size;
    s.channels = f.channels;
    s.peak_factor = f.peak_factor;
    s.bit_depth = f.bit_depth;
    s.seed = derive_seed(f.g.seed, static_cast<std::uint64_t>(i));
    s.itoh_mode = mode;
    s.validate();
    specs.push_back(s);
  }
  const auto manifest =
      modhdr::build_dataset(specs, f.train_frac, f.val_frac, f.g.out_dir, f.g.seed, f.g.threads);
  log_msg(LogLevel::Info, "wrote " + std::to_string(manifest.entries.size()) + " scenes to " +
                              f.g.out_dir);
}

// ---- simulate --------------------------------------------------------------

struct SimulateFlags {
  Globals g;
  std::string input;
  std::string output = "simulated.pfm";
  int bit_depth = 8;
  bool quantize = false;
};

void run_simulate(const SimulateFlags& f) {
  apply_globals(f.g);
  write_resolved_config(f.g, "simulate",
                        {{"command", "simulate"},
                         {"input", f.input},
                         {"output", f.output},
                         {"bit_depth", f.bit_depth},
                         {"quantize", f.quantize}});
  const modhdr::HdrImage x = modhdr::read_pfm(f.input);
  modhdr::ModuloImage y = modhdr::wrap(x, f.bit_depth, f.quantize);
  // PFM stores float32; keep rounded samples strictly below the wrap
  // range so the file reads back as a valid modulo image.
  const auto range_f = static_cast<float>(y.wrap_range());
  for (double& v : y.raster.data) {
    auto fv = static_cast<float>(v);
    if (!(fv < range_f)) fv = std::nextafterf(range_f, 0.0f);
    v = static_cast<double>(fv);
  }
  modhdr::write_pfm(y.raster, join(f.g.out_dir, f.output));
  log_msg(LogLevel::Info, "simulated modulo image written to " + join(f.g.out_dir, f.output));
}

// ---- unwrap ----------------------------------------------------------------

struct UnwrapFlags {
  Globals g;
  std::string input;
  std::string output = "unwrapped.pfm";
  int bit_depth = 8;
  std::string gauge = "zero-mean";
  double anchor = 0.0;
};

modhdr::Gauge parse_gauge(const std::string& s) {
  if (s == "zero-mean") return modhdr::Gauge::ZeroMean;
  if (s == "anchor-first") return modhdr::Gauge::AnchorFirstPixel;
  if (s == "anchor-value") return modhdr::Gauge::AnchorToValue;
  throw modhdr::InvalidArgument("unknown gauge: " + s);
}

void run_unwrap(const UnwrapFlags& f) {
  apply_globals(f.g);
  write_resolved_config(f.g, "unwrap",
                        {{"command", "unwrap"},
                         {"input", f.input},
                         {"output", f.output},
                         {"bit_depth", f.bit_depth},
                         {"gauge", f.gauge},
                         {"anchor", f.anchor}});
  const modhdr::Image raster = modhdr::read_pfm_raster(f.input);
  const modhdr::ModuloImage y(raster, f.bit_depth);
  const auto sol = modhdr::unwrap_exact(y, parse_gauge(f.gauge), f.anchor);
  modhdr::write_pfm(sol.image, join(f.g.out_dir, f.output));
  std::printf("{\"residual_norm\":%.17g}\n", sol.residual_norm);
  log_msg(LogLevel::Info, "closed-form reconstruction written to " + join(f.g.out_dir, f.output));
}

// ---- features --------------------------------------------------------------

struct FeaturesFlags {
  Globals g;
  std::string input;
  std::string output = "features.npy";
  int bit_depth = 8;
  std::string config = "y+diff";
  std::string normalization = "divide";
};

void run_features(const FeaturesFlags& f) {
  apply_globals(f.g);
  write_resolved_config(f.g, "features",
                        {{"command", "features"},
                         {"input", f.input},
                         {"output", f.output},
                         {"bit_depth", f.bit_depth},
                         {"config", f.config},
                         {"normalization", f.normalization}});
  modhdr::FeatureConfig cfg = modhdr::parse_feature_config(f.config);
  cfg.normalization = parse_norm_flag(f.normalization);
  const modhdr::Image raster = modhdr::read_pfm_raster(f.input);
  const modhdr::ModuloImage y(raster, f.bit_depth);
  const modhdr::FeatureStack fs = modhdr::build_features(y, cfg);

  const std::string npy_path = join(f.g.out_dir, f.output);
  modhdr::write_npy(fs.stack, npy_path);
  ordered_json sidecar = {{"channel_layout", fs.channel_layout},
                          {"height", fs.stack.height},
                          {"width", fs.stack.width},
                          {"channels", fs.stack.channels},
                          {"source_channels", fs.source_channels},
                          {"bit_depth", fs.bit_depth}};
  const std::string sidecar_path = npy_path + ".json";
  std::ofstream sf(sidecar_path, std::ios::binary);
  if (!sf) throw modhdr::IoError("cannot write sidecar: " + sidecar_path);
  sf << sidecar.dump(2) << '\n';
  if (!sf) throw modhdr::IoError("failed writing sidecar: " + sidecar_path);
  log_msg(LogLevel::Info, "feature stack written to " + npy_path);
}

// ---- train -----------------------------------------------------------------

struct TrainFlags {
  Globals g;
  std::string manifest;
  std::string data_dir;  // defaults to the manifest's directory
  std::string split = "train";
  std::string features = "y+diff";
  std::string normalization = "divide";
  double gamma = 0.1;
  double alpha_lo = 0.9;
  double alpha_hi = 1.1;
  double lr = 1e-3;
  int batch_size = 8;
  int epochs = 500;
  int alpha_draws = 1;
  std::string loss_mode = "mean";
  std::string eq_target = "x";
  int hidden = 8;
  std::string checkpoint = "model.ckpt";
  std::string trace = "loss_trace.csv";
};

modhdr::TrainConfig train_config_from_flags(const TrainFlags& f) {
  modhdr::TrainConfig tc;
  tc.gamma = f.gamma;
  tc.alpha_lo = f.alpha_lo;
  tc.alpha_hi = f.alpha_hi;
  tc.lr = f.lr;
  tc.batch_size = f.batch_size;
  tc.epochs = f.epochs;
  tc.seed = f.g.seed;
  tc.alpha_draws = f.alpha_draws;
  if (f.loss_mode == "mean")
    tc.loss_mode = modhdr::LossMode::Mean;
  else if (f.loss_mode == "sum")
    tc.loss_mode = modhdr::LossMode::Sum;
  else
    throw modhdr::InvalidArgument("unknown loss mode: " + f.loss_mode);
  if (f.eq_target == "x")
    tc.eq_supervise_scaled_pred = false;
  else if (f.eq_target == "scaled-pred")
    tc.eq_supervise_scaled_pred = true;
  else
    throw modhdr::InvalidArgument("unknown eq target: " + f.eq_target + " (expected x|scaled-pred)");
  tc.validate();
  return tc;
}

void run_train(const TrainFlags& f) {
  apply_globals(f.g);
  const std::string data_dir =
      f.data_dir.empty() ? std::filesystem::path(f.manifest).parent_path().string() : f.data_dir;
  const std::string data_dir_fixed = data_dir.empty() ? "." : data_dir;

  write_resolved_config(f.g, "train",
                        {{"command", "train"},
                         {"manifest", f.manifest},
                         {"data_dir", data_dir_fixed},
                         {"split", f.split},
                         {"features", f.features},
                         {"normalization", f.normalization},
                         {"gamma", f.gamma},
                         {"alpha_lo", f.alpha_lo},
                         {"alpha_hi", f.alpha_hi},
                         {"lr", f.lr},
                         {"batch_size", f.batch_size},
                         {"epochs", f.epochs},
                         {"alpha_draws", f.alpha_draws},
                         {"loss_mode", f.loss_mode},
                         {"eq_target", f.eq_target},
                         {"hidden", f.hidden},
                         {"checkpoint", f.checkpoint},
                         {"trace", f.trace}});

  modhdr::FeatureConfig cfg = modhdr::parse_feature_config(f.features);
  cfg.normalization = parse_norm_flag(f.normalization);
  const modhdr::TrainConfig tc = train_config_from_flags(f);

  const auto manifest = modhdr::load_manifest(f.manifest);
  const int bit_depth = modhdr::dataset_bit_depth(manifest);
  const auto dataset = modhdr::load_split(manifest, data_dir_fixed, f.split);
  if (dataset.empty())
    throw modhdr::InvalidArgument("train: split '" + f.split + "' has no entries");
  log_msg(LogLevel::Info, "training on " + std::to_string(dataset.size()) + " scenes (" +
                              f.features + ", gamma=" + std::to_string(f.gamma) + ")");

  const modhdr::TrainResult res = modhdr::train(dataset, cfg, bit_depth, tc, f.hidden);
  modhdr::save_checkpoint(join(f.g.out_dir, f.checkpoint), res.model, cfg, tc, bit_depth);
  modhdr::save_loss_trace(join(f.g.out_dir, f.trace), res.trace);
  log_msg(LogLevel::Info,
          "final losses: rec=" + std::to_string(res.trace.back().rec) +
              " eq=" + std::to_string(res.trace.back().eq) +
              " total=" + std::to_string(res.trace.back().total));
}

// ---- eval ------------------------------------------------------------------

struct EvalFlags {
  Globals g;
  std::string manifest;
  std::string data_dir;
  std::string split = "test";
  std::vector<std::string> methods = {"checkpoint"};
  std::string checkpoint;
  bool align_mean = false;
  double peak_display = 1000.0;
  std::string out_csv = "metrics.csv";
  int previews = 1;
  int preview_bits = 8;
};

modhdr::HdrImage clamp_to_hdr(modhdr::Image img) {
  for (double& v : img.data)
    if (v < 0.0) v = 0.0;
  return modhdr::HdrImage(std::move(img));
}

void run_eval(const EvalFlags& f) {
  apply_globals(f.g);
  const std::string data_dir =
      f.data_dir.empty() ? std::filesystem::path(f.manifest).parent_path().string() : f.data_dir;
  const std::string data_dir_fixed = data_dir.empty() ? "." : data_dir;

  write_resolved_config(f.g, "eval",
                        {{"command", "eval"},
                         {"manifest", f.manifest},
                         {"data_dir", data_dir_fixed},
                         {"split", f.split},
                         {"methods", f.methods},
                         {"checkpoint", f.checkpoint},
                         {"align_mean", f.align_mean},
                         {"peak_display", f.peak_display},
                         {"out_csv", f.out_csv},
                         {"previews", f.previews},
                         {"preview_bits", f.preview_bits}});

  const auto manifest = modhdr::load_manifest(f.manifest);
  const int bit_depth = modhdr::dataset_bit_depth(manifest);
  const auto refs = modhdr::load_split(manifest, data_dir_fixed, f.split);
  if (refs.empty()) throw modhdr::InvalidArgument("eval: split '" + f.split + "' has no entries");

  modhdr::Checkpoint ck;
  bool have_ck = false;
  for (const auto& m : f.methods)
    if (m == "checkpoint") {
      if (f.checkpoint.empty())
        throw modhdr::InvalidArgument("eval: --checkpoint required for method 'checkpoint'");
      ck = modhdr::load_checkpoint(f.checkpoint);
      if (ck.bit_depth != bit_depth)
        throw modhdr::InvalidArgument("eval: checkpoint bit depth " +
                                      std::to_string(ck.bit_depth) +
                                      " does not match dataset bit depth " +
                                      std::to_string(bit_depth));
      const int src_c = refs.front().raster.channels;
      if (ck.model.out_channels != src_c ||
          ck.model.in_channels != ck.features.stack_channels(src_c))
        throw modhdr::InvalidArgument("eval: checkpoint architecture does not match the data");
      have_ck = true;
    } else if (m != "gt" && m != "dct") {
      throw modhdr::InvalidArgument("eval: unknown method '" + m + "' (expected gt|dct|checkpoint)");
    }
  (void)have_ck;

  auto reconstruct = [&](const std::string& method,
                         const modhdr::HdrImage& x) -> modhdr::HdrImage {
    if (method == "gt") return x;
    const modhdr::ModuloImage y = modhdr::wrap(x, bit_depth);
    if (method == "dct") {
      auto sol = modhdr::unwrap_exact(y);
      if (f.align_mean) {
        const double shift = x.raster.mean() - sol.image.mean();
        for (double& v : sol.image.data) v += shift;
      }
      return clamp_to_hdr(std::move(sol.image));
    }
    const modhdr::FeatureStack z = modhdr::build_features(y, ck.features);
    return clamp_to_hdr(ck.model.forward(z.stack));
  };

  const std::string csv_path = join(f.g.out_dir, f.out_csv);
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw modhdr::IoError("cannot write metrics CSV: " + csv_path);
  csv << "method, psnr_y_pu, psnr_pu, ssim_y_pu, msssim_y_pu, psnr_l, ssim_l\n";

  for (const auto& method : f.methods) {
    modhdr::MetricReport sum;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const modhdr::HdrImage rec = reconstruct(method, refs[i]);
      const modhdr::MetricReport r = modhdr::evaluate(refs[i], rec, f.peak_display);
      sum.psnr_y_pu += r.psnr_y_pu;
      sum.psnr_pu += r.psnr_pu;
      sum.ssim_y_pu += r.ssim_y_pu;
      sum.msssim_y_pu += r.msssim_y_pu;
      sum.psnr_l += r.psnr_l;
      sum.ssim_l += r.ssim_l;
      if (static_cast<int>(i) < f.previews) {
        char name[64];
        std::snprintf(name, sizeof(name), "preview_%s_%04zu.png", method.c_str(), i);
        modhdr::write_png_preview(modhdr::reinhard_tonemap(rec), join(f.g.out_dir, name),
                                  f.preview_bits);
        if (method == f.methods.front()) {
          std::snprintf(name, sizeof(name), "preview_ref_%04zu.png", i);
          modhdr::write_png_preview(modhdr::reinhard_tonemap(refs[i]), join(f.g.out_dir, name),
                                    f.preview_bits);
        }
      }
    }
    const double n = static_cast<double>(refs.size());
    csv << method << ", " << fmt_metric(sum.psnr_y_pu / n) << ", " << fmt_metric(sum.psnr_pu / n)
        << ", " << fmt_metric(sum.ssim_y_pu / n) << ", " << fmt_metric(sum.msssim_y_pu / n)
        << ", " << fmt_metric(sum.psnr_l / n) << ", " << fmt_metric(sum.ssim_l / n) << "\n";
  }
  if (!csv) throw modhdr::IoError("failed writing metrics CSV: " + csv_path);
  log_msg(LogLevel::Info, "metrics written to " + csv_path);
}

// ---- bench -----------------------------------------------------------------

struct BenchFlags {
  Globals g;
  int scene_count = 40;
  int size = 16;
  int channels = 1;
  int bit_depth = 4;
  double peak_factor = 3.0;
  double train_frac = 0.8;
  int hidden = 8;
  int epochs = 40;
  double lr = 1e-3;
  int batch_size = 8;
  int seeds = 2;
  double gamma = 0.1;
  std::string features = "y+diff";
  std::string out_md = "bench_table.md";
  std::string out_csv = "bench_table.csv";
};

void run_bench(const BenchFlags& f) {
  apply_globals(f.g);
  if (f.seeds < 1) throw modhdr::InvalidArgument("bench: --seeds must be >= 1");
  write_resolved_config(f.g, "bench",
                        {{"command", "bench"},
                         {"scene_count", f.scene_count},
                         {"size", f.size},
                         {"channels", f.channels},
                         {"bit_depth", f.bit_depth},
                         {"peak_factor", f.peak_factor},
                         {"train_frac", f.train_frac},
                         {"hidden", f.hidden},
                         {"epochs", f.epochs},
                         {"lr", f.lr},
                         {"batch_size", f.batch_size},
                         {"seeds", f.seeds},
                         {"gamma", f.gamma},
                         {"features", f.features},
                         {"out_md", f.out_md},
                         {"out_csv", f.out_csv}});

  modhdr::ToyBenchConfig bc;
  bc.scene_count = f.scene_count;
  bc.size = f.size;
  bc.channels = f.channels;
  bc.bit_depth = f.bit_depth;
  bc.peak_factor = f.peak_factor;
  bc.train_fraction = f.train_frac;
  bc.data_seed = f.g.seed;
  bc.hidden = f.hidden;
  const std::vector<modhdr::HdrImage> scenes = modhdr::make_toy_scenes(bc);

  auto base_tc = [&](std::uint64_t seed, double gamma) {
    modhdr::TrainConfig tc;
    tc.gamma = gamma;
    tc.lr = f.lr;
    tc.batch_size = f.batch_size;
    tc.epochs = f.epochs;
    tc.seed = seed;
    return tc;
  };

  struct Row {
    std::string name;
    double psnr_l, rec, eq;
  };

  // part A: the six feature configurations at the default gamma
  std::vector<Row> feature_rows;
  for (const modhdr::FeatureConfig& fc : modhdr::table1_configs()) {
    std::vector<double> psnrs, recs, eqs;
    for (int s = 0; s < f.seeds; ++s) {
      const auto stats =
          modhdr::run_toy_benchmark(scenes, bc, fc, base_tc(derive_seed(f.g.seed, s + 1), f.gamma));
      psnrs.push_back(stats.psnr_l);
      recs.push_back(stats.rec);
      eqs.push_back(stats.eq);
    }
    feature_rows.push_back({modhdr::feature_config_name(fc), modhdr::median(psnrs),
                            modhdr::median(recs), modhdr::median(eqs)});
    log_msg(LogLevel::Info, "bench: " + feature_rows.back().name + " median held-out PSNR-L " +
                                std::to_string(feature_rows.back().psnr_l) + " dB");
  }
  std::stable_sort(feature_rows.begin(), feature_rows.end(),
                   [](const Row& a, const Row& b) { return a.psnr_l > b.psnr_l; });

  // part B: gamma ablation for the chosen configuration
  const modhdr::FeatureConfig chosen = modhdr::parse_feature_config(f.features);
  std::vector<Row> gamma_rows;
  for (double gamma : {0.0, f.gamma}) {
    std::vector<double> psnrs, recs, eqs;
    for (int s = 0; s < f.seeds; ++s) {
      const auto stats = modhdr::run_toy_benchmark(scenes, bc, chosen,
                                                   base_tc(derive_seed(f.g.seed, s + 1), gamma));
      psnrs.push_back(stats.psnr_l);
      recs.push_back(stats.rec);
      eqs.push_back(stats.eq);
    }
    char name[64];
    std::snprintf(name, sizeof(name), "%s gamma=%g", f.features.c_str(), gamma);
    gamma_rows.push_back({name, modhdr::median(psnrs), modhdr::median(recs), modhdr::median(eqs)});
    log_msg(LogLevel::Info, "bench: " + gamma_rows.back().name + " median held-out eq loss " +
                                std::to_string(gamma_rows.back().eq));
  }

  const std::string md_path = join(f.g.out_dir, f.out_md);
  std::ofstream md(md_path, std::ios::binary);
  if (!md) throw modhdr::IoError("cannot write bench table: " + md_path);
  md << "# Input construction (ranked by median held-out PSNR-L, " << f.seeds << " seeds)\n\n"
     << "| features | PSNR-L (dB) | rec loss | eq loss |\n"
     << "|---|---|---|---|\n";
  for (const auto& r : feature_rows)
    md << "| " << r.name << " | " << fmt_metric(r.psnr_l) << " | " << fmt_metric(r.rec) << " | "
       << fmt_metric(r.eq) << " |\n";
  md << "\n# Equivariance regularizer (" << f.features << ")\n\n"
     << "| run | PSNR-L (dB) | rec loss | eq loss |\n"
     << "|---|---|---|---|\n";
  for (const auto& r : gamma_rows)
    md << "| " << r.name << " | " << fmt_metric(r.psnr_l) << " | " << fmt_metric(r.rec) << " | "
       << fmt_metric(r.eq) << " |\n";
  if (!md) throw modhdr::IoError("failed writing bench table: " + md_path);

  const std::string csv_path = join(f.g.out_dir, f.out_csv);
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw modhdr::IoError("cannot write bench CSV: " + csv_path);
  csv << "section,name,psnr_l,rec,eq\n";
  for (const auto& r : feature_rows)
    csv << "features," << r.name << ',' << fmt_metric(r.psnr_l) << ',' << fmt_metric(r.rec) << ','
        << fmt_metric(r.eq) << '\n';
  for (const auto& r : gamma_rows)
    csv << "gamma," << r.name << ',' << fmt_metric(r.psnr_l) << ',' << fmt_metric(r.rec) << ','
        << fmt_metric(r.eq) << '\n';
  if (!csv) throw modhdr::IoError("failed writing bench CSV: " + csv_path);
  log_msg(LogLevel::Info, "bench tables written to " + md_path + " and " + csv_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modhdr: modulo-sensor HDR simulation, unwrapping, learning, and evaluation"};
  app.require_subcommand(1);

  DatagenFlags dg;
  auto* c_dg = app.add_subcommand("datagen", "generate a synthetic HDR dataset");
  add_globals(c_dg, dg.g);
  c_dg->add_option("--count", dg.count, "number of scenes")->required();
  c_dg->add_option("--size", dg.size, "square scene size")->capture_default_str();
  c_dg->add_option("--channels", dg.channels, "1 or 3")->capture_default_str();
  c_dg->add_option("--bit-depth", dg.bit_depth, "sensor wrap bit depth")->capture_default_str();
  c_dg->add_option("--peak-factor", dg.peak_factor, "max radiance / 2^b")->capture_default_str();
  c_dg->add_option("--kinds", dg.kinds, "comma list of scene kinds, cycled")
      ->capture_default_str();
  c_dg->add_option("--itoh", dg.itoh, "enforce|free")->capture_default_str();
  c_dg->add_option("--train-frac", dg.train_frac, "train split fraction")->capture_default_str();
  c_dg->add_option("--val-frac", dg.val_frac, "val split fraction")->capture_default_str();

  SimulateFlags sim;
  auto* c_sim = app.add_subcommand("simulate", "wrap an HDR image through the modulo sensor");
  add_globals(c_sim, sim.g);
  c_sim->add_option("--input", sim.input, "input HDR PFM")->required();
  c_sim->add_option("--output", sim.output, "output modulo PFM (relative to out-dir)")
      ->capture_default_str();
  c_sim->add_option("--bit-depth", sim.bit_depth, "sensor wrap bit depth")->capture_default_str();
  c_sim->add_flag("--quantize", sim.quantize, "floor to integer levels before wrapping");

  UnwrapFlags uw;
  auto* c_uw = app.add_subcommand("unwrap", "closed-form reconstruction from a modulo image");
  add_globals(c_uw, uw.g);
  c_uw->add_option("--input", uw.input, "input modulo PFM")->required();
  c_uw->add_option("--output", uw.output, "output PFM (relative to out-dir)")
      ->capture_default_str();
  c_uw->add_option("--bit-depth", uw.bit_depth, "sensor wrap bit depth")->capture_default_str();
  c_uw->add_option("--gauge", uw.gauge, "zero-mean|anchor-first|anchor-value")
      ->capture_default_str();
  c_uw->add_option("--anchor", uw.anchor, "anchor value for gauge=anchor-value")
      ->capture_default_str();

  FeaturesFlags ft;
  auto* c_ft = app.add_subcommand("features", "dump the lifted feature stack for a modulo image");
  add_globals(c_ft, ft.g);
  c_ft->add_option("--input", ft.input, "input modulo PFM")->required();
  c_ft->add_option("--output", ft.output, "output NPY (relative to out-dir)")
      ->capture_default_str();
  c_ft->add_option("--bit-depth", ft.bit_depth, "sensor wrap bit depth")->capture_default_str();
  c_ft->add_option("--config", ft.config, "y|diff|init|y+diff|y+init|all")->capture_default_str();
  c_ft->add_option("--normalization", ft.normalization, "divide|none")->capture_default_str();

  TrainFlags tr;
  auto* c_tr = app.add_subcommand("train", "train the toy restorer on a dataset split");
  add_globals(c_tr, tr.g);
  c_tr->add_option("--manifest", tr.manifest, "dataset manifest JSON")->required();
  c_tr->add_option("--data-dir", tr.data_dir, "dataset directory (default: manifest's)")
      ->capture_default_str();
  c_tr->add_option("--split", tr.split, "split tag to train on")->capture_default_str();
  c_tr->add_option("--features", tr.features, "y|diff|init|y+diff|y+init|all")
      ->capture_default_str();
  c_tr->add_option("--normalization", tr.normalization, "divide|none")->capture_default_str();
  c_tr->add_option("--gamma", tr.gamma, "equivariance weight")->capture_default_str();
  c_tr->add_option("--alpha-lo", tr.alpha_lo, "exposure range lower end")->capture_default_str();
  c_tr->add_option("--alpha-hi", tr.alpha_hi, "exposure range upper end")->capture_default_str();
  c_tr->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  c_tr->add_option("--batch-size", tr.batch_size, "minibatch size")->capture_default_str();
  c_tr->add_option("--epochs", tr.epochs, "training epochs")->capture_default_str();
  c_tr->add_option("--alpha-draws", tr.alpha_draws, "alpha draws per sample per step")
      ->capture_default_str();
  c_tr->add_option("--loss-mode", tr.loss_mode, "mean|sum")->capture_default_str();
  c_tr->add_option("--eq-target", tr.eq_target, "x|scaled-pred")->capture_default_str();
  c_tr->add_option("--hidden", tr.hidden, "hidden channels of the toy restorer")
      ->capture_default_str();
  c_tr->add_option("--checkpoint", tr.checkpoint, "checkpoint filename (relative to out-dir)")
      ->capture_default_str();
  c_tr->add_option("--trace", tr.trace, "loss trace CSV filename (relative to out-dir)")
      ->capture_default_str();

  EvalFlags ev;
  auto* c_ev = app.add_subcommand("eval", "evaluate methods on a dataset split");
  add_globals(c_ev, ev.g);
  c_ev->add_option("--manifest", ev.manifest, "dataset manifest JSON")->required();
  c_ev->add_option("--data-dir", ev.data_dir, "dataset directory (default: manifest's)")
      ->capture_default_str();
  c_ev->add_option("--split", ev.split, "split tag to evaluate")->capture_default_str();
  c_ev->add_option("--method", ev.methods, "gt|dct|checkpoint (repeatable)")
      ->capture_default_str();
  c_ev->add_option("--checkpoint", ev.checkpoint, "checkpoint for method=checkpoint");
  c_ev->add_flag("--align-mean", ev.align_mean, "mean-align the dct reconstruction");
  c_ev->add_option("--peak-display", ev.peak_display, "display peak in cd/m^2")
      ->capture_default_str();
  c_ev->add_option("--out", ev.out_csv, "metrics CSV filename (relative to out-dir)")
      ->capture_default_str();
  c_ev->add_option("--previews", ev.previews, "tone-mapped previews per method")
      ->capture_default_str();
  c_ev->add_option("--preview-bits", ev.preview_bits, "8 or 16")->capture_default_str();

  BenchFlags bn;
  auto* c_bn = app.add_subcommand("bench", "feature/regularizer ablation tables");
  add_globals(c_bn, bn.g);
  c_bn->add_option("--scene-count", bn.scene_count, "toy benchmark scenes")
      ->capture_default_str();
  c_bn->add_option("--size", bn.size, "square scene size")->capture_default_str();
  c_bn->add_option("--channels", bn.channels, "1 or 3")->capture_default_str();
  c_bn->add_option("--bit-depth", bn.bit_depth, "sensor wrap bit depth")->capture_default_str();
  c_bn->add_option("--peak-factor", bn.peak_factor, "max radiance / 2^b")->capture_default_str();
  c_bn->add_option("--train-frac", bn.train_frac, "train fraction of the scene set")
      ->capture_default_str();
  c_bn->add_option("--hidden", bn.hidden, "hidden channels")->capture_default_str();
  c_bn->add_option("--epochs", bn.epochs, "epochs per run")->capture_default_str();
  c_bn->add_option("--lr", bn.lr, "Adam learning rate")->capture_default_str();
  c_bn->add_option("--batch-size", bn.batch_size, "minibatch size")->capture_default_str();
  c_bn->add_option("--seeds", bn.seeds, "seeds per configuration")->capture_default_str();
  c_bn->add_option("--gamma", bn.gamma, "nonzero gamma for the ablation")->capture_default_str();
  c_bn->add_option("--features", bn.features, "configuration for the gamma ablation")
      ->capture_default_str();
  c_bn->add_option("--out-md", bn.out_md, "markdown table filename")->capture_default_str();
  c_bn->add_option("--out-csv", bn.out_csv, "CSV table filename")->capture_default_str();

  c_dg->callback([&] { run_datagen(dg); });
  c_sim->callback([&] { run_simulate(sim); });
  c_uw->callback([&] { run_unwrap(uw); });
  c_ft->callback([&] { run_features(ft); });
  c_tr->callback([&] { run_train(tr); });
  c_ev->callback([&] { run_eval(ev); });
  c_bn->callback([&] { run_bench(bn); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const modhdr::InvalidArgument& e) {
    log_msg(LogLevel::Error, e.what());
    return 2;
  } catch (const modhdr::IoError& e) {
    log_msg(LogLevel::Error, e.what());
    return 3;
  } catch (const modhdr::NumericError& e) {
    log_msg(LogLevel::Error, e.what());
    return 4;
  } catch (const std::exception& e) {
    log_msg(LogLevel::Error, std::string("unexpected failure: ") + e.what());
    return 1;
  }
  return 0;
}
