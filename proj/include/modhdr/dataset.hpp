#pragma once

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "modhdr/pfm.hpp"
#include "modhdr/scenes.hpp"

namespace modhdr {

struct ManifestEntry {
  std::string path;  // relative to the dataset directory
  SceneSpec spec;
  std::string split;  // train | val | test
};

struct DatasetManifest {
  int format_version = 1;
  std::uint64_t global_seed = 0;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(const std::string& tag) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
      if (e.split == tag) out.push_back(&e);
    return out;
  }
};

inline nlohmann::json to_json(const SceneSpec& s) {
  return {{"kind", scene_kind_name(s.kind)},
          {"height", s.height},
          {"width", s.width},
          {"channels", s.channels},
          {"peak_factor", s.peak_factor},
          {"bit_depth", s.bit_depth},
          {"seed", s.seed},
          {"itoh_mode", itoh_mode_name(s.itoh_mode)}};
}

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  SceneSpec s;
  s.kind = parse_scene_kind(j.at("kind").get<std::string>());
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.channels = j.at("channels").get<int>();
  s.peak_factor = j.at("peak_factor").get<double>();
  s.bit_depth = j.at("bit_depth").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.itoh_mode = parse_itoh_mode(j.at("itoh_mode").get<std::string>());
  return s;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  nlohmann::json j = {{"format", "modhdr-dataset"},
                      {"format_version", m.format_version},
                      {"global_seed", m.global_seed}};
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"path", e.path}, {"split", e.split}, {"spec", to_json(e.spec)}});
  j["entries"] = entries;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open manifest for writing: " + path);
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing manifest: " + path);
}

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest is not valid JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "modhdr-dataset")
    throw InvalidArgument("not a dataset manifest: " + path);
  DatasetManifest m;
  m.format_version = j.at("format_version").get<int>();
  m.global_seed = j.at("global_seed").get<std::uint64_t>();
  for (const auto& e : j.at("entries")) {
    ManifestEntry me;
    me.path = e.at("path").get<std::string>();
    me.split = e.at("split").get<std::string>();
    me.spec = scene_spec_from_json(e.at("spec"));
    m.entries.push_back(std::move(me));
  }
  return m;
}

/// Generate, write, and index a scene set. Split sizes are floor(frac*n)
/// for train and val; the remainder is test. Generation may fan out over
/// threads; scene RNG streams are per-spec, so the bytes never depend on
/// the thread count.
inline DatasetManifest build_dataset(const std::vector<SceneSpec>& specs, double train_frac,
                                     double val_frac, const std::string& out_dir,
                                     std::uint64_t global_seed, int threads = 1) {
  if (specs.empty()) throw InvalidArgument("build_dataset: specs must be non-empty");
  if (!(train_frac >= 0.0) || !(val_frac >= 0.0) || train_frac + val_frac > 1.0)
    throw InvalidArgument("build_dataset: split fractions must be nonnegative and sum to <= 1");
  if (threads < 1) throw InvalidArgument("build_dataset: threads must be >= 1");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create dataset directory: " + out_dir + " (" + ec.message() + ")");

  const std::size_t n = specs.size();
  std::vector<HdrImage> scenes(n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) scenes[i] = generate(specs[i]);
  } else {
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = static_cast<std::size_t>(t); i < n; i += threads)
            scenes[i] = generate(specs[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(n));
  const auto n_val = static_cast<std::size_t>(val_frac * static_cast<double>(n));
  DatasetManifest m;
  m.global_seed = global_seed;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04zu.pfm", i);
    ManifestEntry e;
    e.path = name;
    e.spec = specs[i];
    e.split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    if (!seen.insert(e.path).second) throw IoError("duplicate scene path: " + e.path);
    write_pfm(scenes[i], out_dir + "/" + e.path);
    m.entries.push_back(std::move(e));
  }
  save_manifest(m, out_dir + "/manifest.json");
  return m;
}

inline std::vector<HdrImage> load_split(const DatasetManifest& m, const std::string& dir,
                                        const std::string& split) {
  std::vector<HdrImage> out;
  for (const auto* e : m.split(split)) out.push_back(read_pfm(dir + "/" + e->path));
  return out;
}

/// The single bit depth shared by every entry (mixed depths are a
/// configuration error for training/evaluation).
inline int dataset_bit_depth(const DatasetManifest& m) {
  if (m.entries.empty()) throw InvalidArgument("dataset manifest has no entries");
  const int b = m.entries.front().spec.bit_depth;
  for (const auto& e : m.entries)
    if (e.spec.bit_depth != b)
      throw InvalidArgument("dataset mixes wrap bit depths; pass a uniform dataset");
  return b;
}

}  // namespace modhdr
