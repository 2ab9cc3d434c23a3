#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddr/assets.hpp"
#include "ddr/compose.hpp"
#include "ddr/manifest.hpp"
#include "ddr/render.hpp"
#include "ddr/style.hpp"

namespace ddr {

// Extra composition attempts (with derived seeds) when a page cannot be built.
inline constexpr int kComposeRetries = 8;

struct PageSeed {
  RngSeed seed;
  int attempt = 0;
};

// Seed of split `name` ("train" / "val") under a master seed.
std::uint64_t split_seed(std::uint64_t master_seed, std::string_view name);

// Samples a config and composes one page, retrying infeasible draws with a
// derived seed. The returned layout's seed is the one that succeeded.
PageLayout compose_one(const std::shared_ptr<const StyleProfile>& profile, const AssetPool& pool, RngSeed seed,
                       const ComposeOptions& options = {});

struct GenerateOptions {
  int n_train = 0;
  int n_val = 0;
  std::uint64_t master_seed = 0;
  std::string profile_name;
  ComposeOptions compose;
  RenderSpec render;
  // Images are written to <out_dir>/<split>/ when set; manifests are returned either way.
  std::optional<std::filesystem::path> out_dir;
  bool write_images = true;
  int jobs = 1;
  std::optional<std::filesystem::path> font_map;
  std::function<void(const std::string&)> log;
};

struct SplitResult {
  DatasetManifest manifest;
  std::vector<PageLayout> layouts;
};

struct CorpusResult {
  SplitResult train;
  SplitResult val;
  std::vector<std::string> truncations;
};

// Composition is serial so `once` checkouts are reproducible; rendering
// fans out over `jobs` threads. Under `once` the pool is partitioned by split
// size first so train and val never share an asset.
CorpusResult generate_corpus(const std::shared_ptr<const StyleProfile>& profile, const AssetPool& pool,
                             const GenerateOptions& options);

// Manifest records for one composed split (no rasterization).
DatasetManifest split_manifest(const std::vector<PageLayout>& layouts, const std::string& split,
                               const RenderSpec& render);

struct NoiseConfig {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr double kMaxRecommendedNoise = 0.10;

// Per-annotation uniform label swapping among the eight classes other than
// body-text. Throws ValidationError if rate is outside [0, 1]; rates above
// 0.10 are accepted and reported through `warn`.
DatasetManifest inject_label_noise(const DatasetManifest& m, const NoiseConfig& cfg,
                                   const std::function<void(const std::string&)>& warn = {});

// Keeps round-half-up(fraction * pages) pages chosen uniformly without
// replacement, in their original order. Throws ValidationError unless
// 0 < fraction <= 1.
DatasetManifest downsample(const DatasetManifest& m, double fraction, std::uint64_t seed);
std::size_t downsample_count(std::size_t pages, double fraction);

struct InstanceStat {
  int image_id = 0;
  ClassLabel label = ClassLabel::kBodyText;
  double center_x = 0.0;
  double center_y = 0.0;
  double width = 0.0;
  double height = 0.0;
};

struct PageCount {
  int image_id = 0;
  ClassLabel label = ClassLabel::kBodyText;
  int count = 0;
};

struct StatsTable {
  std::vector<InstanceStat> instances;
  std::vector<PageCount> page_counts;  // every (image, class) pair, zeros included
};

StatsTable corpus_stats(const DatasetManifest& m);
std::string instances_csv(const StatsTable& t);
std::string counts_csv(const StatsTable& t);

}  // namespace ddr
