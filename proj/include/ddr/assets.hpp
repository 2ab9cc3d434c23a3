#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "ddr/class_label.hpp"
#include "ddr/rng.hpp"

namespace ddr {

enum class AssetSource { kExternal, kProcedural };
enum class UsagePolicy { kOnce, kWithReplacement };

std::string_view to_string(AssetSource s);
std::string_view to_string(UsagePolicy p);

struct AssetRef {
  std::string id;
  ClassLabel label = ClassLabel::kFigure;
  int width_px = 0;
  int height_px = 0;
  AssetSource source = AssetSource::kProcedural;
  std::filesystem::path path;  // external assets only
  RngSeed seed;                // procedural assets only

  double aspect() const { return static_cast<double>(width_px) / static_cast<double>(height_px); }
  friend bool operator==(const AssetRef&, const AssetRef&) = default;
};

// Supplies imagery for the four visual classes. A default-constructed pool
// is procedural: every checkout synthesizes a fresh placeholder keyed by the
// caller's seed, so ids never repeat. External pools hand out files; under
// kOnce each file is reserved at most once, atomically, so concurrent
// composers cannot double-place an asset.
class AssetPool {
 public:
  AssetPool();

  static AssetPool procedural();
  static AssetPool external(std::map<ClassLabel, std::vector<AssetRef>> assets, UsagePolicy policy);

  bool is_procedural() const { return procedural_; }
  UsagePolicy policy() const { return policy_; }
  std::size_t size(ClassLabel c) const;
  std::size_t remaining(ClassLabel c) const;

  // Throws ExhaustedAssetsError when an external pool has nothing left for `c`.
  AssetRef checkout(ClassLabel c, double target_aspect, RngSeed seed) const;

  // Splits an external pool into disjoint parts, class by class, with
  // `first_fraction` of each class going to the first part. Procedural pools
  // are returned unchanged on both sides (their ids are seed-unique).
  std::pair<AssetPool, AssetPool> partition(double first_fraction) const;

 private:
  struct Shared {
    std::map<ClassLabel, std::vector<AssetRef>> assets;
    std::map<ClassLabel, std::unique_ptr<std::atomic<std::size_t>>> cursor;
  };

  bool procedural_ = true;
  UsagePolicy policy_ = UsagePolicy::kOnce;
  std::shared_ptr<Shared> shared_;
};

// Subdirectory name -> class. The default maps "figure", "table",
// "algorithm" and "equation" to themselves.
using ClassMap = std::map<std::string, ClassLabel>;
ClassMap default_class_map();

// Reads `<dir>/<subdir>/*.png|jpg|jpeg`. Every image is decoded once to
// validate it. Throws IoError naming a file that fails to decode, or a
// mapped subdirectory that holds no images.
AssetPool load_asset_dir(const std::filesystem::path& dir, const ClassMap& class_map, UsagePolicy policy);

struct AssetImage {
  AssetRef ref;
  cv::Mat image;  // CV_8UC1, white background
};

// Deterministic placeholder image for one of the four visual classes. The
// image aspect (width / height) is within 10% of `target_aspect`.
AssetImage procedural_asset(ClassLabel c, double target_aspect, RngSeed seed);

// Pixels of a checked-out asset (decoded from disk or synthesized).
cv::Mat load_asset_image(const AssetRef& ref);

// Low-quality-scan imitation: blur, downsample and upsample, threshold.
cv::Mat degrade_image(const cv::Mat& gray, RngSeed seed);

}  // namespace ddr
