#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "ddr/assets.hpp"
#include "ddr/error.hpp"

using namespace ddr;
namespace fs = std::filesystem;

namespace {

fs::path make_asset_dir(const std::string& name, int per_class) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  for (const char* sub : {"figure", "table", "algorithm", "equation"}) {
    fs::create_directories(dir / sub);
    for (int i = 0; i < per_class; ++i) {
      cv::Mat m(40 + 10 * i, 80, CV_8UC1, cv::Scalar(255));
      cv::imwrite((dir / sub / ("a" + std::to_string(i) + ".png")).string(), m);
    }
  }
  return dir;
}

}  // namespace

TEST_CASE("procedural assets match the requested aspect") {
  for (ClassLabel c : {ClassLabel::kFigure, ClassLabel::kTable, ClassLabel::kAlgorithm, ClassLabel::kEquation}) {
    for (double aspect : {0.3, 1.0, 2.5, 8.0}) {
      const AssetImage a = procedural_asset(c, aspect, RngSeed{1, 2});
      CHECK(a.image.type() == CV_8UC1);
      CHECK(a.ref.label == c);
      CHECK(a.ref.width_px == a.image.cols);
      CHECK(a.ref.height_px == a.image.rows);
      CHECK(a.ref.aspect() == doctest::Approx(aspect).epsilon(0.10));
      CHECK(cv::countNonZero(a.image < 128) > 0);
    }
  }
}

TEST_CASE("procedural assets are deterministic and seed-unique") {
  const AssetImage a = procedural_asset(ClassLabel::kFigure, 1.5, RngSeed{4, 4});
  const AssetImage b = procedural_asset(ClassLabel::kFigure, 1.5, RngSeed{4, 4});
  CHECK(a.ref == b.ref);
  CHECK(cv::norm(a.image, b.image, cv::NORM_INF) == 0.0);
  const AssetRef r1 = AssetPool::procedural().checkout(ClassLabel::kTable, 1.0, RngSeed{1, 1});
  const AssetRef r2 = AssetPool::procedural().checkout(ClassLabel::kTable, 1.0, RngSeed{1, 2});
  CHECK(r1.id != r2.id);
  CHECK(cv::norm(load_asset_image(r1), procedural_asset(ClassLabel::kTable, 1.0, RngSeed{1, 1}).image,
                 cv::NORM_INF) == 0.0);
}

TEST_CASE("external pool under once never repeats and then exhausts") {
  const fs::path dir = make_asset_dir("ddr-assets-once", 3);
  const AssetPool pool = load_asset_dir(dir, default_class_map(), UsagePolicy::kOnce);
  CHECK_FALSE(pool.is_procedural());
  CHECK(pool.size(ClassLabel::kFigure) == 3);
  std::set<std::string> ids;
  for (int i = 0; i < 3; ++i) ids.insert(pool.checkout(ClassLabel::kFigure, 1.0, RngSeed{0, 0}).id);
  CHECK(ids.size() == 3);
  CHECK(pool.remaining(ClassLabel::kFigure) == 0);
  CHECK_THROWS_AS(pool.checkout(ClassLabel::kFigure, 1.0, RngSeed{0, 0}), ExhaustedAssetsError);
  CHECK(pool.remaining(ClassLabel::kTable) == 3);
  fs::remove_all(dir);
}

TEST_CASE("with replacement never exhausts") {
  const fs::path dir = make_asset_dir("ddr-assets-repl", 2);
  const AssetPool pool = load_asset_dir(dir, default_class_map(), UsagePolicy::kWithReplacement);
  for (int i = 0; i < 20; ++i) {
    const AssetRef r = pool.checkout(ClassLabel::kEquation, 2.0, RngSeed{3, static_cast<std::uint64_t>(i)});
    CHECK(load_asset_image(r).cols == r.width_px);
  }
  fs::remove_all(dir);
}

TEST_CASE("partition is disjoint per class") {
  const fs::path dir = make_asset_dir("ddr-assets-part", 10);
  const AssetPool pool = load_asset_dir(dir, default_class_map(), UsagePolicy::kOnce);
  const auto [a, b] = pool.partition(0.7);
  CHECK(a.size(ClassLabel::kTable) + b.size(ClassLabel::kTable) == 10);
  CHECK(a.size(ClassLabel::kTable) == 7);
  std::set<std::string> ia, ib;
  while (a.remaining(ClassLabel::kTable) > 0) ia.insert(a.checkout(ClassLabel::kTable, 1.0, RngSeed{}).id);
  while (b.remaining(ClassLabel::kTable) > 0) ib.insert(b.checkout(ClassLabel::kTable, 1.0, RngSeed{}).id);
  for (const auto& id : ia) CHECK(ib.count(id) == 0);
  fs::remove_all(dir);
}

TEST_CASE("corrupt or missing assets are reported") {
  const fs::path dir = make_asset_dir("ddr-assets-bad", 1);
  std::ofstream(dir / "figure" / "broken.png") << "not a png";
  CHECK_THROWS_AS(load_asset_dir(dir, default_class_map(), UsagePolicy::kOnce), IoError);
  fs::remove_all(dir);
  fs::create_directories(dir / "figure");
  CHECK_THROWS_AS(load_asset_dir(dir, default_class_map(), UsagePolicy::kOnce), IoError);
  fs::remove_all(dir);
}

TEST_CASE("degrade keeps the size and binarizes") {
  const AssetImage a = procedural_asset(ClassLabel::kTable, 1.2, RngSeed{8, 8});
  const cv::Mat d = degrade_image(a.image, RngSeed{8, 9});
  CHECK(d.size() == a.image.size());
  CHECK(d.type() == CV_8UC1);
  CHECK(cv::countNonZero((d != 0) & (d != 255)) == 0);
}
