#include <doctest.h>

#include <filesystem>
#include <map>
#include <memory>
#include <set>

#include <opencv2/imgcodecs.hpp>

#include "ddr/corpus.hpp"
#include "ddr/error.hpp"

using namespace ddr;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const StyleProfile> profile(const char* name) {
  return std::make_shared<const StyleProfile>(resolve_profile(name));
}

DatasetManifest pages(int n) {
  DatasetManifest m;
  for (int i = 1; i <= n; ++i) {
    ImageRecord im;
    im.id = i;
    im.file_name = std::to_string(i);
    im.width = 100;
    im.height = 100;
    m.images.push_back(im);
    Annotation a;
    a.id = i;
    a.image_id = i;
    a.category_id = i % 9;
    a.bbox = {1, 1, 5, 5};
    a.bbox_norm = {0.01, 0.01, 0.05, 0.05};
    m.annotations.push_back(a);
  }
  return m;
}

}  // namespace

TEST_CASE("split seeds are distinct and stable") {
  CHECK(split_seed(1, "train") == split_seed(1, "train"));
  CHECK(split_seed(1, "train") != split_seed(1, "val"));
  CHECK(split_seed(1, "train") != split_seed(2, "train"));
  CHECK(split_seed(7, "val") == splitmix64(splitmix64(7) ^ hash_tag("val")));
}

TEST_CASE("generate_corpus writes images that match the manifest") {
  const fs::path dir = fs::temp_directory_path() / "ddr-corpus-test";
  fs::remove_all(dir);
  GenerateOptions o;
  o.n_train = 5;
  o.n_val = 2;
  o.master_seed = 99;
  o.out_dir = dir;
  o.jobs = 3;
  const CorpusResult r = generate_corpus(profile("cs150"), AssetPool::procedural(), o);
  CHECK(r.train.manifest.images.size() == 5);
  CHECK(r.val.manifest.images.size() == 2);
  CHECK(r.train.layouts.size() == 5);
  for (const auto* m : {&r.train.manifest, &r.val.manifest}) {
    CHECK(check_manifest_schema(nlohmann::json::parse(dump_manifest(*m))).empty());
    for (const ImageRecord& im : m->images) {
      const cv::Mat img = cv::imread((dir / im.file_name).string(), cv::IMREAD_UNCHANGED);
      REQUIRE_FALSE(img.empty());
      CHECK(img.cols == im.width);
      CHECK(img.rows == im.height);
      CHECK(img.channels() == 1);
      CHECK((im.page_ordinal == (im.page_kind == "title" ? "first" : "middle")));
    }
  }
  // Train and val pages come from different streams.
  std::set<std::pair<std::uint64_t, std::uint64_t>> seeds;
  for (const auto& im : r.train.manifest.images) seeds.insert({im.seed, im.stream});
  for (const auto& im : r.val.manifest.images) CHECK(seeds.count({im.seed, im.stream}) == 0);
  fs::remove_all(dir);
}

TEST_CASE("thread count does not change the output") {
  const fs::path a = fs::temp_directory_path() / "ddr-jobs-1";
  const fs::path b = fs::temp_directory_path() / "ddr-jobs-4";
  for (const auto& [dir, jobs] : {std::pair{a, 1}, std::pair{b, 4}}) {
    fs::remove_all(dir);
    GenerateOptions o;
    o.n_train = 6;
    o.master_seed = 5;
    o.out_dir = dir;
    o.jobs = jobs;
    generate_corpus(profile("acl"), AssetPool::procedural(), o);
  }
  for (int i = 0; i < 6; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "train/train-%06d.png", i);
    const cv::Mat x = cv::imread((a / name).string(), cv::IMREAD_UNCHANGED);
    const cv::Mat y = cv::imread((b / name).string(), cv::IMREAD_UNCHANGED);
    CHECK(cv::norm(x, y, cv::NORM_INF) == 0.0);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("downsample counts and bookkeeping") {
  CHECK(downsample_count(15000, 0.0625) == 938);
  CHECK(downsample_count(3, 0.5) == 2);
  CHECK(downsample_count(1, 0.4) == 0);
  const DatasetManifest m = pages(40);
  const DatasetManifest d = downsample(m, 0.25, 3);
  CHECK(d.images.size() == 10);
  CHECK(d.annotations.size() == 10);
  CHECK(d.provenance.sample_fraction == 0.25);
  CHECK(d.provenance.sample_seeds == std::vector<std::uint64_t>{3});
  for (std::size_t i = 1; i < d.images.size(); ++i) CHECK(d.images[i - 1].id < d.images[i].id);
  const DatasetManifest e = downsample(d, 0.5, 4);
  CHECK(e.provenance.sample_fraction == 0.125);
  CHECK(e.provenance.sample_seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(downsample(m, 0.25, 3) == d);
  CHECK(downsample(m, 1.0, 8).images == m.images);
  CHECK_THROWS_AS(downsample(m, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(downsample(m, 1.5, 1), ValidationError);
}

TEST_CASE("downsample picks pages uniformly") {
  const DatasetManifest m = pages(10);
  std::map<int, int> hits;
  const int trials = 4000;
  for (int s = 0; s < trials; ++s) {
    for (const auto& im : downsample(m, 0.3, static_cast<std::uint64_t>(s)).images) ++hits[im.id];
  }
  // Each page is kept with probability 0.3.
  for (const auto& [id, n] : hits) CHECK(std::abs(n / double(trials) - 0.3) < 0.03);
}

TEST_CASE("label noise bookkeeping and edge rates") {
  const DatasetManifest m = pages(200);
  std::string warning;
  const DatasetManifest none = inject_label_noise(m, {0.0, 1}, [&](const std::string& w) { warning = w; });
  CHECK(none.annotations == m.annotations);
  CHECK(none.provenance.noise_rate == 0.0);
  CHECK(none.provenance.noise_seed == 1u);
  CHECK(warning.empty());

  const DatasetManifest all = inject_label_noise(m, {1.0, 1}, [&](const std::string& w) { warning = w; });
  CHECK_FALSE(warning.empty());
  for (std::size_t i = 0; i < m.annotations.size(); ++i) {
    const int from = m.annotations[i].category_id;
    const int to = all.annotations[i].category_id;
    if (from == class_id(ClassLabel::kBodyText)) {
      CHECK(to == from);
    } else {
      CHECK(to != from);
      CHECK(to != class_id(ClassLabel::kBodyText));
    }
  }
  CHECK(inject_label_noise(m, {0.3, 9}) == inject_label_noise(m, {0.3, 9}));
  CHECK_THROWS_AS(inject_label_noise(m, {-0.1, 1}), ValidationError);
  CHECK_THROWS_AS(inject_label_noise(m, {1.1, 1}), ValidationError);
}

TEST_CASE("stats tables") {
  DatasetManifest m = pages(2);
  const StatsTable t = corpus_stats(m);
  CHECK(t.instances.size() == 2);
  CHECK(t.page_counts.size() == 18);
  CHECK(t.instances[0].center_x == doctest::Approx(0.035));
  const std::string inst = instances_csv(t);
  CHECK(inst.rfind("image_id,category_id,category,center_x,center_y,width,height\n", 0) == 0);
  CHECK(inst.find("1,1,algorithm,0.035000,0.035000,0.050000,0.050000\n") != std::string::npos);
  const std::string counts = counts_csv(t);
  CHECK(counts.rfind("image_id,category_id,category,count\n", 0) == 0);
  CHECK(counts.find("1,1,algorithm,1\n") != std::string::npos);
  CHECK(counts.find("1,0,abstract,0\n") != std::string::npos);
  m.annotations[0].category_id = 12;
  CHECK_THROWS_AS(corpus_stats(m), ValidationError);
}
