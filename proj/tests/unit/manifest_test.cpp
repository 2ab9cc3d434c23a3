#include <doctest.h>

#include <filesystem>
#include <memory>
#include <string>

#include "ddr/corpus.hpp"
#include "ddr/error.hpp"
#include "ddr/manifest.hpp"

using namespace ddr;
using nlohmann::json;

namespace {

DatasetManifest corpus(int n = 8) {
  GenerateOptions o;
  o.n_train = n;
  o.master_seed = 12;
  o.write_images = false;
  o.profile_name = "acl";
  const auto p = std::make_shared<const StyleProfile>(resolve_profile("acl"));
  return generate_corpus(p, AssetPool::procedural(), o).train.manifest;
}

bool has_rule(const std::vector<std::string>& v, const std::string& rule) {
  for (const auto& s : v) {
    if (s.rfind(rule + ":", 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("manifest json round trip is lossless and byte-stable") {
  const DatasetManifest m = corpus();
  const std::string text = dump_manifest(m);
  const DatasetManifest back = manifest_from_json(json::parse(text));
  CHECK(back == m);
  CHECK(dump_manifest(back) == text);
  CHECK(check_manifest_schema(json::parse(text)).empty());
}

TEST_CASE("manifest layout") {
  const DatasetManifest m = corpus(4);
  const json j = json::parse(dump_manifest(m));
  CHECK(j["provenance"]["generator"] == "ddr");
  CHECK(j["provenance"]["profile"] == "acl");
  CHECK(j["provenance"]["split"] == "train");
  REQUIRE(j["categories"].size() == 9);
  CHECK(j["categories"][3]["name"] == "body-text");
  CHECK(j["categories"][8]["name"] == "title");
  CHECK(j["images"][0]["id"] == 1);
  CHECK(j["images"][0]["file_name"] == "train/train-000000.png");
  const json& a = j["annotations"][0];
  CHECK(a["id"] == 1);
  CHECK(a["bbox"].size() == 4);
  CHECK(a["bbox_norm"].size() == 4);
  CHECK(a["iscrowd"] == 0);
  CHECK(a["area"].get<double>() == a["bbox"][2].get<double>() * a["bbox"][3].get<double>());
}

TEST_CASE("save and load") {
  const auto path = std::filesystem::temp_directory_path() / "ddr-manifest-test.json";
  const DatasetManifest m = corpus(3);
  save_manifest(m, path);
  CHECK(load_manifest(path) == m);
  CHECK(read_text_file(path) == dump_manifest(m));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_manifest(path), IoError);
}

TEST_CASE("schema checker flags each rule") {
  const json good = json::parse(dump_manifest(corpus(3)));
  CHECK(check_manifest_schema(good).empty());
  CHECK(has_rule(check_manifest_schema(json::array()), "document"));

  json j = good;
  j.erase("images");
  CHECK(has_rule(check_manifest_schema(j), "required-key"));

  j = good;
  j["categories"][2]["name"] = "writer";
  CHECK(has_rule(check_manifest_schema(j), "categories"));

  j = good;
  j["provenance"].erase("seed");
  CHECK(has_rule(check_manifest_schema(j), "provenance"));

  j = good;
  j["images"][0].erase("width");
  CHECK(has_rule(check_manifest_schema(j), "image-fields"));

  j = good;
  j["images"][1]["id"] = j["images"][0]["id"];
  CHECK(has_rule(check_manifest_schema(j), "image-id-unique"));

  j = good;
  j["annotations"][0].erase("bbox");
  CHECK(has_rule(check_manifest_schema(j), "annotation-fields"));

  j = good;
  j["annotations"][1]["id"] = j["annotations"][0]["id"];
  CHECK(has_rule(check_manifest_schema(j), "annotation-id-unique"));

  j = good;
  j["annotations"][0]["category_id"] = 9;
  CHECK(has_rule(check_manifest_schema(j), "category-id"));

  j = good;
  j["annotations"][0]["image_id"] = 999;
  CHECK(has_rule(check_manifest_schema(j), "image-ref"));

  j = good;
  j["annotations"][0]["bbox"][2] = 0;
  CHECK(has_rule(check_manifest_schema(j), "bbox-positive"));

  j = good;
  j["annotations"][0]["bbox"][0] = 5000;
  CHECK(has_rule(check_manifest_schema(j), "bbox-bounds"));
}

TEST_CASE("structurally wrong documents raise ParseError") {
  CHECK_THROWS_AS(manifest_from_json(json::parse("{\"images\": 3}")), ParseError);
  CHECK_THROWS_AS(manifest_from_json(json::parse("[1, 2]")), ParseError);
}
