#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddr/class_label.hpp"
#include "ddr/geometry.hpp"
#include "ddr/render.hpp"

namespace ddr {

struct ImageRecord {
  int id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::string page_kind;     // "title" or "inner"
  std::string page_ordinal;  // "first", "middle" or "last"; empty if unknown
  std::optional<std::string> document;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Annotation {
  int id = 0;
  int image_id = 0;
  int category_id = 0;
  PixelBox bbox;
  BBox bbox_norm;
  std::string asset;  // visual elements only

  double area() const { return static_cast<double>(bbox.w) * bbox.h; }
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Provenance {
  std::string generator = "ddr";
  std::string version;
  std::string profile;
  std::string split;
  std::uint64_t seed = 0;
  double noise_rate = 0.0;
  std::optional<std::uint64_t> noise_seed;
  double sample_fraction = 1.0;
  std::vector<std::uint64_t> sample_seeds;
  std::string asset_source;
  std::string asset_policy;
  std::string font_map;
  std::map<std::string, std::string> font_substitutions;
  int dpi = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct DatasetManifest {
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  Provenance provenance;

  const ImageRecord* image(int id) const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::string version_string();

nlohmann::ordered_json to_json(const DatasetManifest& m);
// Throws ParseError on a structurally wrong document.
DatasetManifest manifest_from_json(const nlohmann::json& j);

// Pretty-printed with a fixed key order, so identical manifests are identical bytes.
std::string dump_manifest(const DatasetManifest& m);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Schema rules checked on a raw manifest document. Each violation is
// "<rule>: <detail>"; an empty result means the document is valid.
std::vector<std::string> check_manifest_schema(const nlohmann::json& j);

// Writes `text` to `path` atomically enough for our purposes (temp + rename).
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ddr
