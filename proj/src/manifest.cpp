#include "ddr/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ddr/error.hpp"

namespace ddr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key, where);
}

}  // namespace

std::string version_string() {
#ifdef DDR_VERSION
  return DDR_VERSION;
#else
  return "0.0.0";
#endif
}

const ImageRecord* DatasetManifest::image(int id) const {
  for (const auto& im : images) {
    if (im.id == id) return &im;
  }
  return nullptr;
}

ordered_json to_json(const DatasetManifest& m) {
  ordered_json out;
  const Provenance& p = m.provenance;
  ordered_json prov;
  prov["generator"] = p.generator;
  prov["version"] = p.version;
  prov["profile"] = p.profile;
  prov["split"] = p.split;
  prov["seed"] = p.seed;
  prov["noise_rate"] = p.noise_rate;
  prov["noise_seed"] = p.noise_seed ? ordered_json(*p.noise_seed) : ordered_json(nullptr);
  prov["sample_fraction"] = p.sample_fraction;
  prov["sample_seeds"] = p.sample_seeds;
  prov["asset_source"] = p.asset_source;
  prov["asset_policy"] = p.asset_policy;
  prov["font_map"] = p.font_map;
  prov["font_substitutions"] = ordered_json::object();
  for (const auto& [k, v] : p.font_substitutions) prov["font_substitutions"][k] = v;
  prov["dpi"] = p.dpi;
  out["provenance"] = prov;

  out["categories"] = ordered_json::array();
  for (ClassLabel c : kAllClasses) {
    out["categories"].push_back({{"id", class_id(c)}, {"name", class_name(c)}, {"supercategory", "layout"}});
  }

  out["images"] = ordered_json::array();
  for (const auto& im : m.images) {
    ordered_json r;
    r["id"] = im.id;
    r["file_name"] = im.file_name;
    r["width"] = im.width;
    r["height"] = im.height;
    r["page_kind"] = im.page_kind;
    r["page_ordinal"] = im.page_ordinal;
    if (im.document) r["document"] = *im.document;
    r["seed"] = im.seed;
    r["stream"] = im.stream;
    out["images"].push_back(std::move(r));
  }

  out["annotations"] = ordered_json::array();
  for (const auto& a : m.annotations) {
    ordered_json r;
    r["id"] = a.id;
    r["image_id"] = a.image_id;
    r["category_id"] = a.category_id;
    r["bbox"] = {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h};
    r["bbox_norm"] = {a.bbox_norm.x, a.bbox_norm.y, a.bbox_norm.w, a.bbox_norm.h};
    r["area"] = a.area();
    r["iscrowd"] = 0;
    if (!a.asset.empty()) r["asset"] = a.asset;
    out["annotations"].push_back(std::move(r));
  }
  return out;
}

DatasetManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("manifest: expected a JSON object");
  DatasetManifest m;
  const json& pj = j.contains("provenance") ? j.at("provenance") : json::object();
  Provenance& p = m.provenance;
  const std::string w = "provenance";
  p.generator = field_or<std::string>(pj, "generator", "", w);
  p.version = field_or<std::string>(pj, "version", "", w);
  p.profile = field_or<std::string>(pj, "profile", "", w);
  p.split = field_or<std::string>(pj, "split", "", w);
  p.seed = field_or<std::uint64_t>(pj, "seed", 0, w);
  p.noise_rate = field_or<double>(pj, "noise_rate", 0.0, w);
  if (pj.contains("noise_seed") && !pj.at("noise_seed").is_null()) p.noise_seed = field<std::uint64_t>(pj, "noise_seed", w);
  p.sample_fraction = field_or<double>(pj, "sample_fraction", 1.0, w);
  p.sample_seeds = field_or<std::vector<std::uint64_t>>(pj, "sample_seeds", {}, w);
  p.asset_source = field_or<std::string>(pj, "asset_source", "", w);
  p.asset_policy = field_or<std::string>(pj, "asset_policy", "", w);
  p.font_map = field_or<std::string>(pj, "font_map", "", w);
  p.font_substitutions = field_or<std::map<std::string, std::string>>(pj, "font_substitutions", {}, w);
  p.dpi = field_or<int>(pj, "dpi", 0, w);

  if (!j.contains("images") || !j.at("images").is_array()) throw ParseError("manifest: missing 'images' array");
  if (!j.contains("annotations") || !j.at("annotations").is_array()) {
    throw ParseError("manifest: missing 'annotations' array");
  }
  for (std::size_t i = 0; i < j.at("images").size(); ++i) {
    const json& r = j.at("images")[i];
    const std::string where = "images[" + std::to_string(i) + "]";
    ImageRecord im;
    im.id = field<int>(r, "id", where);
    im.file_name = field<std::string>(r, "file_name", where);
    im.width = field<int>(r, "width", where);
    im.height = field<int>(r, "height", where);
    im.page_kind = field_or<std::string>(r, "page_kind", "", where);
    im.page_ordinal = field_or<std::string>(r, "page_ordinal", "", where);
    if (r.contains("document") && !r.at("document").is_null()) im.document = field<std::string>(r, "document", where);
    im.seed = field_or<std::uint64_t>(r, "seed", 0, where);
    im.stream = field_or<std::uint64_t>(r, "stream", 0, where);
    m.images.push_back(std::move(im));
  }
  for (std::size_t i = 0; i < j.at("annotations").size(); ++i) {
    const json& r = j.at("annotations")[i];
    const std::string where = "annotations[" + std::to_string(i) + "]";
    Annotation a;
    a.id = field<int>(r, "id", where);
    a.image_id = field<int>(r, "image_id", where);
    a.category_id = field<int>(r, "category_id", where);
    const auto b = field<std::vector<double>>(r, "bbox", where);
    if (b.size() != 4) throw ParseError(where + ".bbox: expected 4 numbers");
    a.bbox = PixelBox{static_cast<int>(std::lround(b[0])), static_cast<int>(std::lround(b[1])),
                      static_cast<int>(std::lround(b[2])), static_cast<int>(std::lround(b[3]))};
    if (r.contains("bbox_norm")) {
      const auto n = field<std::vector<double>>(r, "bbox_norm", where);
      if (n.size() != 4) throw ParseError(where + ".bbox_norm: expected 4 numbers");
      a.bbox_norm = BBox{n[0], n[1], n[2], n[3]};
    } else {
      const ImageRecord* im = m.image(a.image_id);
      if (im && im->width > 0 && im->height > 0) {
        a.bbox_norm = BBox{b[0] / im->width, b[1] / im->height, b[2] / im->width, b[3] / im->height};
      }
    }
    a.asset = field_or<std::string>(r, "asset", "", where);
    m.annotations.push_back(std::move(a));
  }
  return m;
}

std::string dump_manifest(const DatasetManifest& m) { return to_json(m).dump(1) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  write_text_file(path, dump_manifest(m));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

std::vector<std::string> check_manifest_schema(const json& j) {
  std::vector<std::string> v;
  if (!j.is_object()) return {"document: not a JSON object"};
  for (const char* key : {"provenance", "categories", "images", "annotations"}) {
    if (!j.contains(key)) v.push_back(std::string("required-key: missing '") + key + "'");
  }
  if (!v.empty()) return v;

  const json& cats = j.at("categories");
  if (!cats.is_array() || cats.size() != kNumClasses) {
    v.push_back("categories: expected " + std::to_string(kNumClasses) + " categories");
  } else {
    for (ClassLabel c : kAllClasses) {
      const json& cj = cats[static_cast<std::size_t>(class_id(c))];
      if (!cj.is_object() || cj.value("id", -1) != class_id(c) || cj.value("name", "") != class_name(c)) {
        v.push_back("categories: entry " + std::to_string(class_id(c)) + " must be {id: " +
                    std::to_string(class_id(c)) + ", name: " + std::string(class_name(c)) + "}");
      }
    }
  }

  const json& prov = j.at("provenance");
  for (const char* key : {"generator", "version", "profile", "seed", "noise_rate", "sample_fraction"}) {
    if (!prov.is_object() || !prov.contains(key)) v.push_back(std::string("provenance: missing '") + key + "'");
  }

  std::map<int, std::pair<int, int>> dims;
  for (const json& im : j.at("images")) {
    if (!im.is_object() || !im.contains("id") || !im["id"].is_number_integer() || !im.contains("width") ||
        !im.contains("height") || !im.contains("file_name")) {
      v.push_back("image-fields: image record needs integer id, file_name, width, height");
      continue;
    }
    const int id = im["id"].get<int>();
    if (dims.count(id)) v.push_back("image-id-unique: duplicate image id " + std::to_string(id));
    dims[id] = {im["width"].get<int>(), im["height"].get<int>()};
  }

  std::set<int> ann_ids;
  for (const json& a : j.at("annotations")) {
    if (!a.is_object() || !a.contains("id") || !a.contains("image_id") || !a.contains("category_id") ||
        !a.contains("bbox") || !a["bbox"].is_array() || a["bbox"].size() != 4) {
      v.push_back("annotation-fields: annotation needs id, image_id, category_id and a 4-number bbox");
      continue;
    }
    const int id = a["id"].get<int>();
    const std::string tag = "annotation " + std::to_string(id);
    if (!ann_ids.insert(id).second) v.push_back("annotation-id-unique: duplicate " + tag);
    const int cat = a["category_id"].get<int>();
    if (!class_from_id(cat)) v.push_back("category-id: " + tag + " has category_id " + std::to_string(cat));
    const auto it = dims.find(a["image_id"].get<int>());
    if (it == dims.end()) {
      v.push_back("image-ref: " + tag + " refers to unknown image " + std::to_string(a["image_id"].get<int>()));
      continue;
    }
    const double x = a["bbox"][0].get<double>(), y = a["bbox"][1].get<double>();
    const double w = a["bbox"][2].get<double>(), h = a["bbox"][3].get<double>();
    if (w <= 0 || h <= 0) v.push_back("bbox-positive: " + tag + " has non-positive extent");
    if (x < 0 || y < 0 || x + w > it->second.first || y + h > it->second.second) {
      v.push_back("bbox-bounds: " + tag + " exceeds image bounds");
    }
  }
  return v;
}

}  // namespace ddr
