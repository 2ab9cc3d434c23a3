#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "ddr/compose.hpp"
#include "ddr/textgen.hpp"

namespace ddr {

// Logical font family -> font file, per weight and slant. Loaded from a
// text file of "family, weight, slant = path" lines.
class FontMap {
 public:
  static FontMap load(const std::filesystem::path& path);
  // DDR_FONT_MAP if set, otherwise <data_dir>/fonts.map.
  static FontMap bundled();
  static std::filesystem::path default_path();

  // Throws FontError if the family/weight/slant has no entry or the file is missing.
  std::filesystem::path resolve(const FontSpec& spec) const;
  // Family name -> file stem actually used (for provenance).
  std::map<std::string, std::string> substitutions() const;
  const std::filesystem::path& source() const { return source_; }

 private:
  std::map<std::string, std::filesystem::path> files_;  // "family|weight|slant"
  std::filesystem::path source_;
};

struct RenderSpec {
  int width_px = 1275;
  int height_px = 1650;
  double page_height_in = 11.0;
  bool antialias = true;
  bool degrade = false;

  double dpi() const { return height_px / page_height_in; }
};

// Throws ValidationError for pages smaller than 200 px on a side.
void validate(const RenderSpec& spec);

struct PixelBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

// Componentwise round(box * page size).
PixelBox to_pixels(const BBox& box, int width_px, int height_px);

struct PixelAnnotation {
  int element_id = 0;
  ClassLabel label = ClassLabel::kBodyText;
  PixelBox box;
  BBox norm;
};

// Ground truth for a layout without rasterizing it.
std::vector<PixelAnnotation> annotate(const PageLayout& layout, int width_px, int height_px);

struct RenderedPage {
  cv::Mat image;  // CV_8UC1, white background
  std::vector<PixelAnnotation> annotations;
  std::vector<std::string> truncations;  // one line per element whose text was cut
};

// Stateless apart from the shared read-only text source and font map; one
// instance may render pages on many threads at once.
class Renderer {
 public:
  Renderer(RenderSpec spec, const TextSource& text, FontMap fonts);

  const RenderSpec& spec() const { return spec_; }
  const FontMap& fonts() const { return fonts_; }

  RenderedPage render(const PageLayout& layout) const;

 private:
  RenderSpec spec_;
  const TextSource& text_;
  FontMap fonts_;
};

}  // namespace ddr
