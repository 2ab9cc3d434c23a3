#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ddr/class_label.hpp"

namespace ddr {

// Closed interval. Geometric ranges are page fractions in [0, 1].
struct Range {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v, double tol = 0.0) const { return v >= min - tol && v <= max + tol; }
  double span() const { return max - min; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct IntRange {
  int min = 0;
  int max = 0;

  bool contains(int v) const { return v >= min && v <= max; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

enum class Slot { kMini, kLeft, kRight, kCenter };

struct PlacementSpec {
  Slot slot = Slot::kCenter;
  Range center_x;
  Range center_y;
  Range width;
  Range height;

  friend bool operator==(const PlacementSpec&, const PlacementSpec&) = default;
};

enum class Weight { kRegular, kBold };
enum class Slant { kUpright, kItalic };
enum class Caps { kNone, kSmallCaps, kAllCaps };
enum class Alignment { kLeft, kCenter, kDistributed };

struct FontSpec {
  std::string family;
  IntRange size_pt;
  Weight weight = Weight::kRegular;
  Slant slant = Slant::kUpright;
  Caps caps = Caps::kNone;
  Alignment alignment = Alignment::kLeft;

  friend bool operator==(const FontSpec&, const FontSpec&) = default;
};

// Typeset text roles; each maps to a list of candidate fonts.
enum class FontRole {
  kTitle,
  kAuthor,
  kAbstractHeader,
  kAbstractText,
  kKeywords,
  kHeading1,
  kHeading2,
  kHeading3,
  kBody,
  kCaption,
  kCaptionNumber,
};

inline constexpr FontRole kAllFontRoles[] = {
    FontRole::kTitle,     FontRole::kAuthor,   FontRole::kAbstractHeader, FontRole::kAbstractText,
    FontRole::kKeywords,  FontRole::kHeading1, FontRole::kHeading2,       FontRole::kHeading3,
    FontRole::kBody,      FontRole::kCaption,  FontRole::kCaptionNumber,
};

// Countable page elements. Mini variants are separate so their count ranges
// can be sampled independently of the regular ones.
enum class ElementKind { kFigure, kMiniFigure, kTable, kMiniTable, kAlgorithm, kEquation };

inline constexpr ElementKind kAllElementKinds[] = {
    ElementKind::kFigure,    ElementKind::kMiniFigure, ElementKind::kTable,
    ElementKind::kMiniTable, ElementKind::kAlgorithm,  ElementKind::kEquation,
};

constexpr ClassLabel element_class(ElementKind k) {
  switch (k) {
    case ElementKind::kFigure:
    case ElementKind::kMiniFigure: return ClassLabel::kFigure;
    case ElementKind::kTable:
    case ElementKind::kMiniTable: return ClassLabel::kTable;
    case ElementKind::kAlgorithm: return ClassLabel::kAlgorithm;
    case ElementKind::kEquation: return ClassLabel::kEquation;
  }
  return ClassLabel::kFigure;
}

constexpr bool is_mini(ElementKind k) {
  return k == ElementKind::kMiniFigure || k == ElementKind::kMiniTable;
}

enum class AbstractLayout { kLeftColumn, kTwoColumn };
enum class CaptionSide { kAbove, kBelow };

struct Margins {
  // Top and bottom are y coordinates of the content edges; left and right
  // are x coordinates. The bottom and right values are therefore near 1.
  Range top;
  Range bottom;
  Range left;
  Range right;

  friend bool operator==(const Margins&, const Margins&) = default;
};

struct PageTypeCounts {
  int title_pages = 0;
  int inner_pages = 0;

  friend bool operator==(const PageTypeCounts&, const PageTypeCounts&) = default;
};

struct CaptionSpec {
  Range center_y;
  Range width;
  Range height;

  friend bool operator==(const CaptionSpec&, const CaptionSpec&) = default;
};

struct AbstractShape {
  Range width;
  Range height;

  friend bool operator==(const AbstractShape&, const AbstractShape&) = default;
};

struct Distances {
  Range title_author;
  Range author_abstract;
  Range abstract_text;
  Range header_title;
  Range image_caption;
  Range image_text;

  friend bool operator==(const Distances&, const Distances&) = default;
};

struct StyleProfile {
  std::string name;
  Margins margins;
  Range column_width;
  Range column_spacing;
  PageTypeCounts page_types;
  std::map<ElementKind, IntRange> element_counts;
  IntRange author_lines{1, 4};
  // Visual classes use four slots; title and author use a single center slot.
  std::map<ClassLabel, std::vector<PlacementSpec>> placements;
  CaptionSpec caption;
  std::map<AbstractLayout, AbstractShape> abstract_shapes;
  std::map<ClassLabel, std::vector<CaptionSide>> caption_sides;
  Distances distances;
  std::map<FontRole, std::vector<FontSpec>> fonts;
  std::vector<AbstractLayout> abstract_layouts;
  std::vector<bool> keywords_line;

  friend bool operator==(const StyleProfile&, const StyleProfile&) = default;
};

// Throws ValidationError naming the first offending field.
void validate(const StyleProfile& p);

StyleProfile load_style_profile(const std::filesystem::path& path);
StyleProfile parse_style_profile(std::string_view text, std::string_view origin = "<string>");
std::string serialize_style_profile(const StyleProfile& p);
void save_style_profile(const StyleProfile& p, const std::filesystem::path& path);

// Union of two profiles: every range widened to cover both, lists
// concatenated without duplicates.
StyleProfile merge_profiles(const StyleProfile& a, const StyleProfile& b);

// Resolves "acl", "vis", "cs150", "acl+vis" (any '+'-joined list of bundled
// names, merged left to right) or a path to a profile file.
StyleProfile resolve_profile(std::string_view name_or_path);

std::filesystem::path data_dir();

std::string_view to_string(Slot s);
std::string_view to_string(FontRole r);
std::string_view to_string(ElementKind k);
std::string_view to_string(AbstractLayout l);
std::string_view to_string(CaptionSide s);
std::string_view to_string(Weight w);
std::string_view to_string(Slant s);
std::string_view to_string(Caps c);
std::string_view to_string(Alignment a);

}  // namespace ddr
