#pragma once

#include <map>
#include <memory>
#include <optional>

#include "ddr/geometry.hpp"
#include "ddr/rng.hpp"
#include "ddr/style.hpp"

namespace ddr {

enum class PageKind { kTitle, kInner };

std::string_view to_string(PageKind k);

struct ResolvedFont {
  FontSpec spec;
  int size_pt = 10;

  friend bool operator==(const ResolvedFont&, const ResolvedFont&) = default;
};

struct ChosenDistances {
  double title_author = 0.0;
  double author_abstract = 0.0;
  double abstract_text = 0.0;
  double header_title = 0.0;
  double image_caption = 0.0;
  double image_text = 0.0;

  friend bool operator==(const ChosenDistances&, const ChosenDistances&) = default;
};

// One concrete draw from a StyleProfile. Margins follow the profile
// convention: top/bottom are y of the content edges, left/right are x.
struct PageConfig {
  std::shared_ptr<const StyleProfile> profile;
  PageKind page_kind = PageKind::kInner;
  double margin_top = 0.0;
  double margin_bottom = 1.0;
  double margin_left = 0.0;
  double margin_right = 1.0;
  double column_width = 0.0;
  double column_spacing = 0.0;
  std::map<ElementKind, int> element_counts;
  std::map<FontRole, ResolvedFont> fonts;
  ChosenDistances distances;
  AbstractLayout abstract_layout = AbstractLayout::kLeftColumn;
  bool keywords_line = false;
  int author_lines = 1;
  CaptionSide table_caption_side = CaptionSide::kBelow;

  double usable_width() const { return margin_right - margin_left; }
  double column_x(int column) const {
    return margin_left + (column == 0 ? 0.0 : column_width + column_spacing);
  }
};

// Slack allowed when checking 2 * column_width + spacing against the usable width.
inline constexpr double kColumnTolerance = 0.01;
inline constexpr int kColumnResampleLimit = 100;

// Draws every scalar uniformly inside its profile range. Page kind is drawn
// in proportion to the profile's title/inner counts unless forced.
// Throws GeometryError if the column constraint cannot be met.
PageConfig sample_page_config(const std::shared_ptr<const StyleProfile>& profile, RngSeed seed,
                              std::optional<PageKind> force_kind = std::nullopt);
PageConfig sample_page_config(const StyleProfile& profile, RngSeed seed,
                              std::optional<PageKind> force_kind = std::nullopt);

// Throws ValidationError if any sampled value lies outside its profile range
// or the column constraint is violated.
void check_page_config(const PageConfig& config);

BBox sample_placement(const PlacementSpec& spec, RngSeed seed);
BBox sample_placement(const PlacementSpec& spec, Rng& rng);

}  // namespace ddr
