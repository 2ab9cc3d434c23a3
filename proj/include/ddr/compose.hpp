#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ddr/assets.hpp"
#include "ddr/geometry.hpp"
#include "ddr/sampler.hpp"
#include "ddr/textgen.hpp"

namespace ddr {

// Text is generated lazily at render time from this recipe, which keeps
// layouts small enough to hold thousands in memory.
struct TextRef {
  TextRole role = TextRole::kBody;
  FontRole font = FontRole::kBody;
  int approx_tokens = 1;
  int lines = 0;  // author blocks: number of author lines
  RngSeed seed;

  friend bool operator==(const TextRef&, const TextRef&) = default;
};

using ContentRef = std::variant<std::monostate, AssetRef, TextRef>;

struct PlacedElement {
  int id = 0;
  ClassLabel label = ClassLabel::kBodyText;
  BBox box;
  ContentRef content;
  bool mini = false;
  std::optional<int> linked_caption;  // visual element -> its caption
  std::optional<int> caption_of;      // caption -> its visual element
  std::optional<CaptionSide> caption_side;
  // Part of the stacked title block (title, author, teaser, abstract).
  bool header = false;

  friend bool operator==(const PlacedElement&, const PlacedElement&) = default;
};

struct ColumnGeometry {
  double x[2] = {0.0, 0.0};
  double width = 0.0;
  double top[2] = {0.0, 0.0};  // first y available to body text
  double bottom = 1.0;

  friend bool operator==(const ColumnGeometry&, const ColumnGeometry&) = default;
};

struct DroppedElement {
  ElementKind kind = ElementKind::kFigure;
  std::string reason;

  friend bool operator==(const DroppedElement&, const DroppedElement&) = default;
};

struct PageLayout {
  std::string page_id;
  PageKind page_kind = PageKind::kInner;
  PageConfig config;
  RngSeed seed;
  ColumnGeometry columns;
  // Reading order: title block first, then column-major, top to bottom.
  std::vector<PlacedElement> elements;
  std::vector<DroppedElement> dropped;
  bool teaser = false;

  const PlacedElement* find(int id) const;
};

struct ComposeOptions {
  double page_width_in = 8.5;
  double page_height_in = 11.0;
  int max_attempts = 50;
  double caption_probability = 0.9;
  // Title pages only: a full-width figure between the author block and the abstract.
  double teaser_probability = 0.10;
  // Line pitch as a multiple of the font size.
  double line_spacing = 1.2;
};

// Normalized height of one text line at `size_pt`.
double line_height(int size_pt, const ComposeOptions& opt);

// Returns `candidate` if it overlaps none of `boxes`, otherwise resamples
// until a free box is found; nullopt after `max_attempts` candidates.
std::optional<BBox> place_nonoverlapping(std::span<const BBox> boxes, BBox candidate, int max_attempts,
                                         const std::function<BBox()>& resample);

// Places visual elements (largest first), attaches captions, builds the
// title block on title pages, then fills the remaining column space with
// body text. Elements that find no free position after max_attempts are
// dropped and listed in `dropped`. Throws ExhaustedAssetsError or
// ComposeError (title block cannot fit).
PageLayout compose_page(const PageConfig& config, const AssetPool& assets, RngSeed seed,
                        const ComposeOptions& options = {});

// Replaces any existing body-text elements with blocks tiling the residual
// vertical spans of each column. Spans shorter than one body line are skipped.
PageLayout fill_body_text(PageLayout layout, const ComposeOptions& options = {});

}  // namespace ddr
