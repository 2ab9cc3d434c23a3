#include "ddr/compose.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "ddr/error.hpp"

namespace ddr {

namespace {

// Title and author boxes start above this fraction of the page height.
constexpr double kTitleZone = 0.30;
constexpr double kTitleZoneSlack = 0.005;
// Teaser figure height range (page fraction).
constexpr Range kTeaserHeight{0.12, 0.28};
// Text is requested slightly longer than the box holds; the renderer truncates.
constexpr double kTextOverfill = 1.15;
constexpr double kCharsPerToken = 6.0;
constexpr std::uint64_t kBodySeedBase = 100000;

bool inside_unit(const BBox& b) { return b.x >= 0.0 && b.y >= 0.0 && b.right() <= 1.0 && b.bottom() <= 1.0; }

double draw(Rng& rng, const Range& r) { return rng.uniform(r.min, r.max); }

struct Proposal {
  BBox element;
  std::optional<BBox> caption;
  CaptionSide side = CaptionSide::kBelow;
  double gap = 0.0;
};

// The element shrinks to its asset's aspect later and the caption follows it,
// so the whole hull of element, gap and caption must be free.
bool proposal_free(const std::vector<BBox>& boxes, const Proposal& p) {
  BBox hull = p.element;
  if (p.caption) {
    const double x0 = std::min(hull.x, p.caption->x);
    const double y0 = std::min(hull.y, p.caption->y);
    const double x1 = std::max(hull.right(), p.caption->right());
    const double y1 = std::max(hull.bottom(), p.caption->bottom());
    hull = BBox{x0, y0, x1 - x0, y1 - y0};
  }
  for (const BBox& b : boxes) {
    if (overlaps(b, hull)) return false;
  }
  return true;
}

template <class Propose>
std::optional<Proposal> place_compound(const std::vector<BBox>& boxes, std::optional<Proposal> first,
                                       int max_attempts, Propose&& propose) {
  std::optional<Proposal> cand = std::move(first);
  for (int i = 0; i < max_attempts; ++i) {
    if (i > 0) cand = propose();
    if (cand && proposal_free(boxes, *cand)) return cand;
  }
  return std::nullopt;
}

class Composer {
 public:
  Composer(const PageConfig& config, const AssetPool& assets, RngSeed seed, const ComposeOptions& opt)
      : c_(config), p_(*config.profile), assets_(assets), opt_(opt), rng_(Rng(seed).fork("compose")) {
    layout_.page_kind = config.page_kind;
    layout_.config = config;
    layout_.seed = seed;
    auto& g = layout_.columns;
    g.x[0] = config.column_x(0);
    g.x[1] = config.column_x(1);
    g.width = config.column_width;
    g.top[0] = g.top[1] = config.margin_top;
    g.bottom = config.margin_bottom;
    region_top_ = config.margin_top;
    counts_ = config.element_counts;
  }

  PageLayout run() {
    if (c_.page_kind == PageKind::kTitle) build_title_block();
    place_visuals();
    return fill_body_text(std::move(layout_), opt_);
  }

 private:
  double lh(FontRole role) const { return line_height(c_.fonts.at(role).size_pt, opt_); }

  int approx_tokens(double w, double h, FontRole role) const {
    const double pt = c_.fonts.at(role).size_pt;
    const double chars_per_line = w * opt_.page_width_in * 72.0 / (0.5 * pt);
    const double lines = std::max(1.0, std::floor(h / lh(role) + 1e-9));
    return std::max(1, static_cast<int>(std::lround(lines * chars_per_line / kCharsPerToken * kTextOverfill)));
  }

  double physical_aspect(const BBox& b) const {
    return (b.w * opt_.page_width_in) / (b.h * opt_.page_height_in);
  }

  int add(PlacedElement e) {
    e.id = next_id_++;
    layout_.elements.push_back(std::move(e));
    return layout_.elements.back().id;
  }

  PlacedElement text_element(ClassLabel label, const BBox& box, TextRole role, FontRole font) {
    PlacedElement e;
    e.label = label;
    e.box = box;
    e.content = TextRef{role, font, approx_tokens(box.w, box.h, font), 0, rng_.child_seed(next_seed_++)};
    return e;
  }

  BBox caption_box(const BBox& element, double cap_w, double cap_h, CaptionSide side, double gap) const {
    BBox cap = box_from_center(element.center_x(), 0.0, cap_w, cap_h);
    cap.y = side == CaptionSide::kBelow ? element.bottom() + gap : element.y - gap - cap_h;
    return cap;
  }

  void link_caption(int element_id, int caption_id, CaptionSide side) {
    for (auto& e : layout_.elements) {
      if (e.id == element_id) e.linked_caption = caption_id;
      if (e.id == caption_id) {
        e.caption_of = element_id;
        e.caption_side = side;
      }
    }
  }

  // Title, authors, optional teaser and abstract, stacked top to bottom.
  void build_title_block() {
    const PlacementSpec& ts = p_.placements.at(ClassLabel::kTitle).front();
    const PlacementSpec& as = p_.placements.at(ClassLabel::kAuthor).front();

    const int title_lines = rng_.bernoulli(0.35) ? 2 : 1;
    BBox title = clamp_to_unit(box_from_center(draw(rng_, ts.center_x), draw(rng_, ts.center_y),
                                               draw(rng_, ts.width), title_lines * lh(FontRole::kTitle)));
    title.y = std::max(title.y, c_.distances.header_title);

    BBox author = clamp_to_unit(
        box_from_center(draw(rng_, as.center_x), 0.5, draw(rng_, as.width), c_.author_lines * lh(FontRole::kAuthor)));
    author.y = title.bottom() + c_.distances.title_author;
    const double limit = kTitleZone - kTitleZoneSlack;
    if (author.y > limit) {
      const double shift = author.y - limit;
      title.y -= shift;
      author.y -= shift;
      if (title.y < 0.0) throw ComposeError("title block does not fit above " + std::to_string(kTitleZone));
    }

    PlacedElement te = text_element(ClassLabel::kTitle, title, TextRole::kTitle, FontRole::kTitle);
    te.header = true;
    add(te);
    PlacedElement ae;
    ae.label = ClassLabel::kAuthor;
    ae.box = author;
    ae.header = true;
    ae.content = TextRef{TextRole::kAuthor, FontRole::kAuthor, c_.author_lines * 6, c_.author_lines,
                         rng_.child_seed(next_seed_++)};
    add(ae);

    const double full_w = 2.0 * c_.column_width + c_.column_spacing;
    double next_y = author.bottom() + c_.distances.author_abstract;

    if (counts_[ElementKind::kFigure] > 0 && rng_.bernoulli(opt_.teaser_probability)) {
      const PlacementSpec* spec = nullptr;
      for (const PlacementSpec& s : p_.placements.at(ClassLabel::kFigure)) {
        if (s.slot == Slot::kCenter) spec = &s;
      }
      if (spec) {
        const double w = std::clamp(full_w, spec->width.min, spec->width.max);
        BBox fig = box_from_center(draw(rng_, spec->center_x), 0.0, w, draw(rng_, kTeaserHeight));
        fig.y = next_y;
        const double gap = c_.distances.image_caption;
        const int cap_lines = static_cast<int>(rng_.uniform_int(1, 2));
        BBox cap = caption_box(fig, 0.9 * w, cap_lines * lh(FontRole::kCaption), CaptionSide::kBelow, gap);
        if (inside_unit(fig) && inside_unit(cap) && spec->center_y.contains(fig.center_y()) &&
            cap.bottom() < c_.margin_bottom - 0.3) {
          const int fid = place_visual(ClassLabel::kFigure, false, fig, cap, CaptionSide::kBelow, gap, true);
          --counts_[ElementKind::kFigure];
          layout_.teaser = true;
          const PlacedElement* cap_el = layout_.find(*layout_.find(fid)->linked_caption);
          next_y = std::max(fig.bottom(), cap_el->box.bottom()) + c_.distances.image_text;
        }
      }
    }

    const AbstractLayout al = c_.abstract_layout;
    const AbstractShape& shape = p_.abstract_shapes.at(al);
    const double min_h = 3.0 * lh(FontRole::kAbstractText);
    double h = std::max(draw(rng_, shape.height), min_h);
    const double room = c_.margin_bottom - 2.0 * lh(FontRole::kBody) - next_y;
    h = std::min(h, room);
    if (h < min_h) throw ComposeError("no room for the abstract below the title block");
    BBox abs;
    if (al == AbstractLayout::kLeftColumn) {
      const double w = std::min(draw(rng_, shape.width), c_.column_width);
      abs = BBox{c_.column_x(0) + 0.5 * (c_.column_width - w), next_y, w, h};
    } else {
      const double w = std::min(draw(rng_, shape.width), full_w);
      abs = BBox{c_.margin_left + 0.5 * (full_w - w), next_y, w, h};
    }
    PlacedElement be = text_element(ClassLabel::kAbstract, abs, TextRole::kAbstract, FontRole::kAbstractText);
    be.header = true;
    add(be);

    auto& g = layout_.columns;
    if (al == AbstractLayout::kLeftColumn) {
      g.top[0] = abs.bottom() + c_.distances.abstract_text;
      g.top[1] = next_y;
    } else {
      g.top[0] = g.top[1] = abs.bottom() + c_.distances.abstract_text;
    }
    region_top_ = next_y;
    for (const auto& e : layout_.elements) obstacles_.push_back(e.box);
  }

  struct Item {
    ElementKind kind;
    bool captioned = false;
    CaptionSide side = CaptionSide::kBelow;
    std::optional<Proposal> first;
    double area = 0.0;
  };

  std::optional<Proposal> propose(const Item& item) {
    const ClassLabel label = element_class(item.kind);
    const bool mini = is_mini(item.kind);
    std::vector<const PlacementSpec*> specs;
    const auto it = p_.placements.find(label);
    if (it == p_.placements.end()) return std::nullopt;
    for (const PlacementSpec& s : it->second) {
      if ((s.slot == Slot::kMini) == mini) specs.push_back(&s);
    }
    if (specs.empty()) return std::nullopt;
    const PlacementSpec& spec = *specs[rng_.index(specs.size())];
    const double cx = draw(rng_, spec.center_x);
    const double cy = draw(rng_, spec.center_y);
    const double w = draw(rng_, spec.width);
    const double h = draw(rng_, spec.height);
    Proposal p;
    p.element = box_from_center(cx, cy, w, h);
    if (!within_region(p.element)) return std::nullopt;
    if (!item.captioned) return p;

    p.side = item.side;
    p.gap = draw(rng_, p_.distances.image_caption);
    const int lines = static_cast<int>(rng_.uniform_int(1, 3));
    const double cap_w = std::clamp(draw(rng_, p_.caption.width), std::min(w, 0.5 * c_.column_width),
                                    std::max(w, c_.column_width));
    p.caption = caption_box(p.element, cap_w, lines * lh(FontRole::kCaption), p.side, p.gap);
    if (!within_region(*p.caption)) return std::nullopt;
    return p;
  }

  bool within_region(const BBox& b) const {
    return inside_unit(b) && b.y >= region_top_ && b.bottom() <= c_.margin_bottom;
  }

  // Checks out an asset, shrinks the box around its center to the asset's
  // aspect ratio and re-attaches the caption at the same gap. Returns the
  // element id.
  int place_visual(ClassLabel label, bool mini, BBox box, std::optional<BBox> caption, CaptionSide side, double gap,
                   bool header) {
    const AssetRef ref = assets_.checkout(label, physical_aspect(box), rng_.child_seed(next_seed_++));
    const double want = ref.aspect();
    const double have = physical_aspect(box);
    const double cx = box.center_x();
    const double cy = box.center_y();
    if (want > have) {
      box.h = box.w * opt_.page_width_in / (want * opt_.page_height_in);
    } else {
      box.w = want * box.h * opt_.page_height_in / opt_.page_width_in;
    }
    box = box_from_center(cx, cy, box.w, box.h);

    PlacedElement e;
    e.label = label;
    e.box = box;
    e.mini = mini;
    e.header = header;
    e.content = ref;
    const int id = add(e);
    obstacles_.push_back(box);

    if (caption) {
      const BBox cap = caption_box(box, caption->w, caption->h, side, gap);
      PlacedElement ce = text_element(ClassLabel::kCaption, cap, TextRole::kCaption, FontRole::kCaption);
      ce.header = header;
      const int cid = add(ce);
      link_caption(id, cid, side);
      obstacles_.push_back(cap);
    }
    return id;
  }

  void place_visuals() {
    std::vector<Item> items;
    for (ElementKind k : kAllElementKinds) {
      const ClassLabel label = element_class(k);
      for (int i = 0; i < counts_[k]; ++i) {
        Item item{k, false, CaptionSide::kBelow, std::nullopt, 0.0};
        if (label != ClassLabel::kEquation) item.captioned = rng_.bernoulli(opt_.caption_probability);
        if (label == ClassLabel::kTable) item.side = c_.table_caption_side;
        if (label == ClassLabel::kAlgorithm) item.side = CaptionSide::kAbove;
        item.first = propose(item);
        item.area = item.first ? item.first->element.area() : 0.0;
        items.push_back(std::move(item));
      }
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.area > b.area; });

    for (Item& item : items) {
      auto placed = place_compound(obstacles_, item.first, opt_.max_attempts, [&] { return propose(item); });
      if (!placed) {
        layout_.dropped.push_back(
            {item.kind, "no free position after " + std::to_string(opt_.max_attempts) + " attempts"});
        continue;
      }
      place_visual(element_class(item.kind), is_mini(item.kind), placed->element, placed->caption, placed->side,
                   placed->gap, false);
    }
  }

  const PageConfig& c_;
  const StyleProfile& p_;
  const AssetPool& assets_;
  const ComposeOptions& opt_;
  Rng rng_;
  PageLayout layout_;
  std::map<ElementKind, int> counts_;
  std::vector<BBox> obstacles_;
  double region_top_ = 0.0;
  int next_id_ = 0;
  std::uint64_t next_seed_ = 0;
};

// Sort into reading order and renumber ids, remapping caption links.
void finalize_order(PageLayout& layout) {
  const double split = layout.columns.x[1] - 0.5 * (layout.columns.x[1] - layout.columns.x[0] - layout.columns.width);
  auto key = [&](const PlacedElement& e) {
    const int col = e.box.center_x() < split ? 0 : 1;
    return std::make_tuple(e.header ? 0 : 1, e.header ? 0 : col, e.box.y, e.box.x, e.id);
  };
  std::stable_sort(layout.elements.begin(), layout.elements.end(),
                   [&](const PlacedElement& a, const PlacedElement& b) { return key(a) < key(b); });
  std::map<int, int> remap;
  for (std::size_t i = 0; i < layout.elements.size(); ++i) remap[layout.elements[i].id] = static_cast<int>(i);
  for (auto& e : layout.elements) {
    e.id = remap.at(e.id);
    if (e.linked_caption) e.linked_caption = remap.at(*e.linked_caption);
    if (e.caption_of) e.caption_of = remap.at(*e.caption_of);
  }
}

}  // namespace

const PlacedElement* PageLayout::find(int id) const {
  for (const auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

double line_height(int size_pt, const ComposeOptions& opt) {
  return size_pt * opt.line_spacing / 72.0 / opt.page_height_in;
}

std::optional<BBox> place_nonoverlapping(std::span<const BBox> boxes, BBox candidate, int max_attempts,
                                         const std::function<BBox()>& resample) {
  for (int i = 0; i < max_attempts; ++i) {
    if (i > 0) candidate = resample();
    const bool free = std::none_of(boxes.begin(), boxes.end(), [&](const BBox& b) { return overlaps(b, candidate); });
    if (free) return candidate;
  }
  return std::nullopt;
}

PageLayout compose_page(const PageConfig& config, const AssetPool& assets, RngSeed seed,
                        const ComposeOptions& options) {
  if (!config.profile) throw ComposeError("page config has no profile");
  return Composer(config, assets, seed, options).run();
}

PageLayout fill_body_text(PageLayout layout, const ComposeOptions& options) {
  std::erase_if(layout.elements, [](const PlacedElement& e) { return e.label == ClassLabel::kBodyText; });
  const PageConfig& c = layout.config;
  const auto& g = layout.columns;
  const double body_lh = line_height(c.fonts.at(FontRole::kBody).size_pt, options);
  const double gap = c.distances.image_text;
  const int body_pt = c.fonts.at(FontRole::kBody).size_pt;
  Rng rng = Rng(layout.seed).fork("body-text");

  int next_id = 0;
  for (const auto& e : layout.elements) next_id = std::max(next_id, e.id + 1);

  std::uint64_t block = 0;
  for (int col = 0; col < 2; ++col) {
    const double x0 = g.x[col];
    const double x1 = x0 + g.width;
    std::vector<std::pair<double, double>> blocked;
    for (const auto& e : layout.elements) {
      if (e.header && !is_visual_class(e.label) && e.label != ClassLabel::kCaption) continue;
      if (std::min(x1, e.box.right()) - std::max(x0, e.box.x) <= 0.0) continue;
      blocked.emplace_back(e.box.y - gap, e.box.bottom() + gap);
    }
    std::sort(blocked.begin(), blocked.end());
    double cursor = g.top[col];
    auto emit = [&](double y0, double y1) {
      if (y1 - y0 < body_lh) return;
      PlacedElement e;
      e.id = next_id++;
      e.label = ClassLabel::kBodyText;
      e.box = BBox{x0, y0, g.width, y1 - y0};
      const double chars_per_line = g.width * options.page_width_in * 72.0 / (0.5 * body_pt);
      const double lines = std::floor((y1 - y0) / body_lh + 1e-9);
      const int tokens = std::max(1, static_cast<int>(std::lround(lines * chars_per_line / kCharsPerToken * kTextOverfill)));
      e.content = TextRef{TextRole::kBody, FontRole::kBody, tokens, 0, rng.child_seed(kBodySeedBase + block++)};
      layout.elements.push_back(std::move(e));
    };
    for (const auto& [b0, b1] : blocked) {
      if (b1 <= cursor) continue;
      if (b0 > cursor) emit(cursor, std::min(b0, g.bottom));
      cursor = std::max(cursor, b1);
      if (cursor >= g.bottom) break;
    }
    if (cursor < g.bottom) emit(cursor, g.bottom);
  }
  finalize_order(layout);
  return layout;
}

}  // namespace ddr
