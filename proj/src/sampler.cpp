#include "ddr/sampler.hpp"

#include <string>

#include "ddr/error.hpp"

namespace ddr {

std::string_view to_string(PageKind k) { return k == PageKind::kTitle ? "title" : "inner"; }

namespace {

double draw(Rng& rng, const Range& r) { return rng.uniform(r.min, r.max); }

template <class T>
T pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.index(v.size())];
}

bool columns_fit(const PageConfig& c) {
  return 2.0 * c.column_width + c.column_spacing <= c.usable_width() + kColumnTolerance;
}

}  // namespace

PageConfig sample_page_config(const std::shared_ptr<const StyleProfile>& profile, RngSeed seed,
                              std::optional<PageKind> force_kind) {
  const StyleProfile& p = *profile;
  Rng rng = Rng(seed).fork("page-config");

  PageConfig c;
  c.profile = profile;
  if (force_kind) {
    c.page_kind = *force_kind;
  } else {
    const double total = p.page_types.title_pages + p.page_types.inner_pages;
    c.page_kind = rng.bernoulli(p.page_types.title_pages / total) ? PageKind::kTitle : PageKind::kInner;
  }

  // Margins and columns are redrawn together: the appendix ranges admit
  // combinations where two columns cannot fit between the margins.
  bool fit = false;
  for (int attempt = 0; attempt < kColumnResampleLimit && !fit; ++attempt) {
    c.margin_top = draw(rng, p.margins.top);
    c.margin_bottom = draw(rng, p.margins.bottom);
    c.margin_left = draw(rng, p.margins.left);
    c.margin_right = draw(rng, p.margins.right);
    c.column_width = draw(rng, p.column_width);
    c.column_spacing = draw(rng, p.column_spacing);
    fit = columns_fit(c);
  }
  if (!fit) {
    const double room = c.usable_width() + kColumnTolerance;
    c.column_spacing = std::max(p.column_spacing.min, room - 2.0 * c.column_width);
    if (!columns_fit(c)) {
      c.column_width = (room - c.column_spacing) / 2.0;
      if (c.column_width < p.column_width.min) {
        throw GeometryError("profile " + p.name + ": margins leave no room for two columns of minimum width");
      }
    }
  }

  for (ElementKind k : kAllElementKinds) {
    const IntRange& r = p.element_counts.at(k);
    c.element_counts[k] = static_cast<int>(rng.uniform_int(r.min, r.max));
  }

  // One font per role per page.
  for (const auto& [role, list] : p.fonts) {
    const FontSpec& f = pick(rng, list);
    c.fonts[role] = ResolvedFont{f, static_cast<int>(rng.uniform_int(f.size_pt.min, f.size_pt.max))};
  }

  c.distances.title_author = draw(rng, p.distances.title_author);
  c.distances.author_abstract = draw(rng, p.distances.author_abstract);
  c.distances.abstract_text = draw(rng, p.distances.abstract_text);
  c.distances.header_title = draw(rng, p.distances.header_title);
  c.distances.image_caption = draw(rng, p.distances.image_caption);
  c.distances.image_text = draw(rng, p.distances.image_text);

  c.abstract_layout = pick(rng, p.abstract_layouts);
  c.keywords_line = pick(rng, p.keywords_line);
  c.author_lines = static_cast<int>(rng.uniform_int(p.author_lines.min, p.author_lines.max));
  c.table_caption_side = pick(rng, p.caption_sides.at(ClassLabel::kTable));
  return c;
}

PageConfig sample_page_config(const StyleProfile& profile, RngSeed seed, std::optional<PageKind> force_kind) {
  return sample_page_config(std::make_shared<const StyleProfile>(profile), seed, force_kind);
}

void check_page_config(const PageConfig& c) {
  if (!c.profile) throw ValidationError("page config: no profile");
  const StyleProfile& p = *c.profile;
  auto in = [](const Range& r, double v, const char* field) {
    if (!r.contains(v)) throw ValidationError(std::string(field) + ": sampled value outside profile range");
  };
  in(p.margins.top, c.margin_top, "margin_top");
  in(p.margins.bottom, c.margin_bottom, "margin_bottom");
  in(p.margins.left, c.margin_left, "margin_left");
  in(p.margins.right, c.margin_right, "margin_right");
  in(p.column_width, c.column_width, "column_width");
  in(p.column_spacing, c.column_spacing, "column_spacing");
  in(p.distances.title_author, c.distances.title_author, "distances.title_author");
  in(p.distances.author_abstract, c.distances.author_abstract, "distances.author_abstract");
  in(p.distances.abstract_text, c.distances.abstract_text, "distances.abstract_text");
  in(p.distances.header_title, c.distances.header_title, "distances.header_title");
  in(p.distances.image_caption, c.distances.image_caption, "distances.image_caption");
  in(p.distances.image_text, c.distances.image_text, "distances.image_text");
  if (c.margin_bottom <= c.margin_top || c.margin_right <= c.margin_left) {
    throw ValidationError("margins: no positive content area");
  }
  if (!columns_fit(c)) throw ValidationError("columns: 2 * width + spacing exceeds usable width");
  for (const auto& [k, n] : c.element_counts) {
    if (!p.element_counts.at(k).contains(n)) {
      throw ValidationError("element_counts." + std::string(to_string(k)) + ": outside profile range");
    }
  }
  for (const auto& [role, f] : c.fonts) {
    if (!f.spec.size_pt.contains(f.size_pt)) {
      throw ValidationError("fonts." + std::string(to_string(role)) + ": size outside range");
    }
  }
}

BBox sample_placement(const PlacementSpec& spec, Rng& rng) {
  const double cx = draw(rng, spec.center_x);
  const double cy = draw(rng, spec.center_y);
  const double w = draw(rng, spec.width);
  const double h = draw(rng, spec.height);
  return clamp_to_unit(box_from_center(cx, cy, w, h));
}

BBox sample_placement(const PlacementSpec& spec, RngSeed seed) {
  Rng rng = Rng(seed).fork("placement");
  return sample_placement(spec, rng);
}

}  // namespace ddr
