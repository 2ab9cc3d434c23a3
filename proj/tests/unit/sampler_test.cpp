#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "ddr/error.hpp"
#include "ddr/sampler.hpp"

using namespace ddr;

namespace {

std::shared_ptr<const StyleProfile> profile(const char* name) {
  return std::make_shared<const StyleProfile>(resolve_profile(name));
}

}  // namespace

TEST_CASE("every sampled config lies inside its profile") {
  for (const char* name : {"acl", "vis", "cs150", "acl+vis"}) {
    const auto p = profile(name);
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const PageConfig c = sample_page_config(p, RngSeed{77, i});
      CHECK_NOTHROW(check_page_config(c));
      CHECK(2.0 * c.column_width + c.column_spacing <= c.usable_width() + kColumnTolerance);
      for (const auto& [role, f] : c.fonts) {
        const auto& list = p->fonts.at(role);
        CHECK(std::find(list.begin(), list.end(), f.spec) != list.end());
      }
      CHECK(std::find(p->abstract_layouts.begin(), p->abstract_layouts.end(), c.abstract_layout) !=
            p->abstract_layouts.end());
      CHECK(p->author_lines.contains(c.author_lines));
    }
  }
}

TEST_CASE("sampling is reproducible") {
  const auto p = profile("vis");
  const PageConfig a = sample_page_config(p, RngSeed{5, 9});
  const PageConfig b = sample_page_config(p, RngSeed{5, 9});
  CHECK(a.margin_top == b.margin_top);
  CHECK(a.column_width == b.column_width);
  CHECK(a.element_counts == b.element_counts);
  CHECK(a.fonts == b.fonts);
  CHECK(a.distances == b.distances);
  const PageConfig c = sample_page_config(p, RngSeed{5, 10});
  CHECK((a.margin_top != c.margin_top || a.column_width != c.column_width));
}

TEST_CASE("page kind follows the title/inner ratio") {
  const auto p = profile("acl");
  const int n = 20000;
  int titles = 0;
  for (int i = 0; i < n; ++i) {
    titles += sample_page_config(p, RngSeed{3, static_cast<std::uint64_t>(i)}).page_kind == PageKind::kTitle;
  }
  const double expect = 345.0 / (345.0 + 2163.0);
  const double sigma = std::sqrt(expect * (1.0 - expect) / n);
  CHECK(std::abs(titles / static_cast<double>(n) - expect) < 4.0 * sigma);

  CHECK(sample_page_config(p, RngSeed{3, 0}, PageKind::kTitle).page_kind == PageKind::kTitle);
  CHECK(sample_page_config(p, RngSeed{3, 0}, PageKind::kInner).page_kind == PageKind::kInner);
}

TEST_CASE("element counts are uniform over their ranges") {
  const auto p = profile("vis");
  const int n = 20000;
  double sum = 0.0;
  int lo = 100, hi = -1;
  for (int i = 0; i < n; ++i) {
    const int k = sample_page_config(p, RngSeed{8, static_cast<std::uint64_t>(i)}).element_counts.at(ElementKind::kEquation);
    sum += k;
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  // Uniform on {0..17}: mean 8.5, variance (18^2 - 1) / 12.
  const double sigma = std::sqrt((18.0 * 18.0 - 1.0) / 12.0 / n);
  CHECK(std::abs(sum / n - 8.5) < 4.0 * sigma);
  CHECK(lo == 0);
  CHECK(hi == 17);
}

TEST_CASE("placements stay inside the unit page and their ranges") {
  const StyleProfile p = resolve_profile("acl");
  for (const auto& [label, specs] : p.placements) {
    for (const PlacementSpec& s : specs) {
      for (std::uint64_t i = 0; i < 200; ++i) {
        const BBox b = sample_placement(s, RngSeed{1, i});
        CHECK(is_valid_normalized(b));
        CHECK(b.w <= s.width.max + 1e-12);
        CHECK(b.h <= s.height.max + 1e-12);
      }
    }
  }
}

TEST_CASE("impossible column geometry raises GeometryError") {
  StyleProfile p = resolve_profile("acl");
  p.margins.left = Range{0.40, 0.41};
  p.margins.right = Range{0.60, 0.61};
  p.column_width = Range{0.3, 0.4};
  CHECK_THROWS_AS(sample_page_config(p, RngSeed{1, 1}), GeometryError);
}

TEST_CASE("check_page_config rejects out-of-range values") {
  PageConfig c = sample_page_config(profile("cs150"), RngSeed{2, 2});
  c.margin_top = 0.5;
  CHECK_THROWS_AS(check_page_config(c), ValidationError);
  c = sample_page_config(profile("cs150"), RngSeed{2, 2});
  c.element_counts[ElementKind::kFigure] = 99;
  CHECK_THROWS_AS(check_page_config(c), ValidationError);
}
