#include <doctest.h>

#include <memory>
#include <vector>

#include "ddr/compose.hpp"
#include "ddr/corpus.hpp"
#include "ddr/error.hpp"

using namespace ddr;

namespace {

std::vector<PageLayout> pages(const char* name, int n, std::uint64_t seed) {
  const auto p = std::make_shared<const StyleProfile>(resolve_profile(name));
  std::vector<PageLayout> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(compose_one(p, AssetPool::procedural(), RngSeed{seed, static_cast<std::uint64_t>(i)}));
  }
  return out;
}

const PlacedElement* first_of(const PageLayout& L, ClassLabel c) {
  for (const auto& e : L.elements) {
    if (e.label == c) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("line height") {
  CHECK(line_height(10, {}) == doctest::Approx(10 * 1.2 / 72.0 / 11.0));
  ComposeOptions o;
  o.line_spacing = 1.0;
  o.page_height_in = 10.0;
  CHECK(line_height(12, o) == doctest::Approx(12 / 720.0));
}

TEST_CASE("place_nonoverlapping") {
  const std::vector<BBox> taken = {{0.0, 0.0, 0.5, 0.5}};
  CHECK(place_nonoverlapping(taken, {0.5, 0.0, 0.2, 0.2}, 5, [] { return BBox{}; }) == BBox{0.5, 0.0, 0.2, 0.2});
  int calls = 0;
  auto r = place_nonoverlapping(taken, {0.1, 0.1, 0.2, 0.2}, 5, [&] {
    ++calls;
    return BBox{0.6, 0.6, 0.1, 0.1};
  });
  CHECK(r == BBox{0.6, 0.6, 0.1, 0.1});
  CHECK(calls == 1);
  calls = 0;
  r = place_nonoverlapping(taken, {0.1, 0.1, 0.2, 0.2}, 4, [&] {
    ++calls;
    return BBox{0.2, 0.2, 0.1, 0.1};
  });
  CHECK_FALSE(r.has_value());
  CHECK(calls == 3);
}

TEST_CASE("composed pages satisfy the layout invariants") {
  for (const char* name : {"acl", "vis", "cs150"}) {
    for (const PageLayout& L : pages(name, 300, 123)) {
      const PageConfig& c = L.config;
      for (std::size_t i = 0; i < L.elements.size(); ++i) {
        const PlacedElement& e = L.elements[i];
        CHECK(e.id == static_cast<int>(i));
        CHECK(is_valid_normalized(e.box));
        for (std::size_t j = i + 1; j < L.elements.size(); ++j) CHECK_FALSE(overlaps(e.box, L.elements[j].box));
        if (e.linked_caption) {
          const PlacedElement* cap = L.find(*e.linked_caption);
          REQUIRE(cap != nullptr);
          CHECK(cap->label == ClassLabel::kCaption);
          CHECK(cap->caption_of == e.id);
        }
        if (e.caption_of) {
          const PlacedElement* v = L.find(*e.caption_of);
          REQUIRE(v != nullptr);
          CHECK(is_visual_class(v->label));
          CHECK(v->linked_caption == e.id);
        }
        if (e.label == ClassLabel::kBodyText) {
          const bool in_column = e.box.x == L.columns.x[0] || e.box.x == L.columns.x[1];
          CHECK(in_column);
          CHECK(e.box.w == L.columns.width);
          CHECK(e.box.bottom() <= c.margin_bottom + 1e-12);
          for (const PlacedElement& v : L.elements) {
            if (!is_visual_class(v.label)) continue;
            if (std::min(e.box.right(), v.box.right()) <= std::max(e.box.x, v.box.x)) continue;
            const double gap = std::max(v.box.y - e.box.bottom(), e.box.y - v.box.bottom());
            CHECK(gap >= c.distances.image_text - 1e-9);
          }
        }
        CHECK(std::holds_alternative<std::monostate>(e.content) == false);
        if (is_visual_class(e.label)) CHECK(std::holds_alternative<AssetRef>(e.content));
      }
    }
  }
}

TEST_CASE("title block geometry") {
  int title_pages = 0;
  for (const char* name : {"acl", "vis", "cs150"}) {
    for (const PageLayout& L : pages(name, 400, 9)) {
      if (L.page_kind != PageKind::kTitle) continue;
      ++title_pages;
      const PlacedElement* t = first_of(L, ClassLabel::kTitle);
      const PlacedElement* a = first_of(L, ClassLabel::kAuthor);
      const PlacedElement* ab = first_of(L, ClassLabel::kAbstract);
      REQUIRE(t);
      REQUIRE(a);
      REQUIRE(ab);
      CHECK(t->header);
      CHECK(t->box.y <= 0.30);
      CHECK(a->box.y - t->box.bottom() == doctest::Approx(L.config.distances.title_author).epsilon(1e-9));
      CHECK(ab->box.y >= a->box.bottom());
      if (!L.teaser) {
        CHECK(ab->box.y - a->box.bottom() == doctest::Approx(L.config.distances.author_abstract).epsilon(1e-9));
      }
      CHECK(L.elements.front().label == ClassLabel::kTitle);
    }
  }
  CHECK(title_pages > 50);
}

TEST_CASE("composition is deterministic") {
  const auto a = pages("vis", 20, 55);
  const auto b = pages("vis", 20, 55);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].elements == b[i].elements);
    CHECK(a[i].seed == b[i].seed);
  }
}

TEST_CASE("fill_body_text is idempotent") {
  for (const PageLayout& L : pages("acl", 30, 8)) {
    const PageLayout again = fill_body_text(L);
    CHECK(again.elements == L.elements);
  }
}

TEST_CASE("an empty external pool exhausts") {
  const auto p = std::make_shared<const StyleProfile>(resolve_profile("acl"));
  PageConfig c = sample_page_config(p, RngSeed{1, 1}, PageKind::kInner);
  for (auto& [k, n] : c.element_counts) n = 0;
  c.element_counts[ElementKind::kFigure] = 2;
  const AssetPool empty = AssetPool::external({}, UsagePolicy::kOnce);
  CHECK_THROWS_AS(compose_page(c, empty, RngSeed{1, 1}), ExhaustedAssetsError);
}
