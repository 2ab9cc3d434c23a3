#include <doctest.h>

#include <filesystem>
#include <string>

#include "ddr/error.hpp"
#include "ddr/style.hpp"

using namespace ddr;

namespace {

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("bundled profiles load and validate") {
  for (const char* name : {"acl", "vis", "cs150"}) {
    const StyleProfile p = resolve_profile(name);
    CHECK_NOTHROW(validate(p));
    CHECK(p.fonts.size() == std::size(kAllFontRoles));
    CHECK(p.element_counts.size() == std::size(kAllElementKinds));
  }
}

TEST_CASE("profiles survive a serialize/parse round trip") {
  for (const char* name : {"acl", "vis", "cs150", "acl+vis"}) {
    const StyleProfile p = resolve_profile(name);
    const StyleProfile q = parse_style_profile(serialize_style_profile(p));
    CHECK(p == q);
    CHECK(serialize_style_profile(q) == serialize_style_profile(p));
  }
}

TEST_CASE("save and load through a file") {
  const auto path = std::filesystem::temp_directory_path() / "ddr-style-test.profile";
  const StyleProfile p = resolve_profile("cs150");
  save_style_profile(p, path);
  CHECK(load_style_profile(path) == p);
  CHECK(resolve_profile(path.string()) == p);
  std::filesystem::remove(path);
}

TEST_CASE("merged profile covers both inputs") {
  const StyleProfile a = resolve_profile("acl");
  const StyleProfile b = resolve_profile("vis");
  const StyleProfile m = merge_profiles(a, b);
  CHECK(m.name == "ACL+VIS");
  CHECK(m.margins.top.min == 0.001);
  CHECK(m.margins.top.max == 0.171);
  CHECK(m.element_counts.at(ElementKind::kEquation) == IntRange{0, 17});
  CHECK(m.element_counts.at(ElementKind::kAlgorithm) == IntRange{0, 11});
  CHECK(m.page_types.title_pages == 345 + 287);
  CHECK(m.distances.image_caption == Range{0.0, 0.1});
  for (const auto& [label, specs] : a.placements) {
    for (const PlacementSpec& s : specs) {
      bool covered = false;
      for (const PlacementSpec& t : m.placements.at(label)) {
        covered = covered || (t.slot == s.slot && t.center_x.min <= s.center_x.min &&
                              t.center_x.max >= s.center_x.max && t.height.max >= s.height.max);
      }
      CHECK(covered);
    }
  }
  CHECK(merge_profiles(a, a) == a);
  CHECK(resolve_profile("acl+vis") == m);
  CHECK_NOTHROW(validate(m));
}

TEST_CASE("unknown profile names are rejected") {
  CHECK_THROWS_AS(resolve_profile("nope"), IoError);
  CHECK_THROWS_AS(resolve_profile("acl+nope"), IoError);
}

TEST_CASE("malformed profiles name the offending field") {
  const std::string text = serialize_style_profile(resolve_profile("acl"));
  CHECK_THROWS_AS(parse_style_profile("name: [unclosed"), ParseError);
  CHECK_THROWS_AS(parse_style_profile(replace(text, "column_width:", "column_widht:")), Error);

  try {
    parse_style_profile(replace(text, "top: [0.015, 0.171]", "top: [0.171, 0.015]"), "t.profile");
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("margins.top") != std::string::npos);
    CHECK(std::string(e.what()).find("t.profile") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_style_profile(replace(text, "top: [0.015, 0.171]", "top: [0.015, 1.5]")), ValidationError);
}

TEST_CASE("validate checks structure") {
  StyleProfile p = resolve_profile("acl");
  CHECK_NOTHROW(validate(p));

  StyleProfile q = p;
  q.placements.erase(ClassLabel::kTable);
  CHECK_THROWS_AS(validate(q), ValidationError);

  q = p;
  q.fonts.erase(FontRole::kBody);
  CHECK_THROWS_AS(validate(q), ValidationError);

  q = p;
  q.element_counts[ElementKind::kFigure] = IntRange{3, 1};
  CHECK_THROWS_AS(validate(q), ValidationError);

  q = p;
  q.page_types = PageTypeCounts{0, 0};
  CHECK_THROWS_AS(validate(q), ValidationError);

  q = p;
  q.abstract_layouts.clear();
  CHECK_THROWS_AS(validate(q), ValidationError);

  q = p;
  q.author_lines = IntRange{0, 3};
  CHECK_THROWS_AS(validate(q), ValidationError);
}

TEST_CASE("enum names") {
  CHECK(to_string(Slot::kMini) == "mini");
  CHECK(to_string(AbstractLayout::kTwoColumn) == "two-column");
  CHECK(to_string(Alignment::kDistributed) == "distributed");
  CHECK(to_string(ElementKind::kMiniTable) == "mini_table");
}
