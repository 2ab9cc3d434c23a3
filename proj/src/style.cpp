#include "ddr/style.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "ddr/error.hpp"

namespace ddr {

namespace {

template <class E>
struct EnumName {
  E value;
  std::string_view name;
};

constexpr std::array<EnumName<Slot>, 4> kSlotNames{{
    {Slot::kMini, "mini"}, {Slot::kLeft, "left"}, {Slot::kRight, "right"}, {Slot::kCenter, "center"}}};

constexpr std::array<EnumName<FontRole>, 11> kRoleNames{{
    {FontRole::kTitle, "title"},
    {FontRole::kAuthor, "author"},
    {FontRole::kAbstractHeader, "abstract_header"},
    {FontRole::kAbstractText, "abstract_text"},
    {FontRole::kKeywords, "keywords"},
    {FontRole::kHeading1, "heading1"},
    {FontRole::kHeading2, "heading2"},
    {FontRole::kHeading3, "heading3"},
    {FontRole::kBody, "body"},
    {FontRole::kCaption, "caption"},
    {FontRole::kCaptionNumber, "caption_number"},
}};

constexpr std::array<EnumName<ElementKind>, 6> kKindNames{{
    {ElementKind::kFigure, "figure"},
    {ElementKind::kMiniFigure, "mini_figure"},
    {ElementKind::kTable, "table"},
    {ElementKind::kMiniTable, "mini_table"},
    {ElementKind::kAlgorithm, "algorithm"},
    {ElementKind::kEquation, "equation"},
}};

constexpr std::array<EnumName<AbstractLayout>, 2> kAbstractNames{{
    {AbstractLayout::kLeftColumn, "left-column"}, {AbstractLayout::kTwoColumn, "two-column"}}};

constexpr std::array<EnumName<CaptionSide>, 2> kSideNames{{
    {CaptionSide::kAbove, "above"}, {CaptionSide::kBelow, "below"}}};

constexpr std::array<EnumName<Weight>, 2> kWeightNames{{{Weight::kRegular, "regular"}, {Weight::kBold, "bold"}}};
constexpr std::array<EnumName<Slant>, 2> kSlantNames{{{Slant::kUpright, "upright"}, {Slant::kItalic, "italic"}}};
constexpr std::array<EnumName<Caps>, 3> kCapsNames{{
    {Caps::kNone, "none"}, {Caps::kSmallCaps, "small-caps"}, {Caps::kAllCaps, "all-caps"}}};
constexpr std::array<EnumName<Alignment>, 3> kAlignNames{{
    {Alignment::kLeft, "left"}, {Alignment::kCenter, "center"}, {Alignment::kDistributed, "distributed"}}};

template <class E, std::size_t N>
std::string_view lookup_name(const std::array<EnumName<E>, N>& table, E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

template <class E, std::size_t N>
E lookup_value(const std::array<EnumName<E>, N>& table, std::string_view s, std::string_view field) {
  for (const auto& e : table) {
    if (e.name == s) return e.value;
  }
  throw ParseError(std::string(field) + ": unknown value '" + std::string(s) + "'");
}

std::string fmt_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

// ---------- parsing ----------

YAML::Node require(const YAML::Node& n, const char* key, const std::string& path) {
  YAML::Node child = n[key];
  if (!child) throw ParseError(path + "." + key + ": missing");
  return child;
}

double as_double(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ParseError(path + ": expected a number");
  }
}

int as_int(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    throw ParseError(path + ": expected an integer");
  }
}

std::string as_string(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<std::string>();
  } catch (const YAML::Exception&) {
    throw ParseError(path + ": expected a string");
  }
}

Range parse_range(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 2) throw ParseError(path + ": expected [min, max]");
  return Range{as_double(n[0], path + "[0]"), as_double(n[1], path + "[1]")};
}

IntRange parse_int_range(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 2) throw ParseError(path + ": expected [min, max]");
  return IntRange{as_int(n[0], path + "[0]"), as_int(n[1], path + "[1]")};
}

PlacementSpec parse_placement(const YAML::Node& n, const std::string& path) {
  PlacementSpec p;
  p.slot = lookup_value(kSlotNames, as_string(require(n, "slot", path), path + ".slot"), path + ".slot");
  p.center_x = parse_range(require(n, "center_x", path), path + ".center_x");
  p.center_y = parse_range(require(n, "center_y", path), path + ".center_y");
  p.width = parse_range(require(n, "width", path), path + ".width");
  p.height = parse_range(require(n, "height", path), path + ".height");
  return p;
}

FontSpec parse_font(const YAML::Node& n, const std::string& path) {
  FontSpec f;
  f.family = as_string(require(n, "family", path), path + ".family");
  f.size_pt = parse_int_range(require(n, "size", path), path + ".size");
  if (n["weight"]) f.weight = lookup_value(kWeightNames, as_string(n["weight"], path), path + ".weight");
  if (n["slant"]) f.slant = lookup_value(kSlantNames, as_string(n["slant"], path), path + ".slant");
  if (n["caps"]) f.caps = lookup_value(kCapsNames, as_string(n["caps"], path), path + ".caps");
  if (n["alignment"]) {
    f.alignment = lookup_value(kAlignNames, as_string(n["alignment"], path), path + ".alignment");
  }
  return f;
}

StyleProfile parse_node(const YAML::Node& root) {
  if (!root.IsMap()) throw ParseError("profile: expected a mapping at top level");
  StyleProfile p;
  p.name = as_string(require(root, "name", "profile"), "name");

  const YAML::Node m = require(root, "margins", "profile");
  p.margins.top = parse_range(require(m, "top", "margins"), "margins.top");
  p.margins.bottom = parse_range(require(m, "bottom", "margins"), "margins.bottom");
  p.margins.left = parse_range(require(m, "left", "margins"), "margins.left");
  p.margins.right = parse_range(require(m, "right", "margins"), "margins.right");
  p.column_width = parse_range(require(root, "column_width", "profile"), "column_width");
  p.column_spacing = parse_range(require(root, "column_spacing", "profile"), "column_spacing");

  const YAML::Node pt = require(root, "page_types", "profile");
  p.page_types.title_pages = as_int(require(pt, "title", "page_types"), "page_types.title");
  p.page_types.inner_pages = as_int(require(pt, "inner", "page_types"), "page_types.inner");

  const YAML::Node ec = require(root, "element_counts", "profile");
  for (const auto& k : kKindNames) {
    const std::string path = "element_counts." + std::string(k.name);
    p.element_counts[k.value] = parse_int_range(require(ec, std::string(k.name).c_str(), "element_counts"), path);
  }
  if (root["author_lines"]) p.author_lines = parse_int_range(root["author_lines"], "author_lines");

  const YAML::Node pl = require(root, "placements", "profile");
  for (auto it = pl.begin(); it != pl.end(); ++it) {
    const std::string cls = as_string(it->first, "placements");
    auto label = class_from_name(cls);
    if (!label) throw ParseError("placements: unknown class '" + cls + "'");
    auto& list = p.placements[*label];
    const YAML::Node seq = it->second;
    if (!seq.IsSequence()) throw ParseError("placements." + cls + ": expected a list");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      list.push_back(parse_placement(seq[i], "placements." + cls + "[" + std::to_string(i) + "]"));
    }
  }

  const YAML::Node cap = require(root, "caption", "profile");
  p.caption.center_y = parse_range(require(cap, "center_y", "caption"), "caption.center_y");
  p.caption.width = parse_range(require(cap, "width", "caption"), "caption.width");
  p.caption.height = parse_range(require(cap, "height", "caption"), "caption.height");

  const YAML::Node ab = require(root, "abstract", "profile");
  const YAML::Node layouts = require(ab, "layouts", "abstract");
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    p.abstract_layouts.push_back(
        lookup_value(kAbstractNames, as_string(layouts[i], "abstract.layouts"), "abstract.layouts"));
  }
  for (const auto& l : kAbstractNames) {
    const YAML::Node shape = ab[std::string(l.name)];
    if (!shape) continue;
    const std::string path = "abstract." + std::string(l.name);
    p.abstract_shapes[l.value] = AbstractShape{parse_range(require(shape, "width", path), path + ".width"),
                                               parse_range(require(shape, "height", path), path + ".height")};
  }

  const YAML::Node sides = require(root, "caption_sides", "profile");
  for (auto it = sides.begin(); it != sides.end(); ++it) {
    const std::string cls = as_string(it->first, "caption_sides");
    auto label = class_from_name(cls);
    if (!label) throw ParseError("caption_sides: unknown class '" + cls + "'");
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      p.caption_sides[*label].push_back(
          lookup_value(kSideNames, as_string(it->second[i], "caption_sides." + cls), "caption_sides." + cls));
    }
  }

  const YAML::Node d = require(root, "distances", "profile");
  p.distances.title_author = parse_range(require(d, "title_author", "distances"), "distances.title_author");
  p.distances.author_abstract = parse_range(require(d, "author_abstract", "distances"), "distances.author_abstract");
  p.distances.abstract_text = parse_range(require(d, "abstract_text", "distances"), "distances.abstract_text");
  p.distances.header_title = parse_range(require(d, "header_title", "distances"), "distances.header_title");
  p.distances.image_caption = parse_range(require(d, "image_caption", "distances"), "distances.image_caption");
  p.distances.image_text = parse_range(require(d, "image_text", "distances"), "distances.image_text");

  const YAML::Node kw = require(root, "keywords_line", "profile");
  for (std::size_t i = 0; i < kw.size(); ++i) {
    try {
      p.keywords_line.push_back(kw[i].as<bool>());
    } catch (const YAML::Exception&) {
      throw ParseError("keywords_line: expected booleans");
    }
  }

  const YAML::Node fonts = require(root, "fonts", "profile");
  for (auto it = fonts.begin(); it != fonts.end(); ++it) {
    const std::string role_name = as_string(it->first, "fonts");
    const FontRole role = lookup_value(kRoleNames, role_name, "fonts");
    auto& list = p.fonts[role];
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      list.push_back(parse_font(it->second[i], "fonts." + role_name + "[" + std::to_string(i) + "]"));
    }
  }
  return p;
}

// ---------- validation ----------

void check_geometric(const Range& r, const std::string& field) {
  if (r.min > r.max) throw ValidationError(field + ": min > max");
  if (r.min < 0.0 || r.max > 1.0) throw ValidationError(field + ": outside [0, 1]");
}

void check_count(const IntRange& r, const std::string& field) {
  if (r.min < 0) throw ValidationError(field + ": negative count");
  if (r.min > r.max) throw ValidationError(field + ": min > max");
}

// ---------- emitting ----------

void emit_range(YAML::Emitter& out, const Range& r) {
  out << YAML::Flow << YAML::BeginSeq << fmt_double(r.min) << fmt_double(r.max) << YAML::EndSeq;
}

void emit_int_range(YAML::Emitter& out, const IntRange& r) {
  out << YAML::Flow << YAML::BeginSeq << r.min << r.max << YAML::EndSeq;
}

template <class T>
void push_unique(std::vector<T>& dst, const std::vector<T>& src) {
  for (const auto& v : src) {
    if (std::find(dst.begin(), dst.end(), v) == dst.end()) dst.push_back(v);
  }
}

Range hull(const Range& a, const Range& b) { return Range{std::min(a.min, b.min), std::max(a.max, b.max)}; }
IntRange hull(const IntRange& a, const IntRange& b) {
  return IntRange{std::min(a.min, b.min), std::max(a.max, b.max)};
}

}  // namespace

std::string_view to_string(Slot s) { return lookup_name(kSlotNames, s); }
std::string_view to_string(FontRole r) { return lookup_name(kRoleNames, r); }
std::string_view to_string(ElementKind k) { return lookup_name(kKindNames, k); }
std::string_view to_string(AbstractLayout l) { return lookup_name(kAbstractNames, l); }
std::string_view to_string(CaptionSide s) { return lookup_name(kSideNames, s); }
std::string_view to_string(Weight w) { return lookup_name(kWeightNames, w); }
std::string_view to_string(Slant s) { return lookup_name(kSlantNames, s); }
std::string_view to_string(Caps c) { return lookup_name(kCapsNames, c); }
std::string_view to_string(Alignment a) { return lookup_name(kAlignNames, a); }

void validate(const StyleProfile& p) {
  if (p.name.empty()) throw ValidationError("name: empty");
  check_geometric(p.margins.top, "margins.top");
  check_geometric(p.margins.bottom, "margins.bottom");
  check_geometric(p.margins.left, "margins.left");
  check_geometric(p.margins.right, "margins.right");
  if (p.margins.top.max >= p.margins.bottom.min) throw ValidationError("margins: top may reach bottom");
  if (p.margins.left.max >= p.margins.right.min) throw ValidationError("margins: left may reach right");
  check_geometric(p.column_width, "column_width");
  check_geometric(p.column_spacing, "column_spacing");
  if (p.column_width.min <= 0.0) throw ValidationError("column_width: must be positive");

  if (p.page_types.title_pages < 0 || p.page_types.inner_pages < 0) {
    throw ValidationError("page_types: negative count");
  }
  if (p.page_types.title_pages + p.page_types.inner_pages == 0) {
    throw ValidationError("page_types: both counts are zero");
  }

  for (ElementKind k : kAllElementKinds) {
    auto it = p.element_counts.find(k);
    if (it == p.element_counts.end()) {
      throw ValidationError("element_counts." + std::string(to_string(k)) + ": missing");
    }
    check_count(it->second, "element_counts." + std::string(to_string(k)));
  }
  check_count(p.author_lines, "author_lines");
  if (p.author_lines.min < 1 || p.author_lines.max > 12) throw ValidationError("author_lines: outside [1, 12]");

  for (const auto& [label, specs] : p.placements) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const std::string f = "placements." + std::string(class_name(label)) + "[" + std::to_string(i) + "]";
      check_geometric(specs[i].center_x, f + ".center_x");
      check_geometric(specs[i].center_y, f + ".center_y");
      check_geometric(specs[i].width, f + ".width");
      check_geometric(specs[i].height, f + ".height");
      if (specs[i].width.min <= 0.0 || specs[i].height.min <= 0.0) {
        throw ValidationError(f + ": extent must be positive");
      }
    }
  }
  auto has_slot = [&](ClassLabel c, bool mini) {
    auto it = p.placements.find(c);
    if (it == p.placements.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const PlacementSpec& s) { return (s.slot == Slot::kMini) == mini; });
  };
  for (ElementKind k : kAllElementKinds) {
    if (p.element_counts.at(k).max > 0 && !has_slot(element_class(k), is_mini(k))) {
      throw ValidationError("placements." + std::string(class_name(element_class(k))) + ": no " +
                            (is_mini(k) ? "mini" : "regular") + " slot for " + std::string(to_string(k)));
    }
  }
  if (p.page_types.title_pages > 0) {
    for (ClassLabel c : {ClassLabel::kTitle, ClassLabel::kAuthor}) {
      if (!has_slot(c, false)) throw ValidationError("placements." + std::string(class_name(c)) + ": missing");
    }
  }

  check_geometric(p.caption.center_y, "caption.center_y");
  check_geometric(p.caption.width, "caption.width");
  check_geometric(p.caption.height, "caption.height");

  if (p.abstract_layouts.empty()) throw ValidationError("abstract.layouts: empty");
  for (AbstractLayout l : p.abstract_layouts) {
    auto it = p.abstract_shapes.find(l);
    const std::string f = "abstract." + std::string(to_string(l));
    if (it == p.abstract_shapes.end()) throw ValidationError(f + ": missing shape");
    check_geometric(it->second.width, f + ".width");
    check_geometric(it->second.height, f + ".height");
  }
  for (ClassLabel c : {ClassLabel::kFigure, ClassLabel::kTable, ClassLabel::kAlgorithm}) {
    auto it = p.caption_sides.find(c);
    if (it == p.caption_sides.end() || it->second.empty()) {
      throw ValidationError("caption_sides." + std::string(class_name(c)) + ": missing");
    }
  }

  check_geometric(p.distances.title_author, "distances.title_author");
  check_geometric(p.distances.author_abstract, "distances.author_abstract");
  check_geometric(p.distances.abstract_text, "distances.abstract_text");
  check_geometric(p.distances.header_title, "distances.header_title");
  check_geometric(p.distances.image_caption, "distances.image_caption");
  check_geometric(p.distances.image_text, "distances.image_text");

  if (p.keywords_line.empty()) throw ValidationError("keywords_line: empty");

  for (FontRole r : kAllFontRoles) {
    auto it = p.fonts.find(r);
    const std::string f = "fonts." + std::string(to_string(r));
    if (it == p.fonts.end() || it->second.empty()) throw ValidationError(f + ": missing");
    for (const FontSpec& fs : it->second) {
      if (fs.family.empty()) throw ValidationError(f + ": empty family");
      if (fs.size_pt.min > fs.size_pt.max) throw ValidationError(f + ".size: min > max");
      if (fs.size_pt.min < 4) throw ValidationError(f + ".size: below 4pt");
    }
  }
}

StyleProfile parse_style_profile(std::string_view text, std::string_view origin) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string(origin) + ": " + e.what());
  }
  StyleProfile p;
  try {
    p = parse_node(root);
  } catch (const ParseError& e) {
    throw ParseError(std::string(origin) + ": " + e.what());
  }
  try {
    validate(p);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(origin) + ": " + e.what());
  }
  return p;
}

StyleProfile load_style_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_style_profile(ss.str(), path.string());
}

std::string serialize_style_profile(const StyleProfile& p) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << p.name;

  out << YAML::Key << "margins" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "top" << YAML::Value;
  emit_range(out, p.margins.top);
  out << YAML::Key << "bottom" << YAML::Value;
  emit_range(out, p.margins.bottom);
  out << YAML::Key << "left" << YAML::Value;
  emit_range(out, p.margins.left);
  out << YAML::Key << "right" << YAML::Value;
  emit_range(out, p.margins.right);
  out << YAML::EndMap;

  out << YAML::Key << "column_width" << YAML::Value;
  emit_range(out, p.column_width);
  out << YAML::Key << "column_spacing" << YAML::Value;
  emit_range(out, p.column_spacing);
  out << YAML::Key << "page_types" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "title"
      << YAML::Value << p.page_types.title_pages << YAML::Key << "inner" << YAML::Value << p.page_types.inner_pages
      << YAML::EndMap;

  out << YAML::Key << "element_counts" << YAML::Value << YAML::BeginMap;
  for (const auto& [kind, r] : p.element_counts) {
    out << YAML::Key << std::string(to_string(kind)) << YAML::Value;
    emit_int_range(out, r);
  }
  out << YAML::EndMap;
  out << YAML::Key << "author_lines" << YAML::Value;
  emit_int_range(out, p.author_lines);

  out << YAML::Key << "placements" << YAML::Value << YAML::BeginMap;
  for (const auto& [label, specs] : p.placements) {
    out << YAML::Key << std::string(class_name(label)) << YAML::Value << YAML::BeginSeq;
    for (const PlacementSpec& s : specs) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "slot" << YAML::Value << std::string(to_string(s.slot));
      out << YAML::Key << "center_x" << YAML::Value;
      emit_range(out, s.center_x);
      out << YAML::Key << "center_y" << YAML::Value;
      emit_range(out, s.center_y);
      out << YAML::Key << "width" << YAML::Value;
      emit_range(out, s.width);
      out << YAML::Key << "height" << YAML::Value;
      emit_range(out, s.height);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "caption" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "center_y" << YAML::Value;
  emit_range(out, p.caption.center_y);
  out << YAML::Key << "width" << YAML::Value;
  emit_range(out, p.caption.width);
  out << YAML::Key << "height" << YAML::Value;
  emit_range(out, p.caption.height);
  out << YAML::EndMap;

  out << YAML::Key << "abstract" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "layouts" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (AbstractLayout l : p.abstract_layouts) out << std::string(to_string(l));
  out << YAML::EndSeq;
  for (const auto& [layout, shape] : p.abstract_shapes) {
    out << YAML::Key << std::string(to_string(layout)) << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "width" << YAML::Value;
    emit_range(out, shape.width);
    out << YAML::Key << "height" << YAML::Value;
    emit_range(out, shape.height);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "caption_sides" << YAML::Value << YAML::BeginMap;
  for (const auto& [label, sides] : p.caption_sides) {
    out << YAML::Key << std::string(class_name(label)) << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (CaptionSide s : sides) out << std::string(to_string(s));
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "distances" << YAML::Value << YAML::BeginMap;
  const std::pair<const char*, const Range*> dists[] = {
      {"title_author", &p.distances.title_author},   {"author_abstract", &p.distances.author_abstract},
      {"abstract_text", &p.distances.abstract_text}, {"header_title", &p.distances.header_title},
      {"image_caption", &p.distances.image_caption}, {"image_text", &p.distances.image_text},
  };
  for (const auto& [key, r] : dists) {
    out << YAML::Key << key << YAML::Value;
    emit_range(out, *r);
  }
  out << YAML::EndMap;

  out << YAML::Key << "keywords_line" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (bool b : p.keywords_line) out << b;
  out << YAML::EndSeq;

  out << YAML::Key << "fonts" << YAML::Value << YAML::BeginMap;
  for (const auto& [role, list] : p.fonts) {
    out << YAML::Key << std::string(to_string(role)) << YAML::Value << YAML::BeginSeq;
    for (const FontSpec& f : list) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "family" << YAML::Value << f.family;
      out << YAML::Key << "size" << YAML::Value;
      emit_int_range(out, f.size_pt);
      out << YAML::Key << "weight" << YAML::Value << std::string(to_string(f.weight));
      out << YAML::Key << "slant" << YAML::Value << std::string(to_string(f.slant));
      out << YAML::Key << "caps" << YAML::Value << std::string(to_string(f.caps));
      out << YAML::Key << "alignment" << YAML::Value << std::string(to_string(f.alignment));
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void save_style_profile(const StyleProfile& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write profile " + path.string());
  out << serialize_style_profile(p);
}

StyleProfile merge_profiles(const StyleProfile& a, const StyleProfile& b) {
  validate(a);
  validate(b);
  if (a == b) return a;

  StyleProfile m;
  m.name = a.name + "+" + b.name;
  m.margins = Margins{hull(a.margins.top, b.margins.top), hull(a.margins.bottom, b.margins.bottom),
                      hull(a.margins.left, b.margins.left), hull(a.margins.right, b.margins.right)};
  m.column_width = hull(a.column_width, b.column_width);
  m.column_spacing = hull(a.column_spacing, b.column_spacing);
  // The merged cohort draws pages from both corpora.
  m.page_types = PageTypeCounts{a.page_types.title_pages + b.page_types.title_pages,
                                a.page_types.inner_pages + b.page_types.inner_pages};
  for (ElementKind k : kAllElementKinds) {
    m.element_counts[k] = hull(a.element_counts.at(k), b.element_counts.at(k));
  }
  m.author_lines = hull(a.author_lines, b.author_lines);

  m.placements = a.placements;
  for (const auto& [label, specs] : b.placements) {
    auto& dst = m.placements[label];
    for (const PlacementSpec& s : specs) {
      auto it = std::find_if(dst.begin(), dst.end(), [&](const PlacementSpec& d) { return d.slot == s.slot; });
      if (it == dst.end()) {
        dst.push_back(s);
      } else {
        it->center_x = hull(it->center_x, s.center_x);
        it->center_y = hull(it->center_y, s.center_y);
        it->width = hull(it->width, s.width);
        it->height = hull(it->height, s.height);
      }
    }
  }

  m.caption = CaptionSpec{hull(a.caption.center_y, b.caption.center_y), hull(a.caption.width, b.caption.width),
                          hull(a.caption.height, b.caption.height)};
  m.abstract_layouts = a.abstract_layouts;
  push_unique(m.abstract_layouts, b.abstract_layouts);
  m.abstract_shapes = a.abstract_shapes;
  for (const auto& [layout, shape] : b.abstract_shapes) {
    auto it = m.abstract_shapes.find(layout);
    if (it == m.abstract_shapes.end()) {
      m.abstract_shapes[layout] = shape;
    } else {
      it->second = AbstractShape{hull(it->second.width, shape.width), hull(it->second.height, shape.height)};
    }
  }
  m.caption_sides = a.caption_sides;
  for (const auto& [label, sides] : b.caption_sides) push_unique(m.caption_sides[label], sides);

  m.distances = Distances{hull(a.distances.title_author, b.distances.title_author),
                          hull(a.distances.author_abstract, b.distances.author_abstract),
                          hull(a.distances.abstract_text, b.distances.abstract_text),
                          hull(a.distances.header_title, b.distances.header_title),
                          hull(a.distances.image_caption, b.distances.image_caption),
                          hull(a.distances.image_text, b.distances.image_text)};
  m.keywords_line = a.keywords_line;
  push_unique(m.keywords_line, b.keywords_line);
  m.fonts = a.fonts;
  for (const auto& [role, list] : b.fonts) push_unique(m.fonts[role], list);
  return m;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("DDR_DATA_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
#ifdef DDR_DEFAULT_DATA_DIR
  return std::filesystem::path(DDR_DEFAULT_DATA_DIR);
#else
  return std::filesystem::path("data");
#endif
}

StyleProfile resolve_profile(std::string_view name_or_path) {
  const std::filesystem::path as_path(name_or_path);
  if (std::filesystem::is_regular_file(as_path)) return load_style_profile(as_path);

  StyleProfile result;
  bool first = true;
  std::string_view rest = name_or_path;
  while (true) {
    const auto plus = rest.find('+');
    const std::string part(rest.substr(0, plus));
    const auto file = data_dir() / "profiles" / (part + ".profile");
    if (!std::filesystem::is_regular_file(file)) {
      throw IoError("unknown profile '" + part + "' (looked for " + file.string() + ")");
    }
    StyleProfile p = load_style_profile(file);
    result = first ? std::move(p) : merge_profiles(result, p);
    first = false;
    if (plus == std::string_view::npos) break;
    rest = rest.substr(plus + 1);
  }
  return result;
}

}  // namespace ddr
