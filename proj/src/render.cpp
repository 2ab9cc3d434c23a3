#include "ddr/render.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include <opencv2/freetype.hpp>
#include <opencv2/imgproc.hpp>

#include "ddr/error.hpp"

namespace ddr {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string font_key(const std::string& family, std::string_view weight, std::string_view slant) {
  return lower(family) + "|" + std::string(weight) + "|" + std::string(slant);
}

// FreeType2::putText with a top-left origin puts the baseline one font
// height below the origin, so ink spans about [0.25, 1.2] font heights.
// Raising the origin by this much centres the ink in a 1.2 pitch.
constexpr double kOriginLift = 0.1;

// Per-page rasterization state: loaded faces and measured word widths.
class Typesetter {
 public:
  Typesetter(const FontMap& fonts, double dpi, bool antialias) : fonts_(fonts), dpi_(dpi), antialias_(antialias) {}

  struct Face {
    cv::freetype::FreeType2* ft = nullptr;
    int px = 10;
    Caps caps = Caps::kNone;
    Alignment align = Alignment::kLeft;
    std::string path;
  };

  Face face(const ResolvedFont& f, double scale = 1.0) {
    const std::string path = fonts_.resolve(f.spec).string();
    auto it = loaded_.find(path);
    if (it == loaded_.end()) {
      auto ft = cv::freetype::createFreeType2();
      try {
        ft->loadFontData(path, 0);
      } catch (const cv::Exception& e) {
        throw FontError("cannot load font " + path + ": " + e.what());
      }
      it = loaded_.emplace(path, ft).first;
    }
    Face out;
    out.ft = it->second.get();
    const double small = f.spec.caps == Caps::kSmallCaps ? 0.8 : 1.0;
    out.px = std::max(4, static_cast<int>(std::lround(f.size_pt * dpi_ / 72.0 * scale * small)));
    out.caps = f.spec.caps;
    out.align = f.spec.alignment;
    out.path = path;
    return out;
  }

  std::string cased(const Face& f, const std::string& word) const {
    return f.caps == Caps::kNone ? word : upper(word);
  }

  int width(const Face& f, const std::string& word) {
    const std::string key = f.path + "|" + std::to_string(f.px) + "|" + word;
    auto it = widths_.find(key);
    if (it != widths_.end()) return it->second;
    int w = 0;
    for (const std::string& piece : pieces(word)) w += raw_width(f, piece);
    widths_.emplace(key, w);
    return w;
  }

  int space(const Face& f) { return std::max(1, static_cast<int>(std::lround(0.28 * f.px))); }

  void put(cv::Mat& canvas, const Face& f, const std::string& text, int x, int top) {
    for (const std::string& piece : pieces(text)) {
      f.ft->putText(canvas, piece, cv::Point(x, top), f.px, cv::Scalar(0, 0, 0), -1,
                    antialias_ ? cv::LINE_AA : cv::LINE_8, false);
      x += raw_width(f, piece);
    }
  }

 private:
  // The OpenCV FreeType backend shapes "fi", "fl", ... into one ligature glyph
  // but still advances per character, repeating the last letter. Breaking
  // words after each 'f' keeps every piece ligature-free.
  static std::vector<std::string> pieces(const std::string& word) {
    std::vector<std::string> out(1);
    for (std::size_t i = 0; i < word.size(); ++i) {
      out.back() += word[i];
      if (word[i] == 'f' && i + 1 < word.size()) out.emplace_back();
    }
    return out;
  }

  int raw_width(const Face& f, const std::string& piece) {
    const std::string key = f.path + "|" + std::to_string(f.px) + "|#" + piece;
    auto it = widths_.find(key);
    if (it != widths_.end()) return it->second;
    int base = 0;
    const int w = f.ft->getTextSize(piece, f.px, -1, &base).width;
    widths_.emplace(key, w);
    return w;
  }

  const FontMap& fonts_;
  double dpi_;
  bool antialias_;
  std::map<std::string, cv::Ptr<cv::freetype::FreeType2>> loaded_;
  std::map<std::string, int> widths_;
};

struct Run {
  std::string word;
  int width = 0;
};

struct Line {
  std::vector<Run> runs;
  int indent = 0;
  bool paragraph_end = false;
};

// Greedy word wrap. Words wider than the line are placed alone (and clipped).
std::vector<Line> wrap(Typesetter& ts, const Typesetter::Face& f, const std::vector<std::string>& words, int width,
                       int first_indent) {
  std::vector<Line> lines;
  Line cur;
  cur.indent = first_indent;
  int used = first_indent;
  const int sp = ts.space(f);
  for (const std::string& raw : words) {
    Run r{ts.cased(f, raw), 0};
    r.width = ts.width(f, r.word);
    const int need = cur.runs.empty() ? r.width : used + sp + r.width;
    if (!cur.runs.empty() && need > width) {
      lines.push_back(std::move(cur));
      cur = Line{};
      used = 0;
    }
    used = cur.runs.empty() ? cur.indent + r.width : used + sp + r.width;
    cur.runs.push_back(std::move(r));
  }
  if (!cur.runs.empty()) {
    cur.paragraph_end = true;
    lines.push_back(std::move(cur));
  }
  return lines;
}

void draw_line(cv::Mat& canvas, Typesetter& ts, const Typesetter::Face& f, const Line& line, int top, int width,
               int pitch) {
  if (line.runs.empty()) return;
  const int sp = ts.space(f);
  int natural = line.indent;
  for (std::size_t i = 0; i < line.runs.size(); ++i) natural += line.runs[i].width + (i ? sp : 0);
  const int origin = top + static_cast<int>(std::lround(0.5 * (pitch - 1.2 * f.px) - kOriginLift * f.px));
  double gap = sp;
  int x = line.indent;
  switch (f.align) {
    case Alignment::kCenter: x = std::max(0, (width - natural) / 2); break;
    case Alignment::kDistributed:
      if (!line.paragraph_end && line.runs.size() > 1 && natural < width) {
        gap = sp + static_cast<double>(width - natural) / static_cast<double>(line.runs.size() - 1);
      }
      break;
    case Alignment::kLeft: break;
  }
  double pos = x;
  for (const Run& r : line.runs) {
    ts.put(canvas, f, r.word, static_cast<int>(std::lround(pos)), origin);
    pos += r.width + gap;
  }
}

// Vertical stack of text lines inside one element box.
class Block {
 public:
  Block(cv::Mat& canvas, Typesetter& ts) : canvas_(canvas), ts_(ts) {}

  int pitch(const Typesetter::Face& f) const { return std::max(1, static_cast<int>(std::lround(1.2 * f.px))); }
  int remaining_lines(const Typesetter::Face& f) const {
    return static_cast<int>(std::floor((canvas_.rows - y_) / static_cast<double>(pitch(f)) + 0.05));
  }

  // Draws as many lines as fit; returns false if some were cut.
  bool lines(const Typesetter::Face& f, const std::vector<Line>& ls, int reserve_lines = 0) {
    const int fit = std::max(0, remaining_lines(f) - reserve_lines);
    const int n = std::min<int>(fit, static_cast<int>(ls.size()));
    for (int i = 0; i < n; ++i) {
      Line l = ls[static_cast<std::size_t>(i)];
      if (i == n - 1 && n < static_cast<int>(ls.size())) l.paragraph_end = true;
      draw_line(canvas_, ts_, f, l, y_, canvas_.cols, pitch(f));
      y_ += pitch(f);
    }
    return n == static_cast<int>(ls.size());
  }

  bool paragraph(const Typesetter::Face& f, const std::vector<std::string>& words, int indent = 0,
                 int reserve_lines = 0) {
    return lines(f, wrap(ts_, f, words, canvas_.cols, indent), reserve_lines);
  }

  bool full() const { return y_ >= canvas_.rows; }

 private:
  cv::Mat& canvas_;
  Typesetter& ts_;
  int y_ = 0;
};

std::vector<std::string> slice(const std::vector<std::string>& v, std::size_t a, std::size_t b) {
  return {v.begin() + static_cast<std::ptrdiff_t>(std::min(a, v.size())),
          v.begin() + static_cast<std::ptrdiff_t>(std::min(b, v.size()))};
}

std::string caption_prefix(ClassLabel label, int number) {
  switch (label) {
    case ClassLabel::kTable: return "Table " + std::to_string(number) + ":";
    case ClassLabel::kAlgorithm: return "Algorithm " + std::to_string(number);
    case ClassLabel::kEquation: return "Equation " + std::to_string(number) + ":";
    default: return "Figure " + std::to_string(number) + ":";
  }
}

void paste_asset(cv::Mat& canvas, const AssetRef& ref) {
  const cv::Mat img = load_asset_image(ref);
  if (img.empty() || canvas.empty()) return;
  const double s = std::min(static_cast<double>(canvas.cols) / img.cols, static_cast<double>(canvas.rows) / img.rows);
  const int w = std::clamp(static_cast<int>(std::lround(img.cols * s)), 1, canvas.cols);
  const int h = std::clamp(static_cast<int>(std::lround(img.rows * s)), 1, canvas.rows);
  cv::Mat scaled;
  cv::resize(img, scaled, cv::Size(w, h), 0, 0, s < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR);
  cv::Mat gray3;
  cv::cvtColor(scaled, gray3, cv::COLOR_GRAY2BGR);
  gray3.copyTo(canvas(cv::Rect((canvas.cols - w) / 2, (canvas.rows - h) / 2, w, h)));
}

}  // namespace

FontMap FontMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FontError("cannot open font map " + path.string());
  FontMap m;
  m.source_ = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    std::vector<std::string> parts;
    if (eq != std::string::npos) {
      std::stringstream ss(line.substr(0, eq));
      std::string part;
      while (std::getline(ss, part, ',')) parts.push_back(lower(trim(part)));
    }
    if (parts.size() != 3) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'family, weight, slant = file'");
    }
    std::filesystem::path file = trim(line.substr(eq + 1));
    if (file.is_relative()) file = path.parent_path() / file;
    m.files_[parts[0] + "|" + parts[1] + "|" + parts[2]] = file;
  }
  return m;
}

std::filesystem::path FontMap::default_path() {
  if (const char* env = std::getenv("DDR_FONT_MAP"); env && *env) return env;
  return data_dir() / "fonts.map";
}

FontMap FontMap::bundled() { return load(default_path()); }

std::filesystem::path FontMap::resolve(const FontSpec& spec) const {
  const std::string key = font_key(spec.family, to_string(spec.weight), to_string(spec.slant));
  auto it = files_.find(key);
  if (it == files_.end()) {
    throw FontError("no font file for '" + spec.family + "' " + std::string(to_string(spec.weight)) + " " +
                    std::string(to_string(spec.slant)) + " in " + source_.string());
  }
  if (!std::filesystem::exists(it->second)) throw FontError("font file missing: " + it->second.string());
  return it->second;
}

std::map<std::string, std::string> FontMap::substitutions() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, file] : files_) {
    if (key.ends_with("|regular|upright")) out[key.substr(0, key.find('|'))] = file.stem().string();
  }
  return out;
}

void validate(const RenderSpec& spec) {
  if (spec.width_px < 200 || spec.height_px < 200) {
    throw ValidationError("page_px: width and height must be at least 200");
  }
}

PixelBox to_pixels(const BBox& box, int width_px, int height_px) {
  PixelBox p{static_cast<int>(std::lround(box.x * width_px)), static_cast<int>(std::lround(box.y * height_px)),
             static_cast<int>(std::lround(box.w * width_px)), static_cast<int>(std::lround(box.h * height_px))};
  // Independent rounding can overshoot the page edge by one pixel.
  p.x = std::clamp(p.x, 0, width_px);
  p.y = std::clamp(p.y, 0, height_px);
  p.w = std::min(p.w, width_px - p.x);
  p.h = std::min(p.h, height_px - p.y);
  return p;
}

std::vector<PixelAnnotation> annotate(const PageLayout& layout, int width_px, int height_px) {
  std::vector<PixelAnnotation> out;
  out.reserve(layout.elements.size());
  for (const PlacedElement& e : layout.elements) {
    out.push_back({e.id, e.label, to_pixels(e.box, width_px, height_px), e.box});
  }
  return out;
}

Renderer::Renderer(RenderSpec spec, const TextSource& text, FontMap fonts)
    : spec_(spec), text_(text), fonts_(std::move(fonts)) {
  validate(spec_);
}

RenderedPage Renderer::render(const PageLayout& layout) const {
  RenderedPage out;
  out.annotations = annotate(layout, spec_.width_px, spec_.height_px);
  cv::Mat page(spec_.height_px, spec_.width_px, CV_8UC3, cv::Scalar(255, 255, 255));
  Typesetter ts(fonts_, spec_.dpi(), spec_.antialias);
  const PageConfig& c = layout.config;
  auto font = [&](FontRole r, double scale = 1.0) { return ts.face(c.fonts.at(r), scale); };

  std::map<ClassLabel, int> numbering;
  std::map<int, int> number_of;
  for (const PlacedElement& e : layout.elements) {
    if (e.linked_caption) number_of[e.id] = ++numbering[e.label];
  }

  for (std::size_t i = 0; i < layout.elements.size(); ++i) {
    const PlacedElement& e = layout.elements[i];
    const PixelBox& pb = out.annotations[i].box;
    const cv::Rect roi = cv::Rect(pb.x, pb.y, pb.w, pb.h) & cv::Rect(0, 0, page.cols, page.rows);
    if (roi.width <= 0 || roi.height <= 0) continue;
    cv::Mat canvas(roi.size(), CV_8UC3, cv::Scalar(255, 255, 255));
    bool complete = true;

    if (const auto* asset = std::get_if<AssetRef>(&e.content)) {
      paste_asset(canvas, *asset);
    } else if (const auto* t = std::get_if<TextRef>(&e.content)) {
      Block block(canvas, ts);
      Rng rng(t->seed);
      switch (t->role) {
        case TextRole::kAuthor: {
          const TextBlock tb = text_.pseudo_authors(std::max(1, t->lines), *c.profile, t->seed);
          const auto f = font(FontRole::kAuthor);
          for (std::size_t l = 0; l < tb.line_starts.size(); ++l) {
            const std::size_t end = l + 1 < tb.line_starts.size() ? tb.line_starts[l + 1] : tb.tokens.size();
            auto lines = wrap(ts, f, slice(tb.tokens, tb.line_starts[l], end), canvas.cols, 0);
            lines.resize(1);
            complete &= block.lines(f, lines);
          }
          break;
        }
        case TextRole::kAbstract: {
          block.paragraph(font(FontRole::kAbstractHeader), {"Abstract"});
          const int reserve = c.keywords_line ? 1 : 0;
          const TextBlock tb = text_.pseudo_text(TextRole::kAbstract, t->approx_tokens, t->seed);
          complete = block.paragraph(font(FontRole::kAbstractText), tb.tokens, 0, reserve);
          if (c.keywords_line) {
            const TextBlock kw = text_.pseudo_text(TextRole::kKeywords, 4, rng.child_seed(1));
            std::vector<std::string> words{"Keywords:"};
            words.insert(words.end(), kw.tokens.begin(), kw.tokens.end());
            auto lines = wrap(ts, font(FontRole::kKeywords), words, canvas.cols, 0);
            lines.resize(std::min<std::size_t>(lines.size(), 1));
            block.lines(font(FontRole::kKeywords), lines);
          }
          break;
        }
        case TextRole::kCaption: {
          const auto fn = font(FontRole::kCaptionNumber);
          const auto fc = font(FontRole::kCaption);
          int number = 1;
          ClassLabel owner = ClassLabel::kFigure;
          if (e.caption_of) {
            owner = layout.find(*e.caption_of)->label;
            number = number_of[*e.caption_of];
          }
          const std::string prefix = caption_prefix(owner, number);
          const TextBlock tb = text_.pseudo_text(TextRole::kCaption, t->approx_tokens, t->seed);
          // The number run is drawn separately; caption text wraps after it on the first line.
          const int indent = ts.width(fn, ts.cased(fn, prefix)) + ts.space(fc);
          auto lines = wrap(ts, fc, tb.tokens, canvas.cols, indent);
          if (!lines.empty()) {
            Typesetter::Face left = fc;
            left.align = Alignment::kLeft;
            const int pitch = block.pitch(fc);
            Typesetter::Face num = fn;
            num.align = Alignment::kLeft;
            Line head;
            head.runs.push_back({ts.cased(fn, prefix), indent});
            if (block.remaining_lines(fc) > 0) draw_line(canvas, ts, num, head, 0, canvas.cols, pitch);
            if (fc.align == Alignment::kCenter) lines.front().indent = indent;
            const Typesetter::Face first = fc.align == Alignment::kCenter ? left : fc;
            complete = block.lines(first, {lines.front()});
            lines.erase(lines.begin());
            complete = complete && block.lines(fc, lines);
          }
          break;
        }
        case TextRole::kBody: {
          const auto fb = font(FontRole::kBody);
          const TextBlock tb = text_.pseudo_text(TextRole::kBody, t->approx_tokens, t->seed);
          if (rng.bernoulli(0.3) && block.remaining_lines(fb) >= 4) {
            const FontRole level = rng.bernoulli(0.5) ? FontRole::kHeading1 : FontRole::kHeading2;
            const TextBlock head = text_.pseudo_text(TextRole::kHeading1, 3, rng.child_seed(1));
            std::vector<std::string> words{std::to_string(rng.uniform_int(1, 7))};
            words.insert(words.end(), head.tokens.begin(), head.tokens.end());
            auto lines = wrap(ts, font(level), words, canvas.cols, 0);
            lines.resize(1);
            block.lines(font(level), lines);
          }
          // Paragraphs of 30 to 90 words with a first-line indent.
          const int indent = static_cast<int>(std::lround(1.5 * fb.px));
          std::size_t pos = 0;
          while (pos < tb.tokens.size() && !block.full()) {
            const std::size_t len = static_cast<std::size_t>(rng.uniform_int(30, 90));
            complete = block.paragraph(fb, slice(tb.tokens, pos, pos + len), indent);
            pos += len;
          }
          complete = complete && pos >= tb.tokens.size();
          break;
        }
        default: {
          const FontRole role = t->font;
          const TextBlock tb = text_.pseudo_text(t->role, t->approx_tokens, t->seed);
          complete = block.paragraph(font(role), tb.tokens);
          break;
        }
      }
    }
    if (!complete) {
      out.truncations.push_back("element " + std::to_string(e.id) + " (" + std::string(class_name(e.label)) +
                                "): text truncated to fit");
    }
    cv::Mat dst = page(roi);
    cv::min(dst, canvas, dst);
  }

  cv::cvtColor(page, out.image, cv::COLOR_BGR2GRAY);
  if (spec_.degrade) out.image = degrade_image(out.image, layout.seed);
  return out;
}

}  // namespace ddr
