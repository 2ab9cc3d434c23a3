#include "ddr/assets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ddr/error.hpp"

namespace ddr {

namespace {

constexpr double kProceduralArea = 300000.0;

std::string hex_key(RngSeed s) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%016llx-%llu", static_cast<unsigned long long>(s.seed),
                static_cast<unsigned long long>(s.stream_id));
  return buf;
}

cv::Size procedural_size(double aspect) {
  aspect = std::clamp(aspect, 1.0 / 40.0, 40.0);
  const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(kProceduralArea * aspect))), 16, 6000);
  const int h = std::clamp(static_cast<int>(std::lround(std::sqrt(kProceduralArea / aspect))), 16, 6000);
  return {w, h};
}

int gray(Rng& rng, int lo, int hi) { return static_cast<int>(rng.uniform_int(lo, hi)); }

// A dark bar standing in for a word or a run of words.
void text_bar(cv::Mat& img, int x, int y, int len, int height, int shade) {
  if (len <= 0 || height <= 0) return;
  cv::rectangle(img, cv::Rect(x, y, len, height), cv::Scalar(shade), cv::FILLED);
}

void draw_figure(cv::Mat& img, Rng& rng) {
  const int w = img.cols;
  const int h = img.rows;
  const int m = std::max(4, static_cast<int>(0.08 * std::min(w, h)));
  const int t = std::max(1, std::max(w, h) / 300);
  const cv::Point origin(m, h - m);

  const int kind = static_cast<int>(rng.uniform_int(0, 2));
  const int plot_w = w - 2 * m;
  const int plot_h = h - 2 * m;
  if (kind == 0) {
    const int series = static_cast<int>(rng.uniform_int(1, 3));
    for (int s = 0; s < series; ++s) {
      const int n = static_cast<int>(rng.uniform_int(6, 20));
      std::vector<cv::Point> pts;
      double v = rng.uniform(0.2, 0.8);
      for (int i = 0; i < n; ++i) {
        v = std::clamp(v + rng.uniform(-0.15, 0.15), 0.05, 0.95);
        pts.emplace_back(m + plot_w * i / std::max(1, n - 1), h - m - static_cast<int>(v * plot_h));
      }
      cv::polylines(img, pts, false, cv::Scalar(gray(rng, 0, 120)), t + 1, cv::LINE_8);
    }
  } else if (kind == 1) {
    const int n = static_cast<int>(rng.uniform_int(15, 80));
    const int r = std::max(1, std::min(w, h) / 80);
    for (int i = 0; i < n; ++i) {
      const cv::Point p(m + static_cast<int>(rng.uniform(0.03, 0.97) * plot_w),
                        h - m - static_cast<int>(rng.uniform(0.03, 0.97) * plot_h));
      cv::circle(img, p, r, cv::Scalar(gray(rng, 0, 140)), cv::FILLED, cv::LINE_8);
    }
  } else {
    const int n = static_cast<int>(rng.uniform_int(3, 12));
    const int slot = std::max(2, plot_w / n);
    for (int i = 0; i < n; ++i) {
      const int bh = static_cast<int>(rng.uniform(0.1, 0.95) * plot_h);
      const int x0 = m + i * slot + slot / 5;
      cv::rectangle(img, cv::Rect(x0, h - m - bh, std::max(1, slot * 3 / 5), bh), cv::Scalar(gray(rng, 60, 190)),
                    cv::FILLED);
    }
  }

  // Axes last so they stay visible over the data.
  cv::line(img, cv::Point(m, m), origin, cv::Scalar(0), t, cv::LINE_8);
  cv::line(img, origin, cv::Point(w - m, h - m), cv::Scalar(0), t, cv::LINE_8);
  const int tick = std::max(2, m / 3);
  for (int i = 1; i <= 5; ++i) {
    const int x = m + plot_w * i / 5;
    const int y = h - m - plot_h * i / 5;
    cv::line(img, cv::Point(x, h - m), cv::Point(x, h - m + tick), cv::Scalar(0), t, cv::LINE_8);
    cv::line(img, cv::Point(m - tick, y), cv::Point(m, y), cv::Scalar(0), t, cv::LINE_8);
  }
}

void draw_table(cv::Mat& img, Rng& rng) {
  const int w = img.cols;
  const int h = img.rows;
  const int rows = static_cast<int>(rng.uniform_int(2, std::clamp(h / 14, 2, 14)));
  const int cols = static_cast<int>(rng.uniform_int(2, std::clamp(w / 40, 2, 7)));
  const int t = std::max(1, std::min(w, h) / 200);
  const int m = t;
  const bool full_grid = rng.bernoulli(0.5);
  const int row_h = (h - 2 * m) / rows;
  const int col_w = (w - 2 * m) / cols;

  for (int r = 0; r <= rows; ++r) {
    const int y = std::min(h - 1 - t / 2, m + r * row_h);
    const bool rule = full_grid || r == 0 || r == 1 || r == rows;
    if (rule) cv::line(img, cv::Point(m, y), cv::Point(w - 1 - m, y), cv::Scalar(0), (r == 0 || r == rows) ? t + 1 : t);
  }
  if (full_grid) {
    for (int c = 0; c <= cols; ++c) {
      const int x = std::min(w - 1 - t / 2, m + c * col_w);
      cv::line(img, cv::Point(x, m), cv::Point(x, m + rows * row_h), cv::Scalar(0), t);
    }
  }
  const int bar_h = std::max(1, row_h * 2 / 5);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int len = static_cast<int>(rng.uniform(0.25, 0.75) * col_w);
      const int x = m + c * col_w + (col_w - len) / 2;
      const int y = m + r * row_h + (row_h - bar_h) / 2;
      text_bar(img, x, y, len, bar_h, r == 0 ? 0 : gray(rng, 20, 90));
    }
  }
}

void draw_algorithm(cv::Mat& img, Rng& rng) {
  const int w = img.cols;
  const int h = img.rows;
  const int t = std::max(1, std::min(w, h) / 150);
  const int lines = std::clamp(h / 22, 2, 40);
  const int line_h = h / (lines + 2);
  const int bar_h = std::max(1, line_h * 2 / 5);
  cv::line(img, cv::Point(0, t), cv::Point(w - 1, t), cv::Scalar(0), t + 1);
  text_bar(img, w / 40 + 2, line_h / 2, w / 3, bar_h, 0);
  cv::line(img, cv::Point(0, line_h + t), cv::Point(w - 1, line_h + t), cv::Scalar(0), t);
  const double scale = std::max(0.2, line_h / 40.0);
  int indent = 0;
  for (int i = 0; i < lines; ++i) {
    const int y = line_h * (i + 1) + line_h / 2 + line_h / 2;
    cv::putText(img, std::to_string(i + 1) + ":", cv::Point(2, y + bar_h), cv::FONT_HERSHEY_SIMPLEX, scale,
                cv::Scalar(40), 1, cv::LINE_8);
    const int step = w / 20;
    const int roll = static_cast<int>(rng.uniform_int(0, 3));
    if (roll == 0 && indent < 4) ++indent;
    if (roll == 1 && indent > 0) --indent;
    const int x = w / 10 + indent * step;
    const int len = static_cast<int>(rng.uniform(0.2, 0.85) * std::max(1, w - x - 4));
    text_bar(img, x, y, len, bar_h, gray(rng, 0, 70));
  }
  cv::line(img, cv::Point(0, h - 1 - t), cv::Point(w - 1, h - 1 - t), cv::Scalar(0), t + 1);
}

void draw_equation(cv::Mat& img, Rng& rng) {
  static const char* kSymbols[] = {"x", "y", "z", "a", "b", "c", "k", "n", "f(x)", "g(y)", "(", ")", "2", "i", "j"};
  static const char* kOps[] = {" + ", " - ", " = ", " / ", "^2", " * ", " < ", " > "};
  const double aspect = static_cast<double>(img.cols) / img.rows;
  const int n = std::clamp(static_cast<int>(aspect * 2.5), 1, 60);
  std::string expr = "y = ";
  for (int i = 0; i < n; ++i) {
    expr += kSymbols[rng.index(std::size(kSymbols))];
    if (i + 1 < n) expr += kOps[rng.index(std::size(kOps))];
  }
  const int font = rng.bernoulli(0.5) ? cv::FONT_HERSHEY_COMPLEX : cv::FONT_HERSHEY_SIMPLEX | cv::FONT_ITALIC;
  int base = 0;
  const cv::Size unit = cv::getTextSize(expr, font, 1.0, 1, &base);
  const double scale = std::max(0.05, std::min(0.9 * img.cols / std::max(1, unit.width),
                                               0.6 * img.rows / std::max(1, unit.height + base)));
  const int thick = std::max(1, static_cast<int>(std::lround(scale * 3.0)));
  const cv::Size sz = cv::getTextSize(expr, font, scale, thick, &base);
  const cv::Point org((img.cols - sz.width) / 2, (img.rows + sz.height) / 2);
  cv::putText(img, expr, org, font, scale, cv::Scalar(0), thick, cv::LINE_8);
  // Fraction bar under part of the expression for some variety.
  if (rng.bernoulli(0.3) && img.rows > 30) {
    const int y = org.y + base + 2;
    if (y < img.rows - 1) cv::line(img, cv::Point(org.x, y), cv::Point(org.x + sz.width / 3, y), cv::Scalar(0), 1);
  }
}

bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

std::string_view to_string(AssetSource s) { return s == AssetSource::kExternal ? "external" : "procedural"; }
std::string_view to_string(UsagePolicy p) { return p == UsagePolicy::kOnce ? "once" : "with-replacement"; }

AssetPool::AssetPool() : shared_(std::make_shared<Shared>()) {}

AssetPool AssetPool::procedural() { return AssetPool(); }

AssetPool AssetPool::external(std::map<ClassLabel, std::vector<AssetRef>> assets, UsagePolicy policy) {
  AssetPool pool;
  pool.procedural_ = false;
  pool.policy_ = policy;
  for (auto& [label, list] : assets) {
    pool.shared_->cursor[label] = std::make_unique<std::atomic<std::size_t>>(0);
  }
  pool.shared_->assets = std::move(assets);
  return pool;
}

std::size_t AssetPool::size(ClassLabel c) const {
  if (procedural_) return SIZE_MAX;
  auto it = shared_->assets.find(c);
  return it == shared_->assets.end() ? 0 : it->second.size();
}

std::size_t AssetPool::remaining(ClassLabel c) const {
  if (procedural_ || policy_ == UsagePolicy::kWithReplacement) return size(c);
  auto it = shared_->cursor.find(c);
  if (it == shared_->cursor.end()) return 0;
  const std::size_t used = it->second->load();
  return used >= size(c) ? 0 : size(c) - used;
}

AssetRef AssetPool::checkout(ClassLabel c, double target_aspect, RngSeed seed) const {
  if (!is_visual_class(c)) throw ValidationError("assets: class " + std::string(class_name(c)) + " has no imagery");
  if (procedural_) {
    const cv::Size sz = procedural_size(target_aspect);
    AssetRef ref;
    ref.id = "procedural/" + std::string(class_name(c)) + "/" + hex_key(seed);
    ref.label = c;
    ref.width_px = sz.width;
    ref.height_px = sz.height;
    ref.source = AssetSource::kProcedural;
    ref.seed = seed;
    return ref;
  }
  auto it = shared_->assets.find(c);
  if (it == shared_->assets.end() || it->second.empty()) {
    throw ExhaustedAssetsError("assets: pool has no " + std::string(class_name(c)) + " images");
  }
  const auto& list = it->second;
  if (policy_ == UsagePolicy::kWithReplacement) {
    Rng rng(seed);
    return list[rng.index(list.size())];
  }
  const std::size_t idx = shared_->cursor.at(c)->fetch_add(1);
  if (idx >= list.size()) {
    throw ExhaustedAssetsError("assets: all " + std::to_string(list.size()) + " " + std::string(class_name(c)) +
                               " images already used");
  }
  return list[idx];
}

std::pair<AssetPool, AssetPool> AssetPool::partition(double first_fraction) const {
  if (procedural_) return {*this, *this};
  std::map<ClassLabel, std::vector<AssetRef>> a;
  std::map<ClassLabel, std::vector<AssetRef>> b;
  for (const auto& [label, list] : shared_->assets) {
    const auto cut = static_cast<std::size_t>(std::floor(first_fraction * static_cast<double>(list.size()) + 0.5));
    a[label].assign(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(std::min(cut, list.size())));
    b[label].assign(list.begin() + static_cast<std::ptrdiff_t>(std::min(cut, list.size())), list.end());
  }
  return {external(std::move(a), policy_), external(std::move(b), policy_)};
}

ClassMap default_class_map() {
  return {{"figure", ClassLabel::kFigure},
          {"table", ClassLabel::kTable},
          {"algorithm", ClassLabel::kAlgorithm},
          {"equation", ClassLabel::kEquation}};
}

AssetPool load_asset_dir(const std::filesystem::path& dir, const ClassMap& class_map, UsagePolicy policy) {
  if (!std::filesystem::is_directory(dir)) throw IoError("asset directory not found: " + dir.string());
  std::map<ClassLabel, std::vector<AssetRef>> assets;
  for (const auto& [subdir, label] : class_map) {
    if (!is_visual_class(label)) throw ValidationError("class_map: " + subdir + " maps to a text class");
    const auto sub = dir / subdir;
    if (!std::filesystem::is_directory(sub)) continue;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(sub)) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("asset class '" + subdir + "' is empty: " + sub.string());
    auto& list = assets[label];
    for (const auto& f : files) {
      const cv::Mat img = cv::imread(f.string(), cv::IMREAD_GRAYSCALE);
      if (img.empty()) throw IoError("cannot decode image " + f.string());
      AssetRef ref;
      ref.id = subdir + "/" + f.filename().string();
      ref.label = label;
      ref.width_px = img.cols;
      ref.height_px = img.rows;
      ref.source = AssetSource::kExternal;
      ref.path = f;
      list.push_back(std::move(ref));
    }
  }
  return AssetPool::external(std::move(assets), policy);
}

AssetImage procedural_asset(ClassLabel c, double target_aspect, RngSeed seed) {
  if (!is_visual_class(c)) throw ValidationError("procedural_asset: " + std::string(class_name(c)) + " is not visual");
  AssetImage out;
  const cv::Size sz = procedural_size(target_aspect);
  out.ref.id = "procedural/" + std::string(class_name(c)) + "/" + hex_key(seed);
  out.ref.label = c;
  out.ref.width_px = sz.width;
  out.ref.height_px = sz.height;
  out.ref.source = AssetSource::kProcedural;
  out.ref.seed = seed;
  out.image = cv::Mat(sz, CV_8UC1, cv::Scalar(255));
  Rng rng = Rng(seed).fork(class_name(c));
  switch (c) {
    case ClassLabel::kFigure: draw_figure(out.image, rng); break;
    case ClassLabel::kTable: draw_table(out.image, rng); break;
    case ClassLabel::kAlgorithm: draw_algorithm(out.image, rng); break;
    default: draw_equation(out.image, rng); break;
  }
  return out;
}

cv::Mat load_asset_image(const AssetRef& ref) {
  if (ref.source == AssetSource::kProcedural) {
    return procedural_asset(ref.label, ref.aspect(), ref.seed).image;
  }
  cv::Mat img = cv::imread(ref.path.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw IoError("cannot decode image " + ref.path.string());
  return img;
}

cv::Mat degrade_image(const cv::Mat& gray_img, RngSeed seed) {
  Rng rng = Rng(seed).fork("degrade");
  cv::Mat out;
  const double sigma = rng.uniform(0.5, 1.2);
  cv::GaussianBlur(gray_img, out, cv::Size(3, 3), sigma);
  const double f = rng.uniform(0.5, 0.8);
  cv::Mat small;
  cv::resize(out, small, cv::Size(), f, f, cv::INTER_AREA);
  if (!small.empty()) cv::resize(small, out, gray_img.size(), 0, 0, cv::INTER_LINEAR);
  cv::threshold(out, out, rng.uniform(150.0, 210.0), 255, cv::THRESH_BINARY);
  return out;
}

}  // namespace ddr
