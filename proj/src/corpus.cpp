#include "ddr/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <opencv2/imgcodecs.hpp>

#include "ddr/error.hpp"
#include "ddr/sampler.hpp"

namespace ddr {

namespace {

std::string page_file(const std::string& split, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return split + "/" + split + "-" + buf + ".png";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void render_split(const Renderer& renderer, const std::vector<PageLayout>& layouts, const DatasetManifest& m,
                  const std::filesystem::path& dir, int jobs, std::vector<std::string>& truncations) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= layouts.size()) return;
      try {
        RenderedPage page = renderer.render(layouts[i]);
        const std::filesystem::path path = dir / m.images[i].file_name;
        if (!cv::imwrite(path.string(), page.image)) throw IoError("cannot write " + path.string());
        if (!page.truncations.empty()) {
          std::lock_guard lock(mu);
          for (auto& t : page.truncations) truncations.push_back(m.images[i].file_name + ": " + t);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = layouts.size();
        return;
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(layouts.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master_seed, std::string_view name) {
  return splitmix64(splitmix64(master_seed) ^ hash_tag(name));
}

PageLayout compose_one(const std::shared_ptr<const StyleProfile>& profile, const AssetPool& pool, RngSeed seed,
                       const ComposeOptions& options) {
  std::string last_error;
  for (int attempt = 0; attempt <= kComposeRetries; ++attempt) {
    const RngSeed s = attempt == 0 ? seed : RngSeed{splitmix64(seed.seed ^ splitmix64(attempt)), seed.stream_id};
    try {
      const PageConfig config = sample_page_config(profile, s);
      return compose_page(config, pool, s, options);
    } catch (const ComposeError& e) {
      last_error = e.what();
    } catch (const GeometryError& e) {
      last_error = e.what();
    }
  }
  throw ComposeError("page " + std::to_string(seed.stream_id) + " infeasible after " +
                     std::to_string(kComposeRetries + 1) + " attempts: " + last_error);
}

DatasetManifest split_manifest(const std::vector<PageLayout>& layouts, const std::string& split,
                               const RenderSpec& render) {
  DatasetManifest m;
  m.provenance.split = split;
  int ann_id = 1;
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    const PageLayout& L = layouts[i];
    ImageRecord im;
    im.id = static_cast<int>(i) + 1;
    im.file_name = page_file(split, i);
    im.width = render.width_px;
    im.height = render.height_px;
    im.page_kind = std::string(to_string(L.page_kind));
    im.page_ordinal = L.page_kind == PageKind::kTitle ? "first" : "middle";
    im.seed = L.seed.seed;
    im.stream = L.seed.stream_id;
    for (const PixelAnnotation& pa : annotate(L, render.width_px, render.height_px)) {
      Annotation a;
      a.id = ann_id++;
      a.image_id = im.id;
      a.category_id = class_id(pa.label);
      a.bbox = pa.box;
      a.bbox_norm = pa.norm;
      if (const auto* ref = std::get_if<AssetRef>(&L.elements[static_cast<std::size_t>(pa.element_id)].content)) {
        a.asset = ref->id;
      }
      m.annotations.push_back(std::move(a));
    }
    m.images.push_back(std::move(im));
  }
  return m;
}

CorpusResult generate_corpus(const std::shared_ptr<const StyleProfile>& profile, const AssetPool& pool,
                             const GenerateOptions& opt) {
  if (opt.n_train < 0 || opt.n_val < 0) throw ValidationError("page counts must be non-negative");
  validate(opt.render);
  const int total = opt.n_train + opt.n_val;
  const double train_share = total > 0 ? static_cast<double>(opt.n_train) / total : 1.0;
  const auto [train_pool, val_pool] =
      pool.policy() == UsagePolicy::kOnce ? pool.partition(train_share) : std::pair<AssetPool, AssetPool>{pool, pool};

  const FontMap fonts = opt.font_map ? FontMap::load(*opt.font_map) : FontMap::bundled();
  Provenance prov;
  prov.version = version_string();
  prov.profile = opt.profile_name.empty() ? profile->name : opt.profile_name;
  prov.seed = opt.master_seed;
  prov.asset_source = pool.is_procedural() ? "procedural" : "external";
  prov.asset_policy = std::string(to_string(pool.policy()));
  prov.font_map = fonts.source().filename().string();
  prov.font_substitutions = fonts.substitutions();
  prov.dpi = static_cast<int>(std::lround(opt.render.dpi()));

  CorpusResult out;
  auto build = [&](const std::string& split, int n, const AssetPool& p, SplitResult& res) {
    const std::uint64_t s = split_seed(opt.master_seed, split);
    res.layouts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      res.layouts.push_back(compose_one(profile, p, RngSeed{s, static_cast<std::uint64_t>(i)}, opt.compose));
      if (opt.log && (i + 1) % 1000 == 0) opt.log(split + ": composed " + std::to_string(i + 1) + " pages");
    }
    res.manifest = split_manifest(res.layouts, split, opt.render);
    Provenance pv = prov;
    pv.split = split;
    res.manifest.provenance = pv;
  };
  build("train", opt.n_train, train_pool, out.train);
  build("val", opt.n_val, val_pool, out.val);

  if (opt.out_dir && opt.write_images) {
    const TextSource text = TextSource::bundled();
    const Renderer renderer(opt.render, text, fonts);
    for (const char* split : {"train", "val"}) std::filesystem::create_directories(*opt.out_dir / split);
    render_split(renderer, out.train.layouts, out.train.manifest, *opt.out_dir, opt.jobs, out.truncations);
    render_split(renderer, out.val.layouts, out.val.manifest, *opt.out_dir, opt.jobs, out.truncations);
  }
  return out;
}

DatasetManifest inject_label_noise(const DatasetManifest& m, const NoiseConfig& cfg,
                                   const std::function<void(const std::string&)>& warn) {
  if (!(cfg.rate >= 0.0 && cfg.rate <= 1.0)) throw ValidationError("noise rate must lie in [0, 1]");
  if (cfg.rate > kMaxRecommendedNoise && warn) {
    warn("noise rate " + fmt(cfg.rate) + " is above the recommended maximum of 0.10");
  }
  DatasetManifest out = m;
  out.provenance.noise_rate = cfg.rate;
  out.provenance.noise_seed = cfg.seed;
  std::vector<int> eligible;
  for (ClassLabel c : kAllClasses) {
    if (c != ClassLabel::kBodyText) eligible.push_back(class_id(c));
  }
  for (Annotation& a : out.annotations) {
    if (a.category_id == class_id(ClassLabel::kBodyText)) continue;
    // One stream per annotation id, so a label's fate does not depend on its neighbours.
    Rng rng(cfg.seed, static_cast<std::uint64_t>(a.id));
    if (!rng.bernoulli(cfg.rate)) continue;
    std::vector<int> others;
    for (int c : eligible) {
      if (c != a.category_id) others.push_back(c);
    }
    a.category_id = others[rng.index(others.size())];
  }
  return out;
}

std::size_t downsample_count(std::size_t pages, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pages) + 0.5));
}

DatasetManifest downsample(const DatasetManifest& m, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("fraction must lie in (0, 1]");
  const std::size_t k = downsample_count(m.images.size(), fraction);
  std::vector<std::size_t> idx(m.images.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(RngSeed{seed, 0});
  // Partial Fisher-Yates: the first k slots are a uniform sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  DatasetManifest out;
  out.provenance = m.provenance;
  out.provenance.sample_fraction = m.provenance.sample_fraction * fraction;
  out.provenance.sample_seeds.push_back(seed);
  std::set<int> keep;
  for (std::size_t i : idx) {
    out.images.push_back(m.images[i]);
    keep.insert(m.images[i].id);
  }
  for (const Annotation& a : m.annotations) {
    if (keep.count(a.image_id)) out.annotations.push_back(a);
  }
  return out;
}

StatsTable corpus_stats(const DatasetManifest& m) {
  StatsTable t;
  std::map<std::pair<int, int>, int> counts;
  for (const Annotation& a : m.annotations) {
    const auto label = class_from_id(a.category_id);
    if (!label) throw ValidationError("annotation " + std::to_string(a.id) + ": unknown category_id");
    const BBox& b = a.bbox_norm;
    t.instances.push_back({a.image_id, *label, b.center_x(), b.center_y(), b.w, b.h});
    ++counts[{a.image_id, a.category_id}];
  }
  for (const ImageRecord& im : m.images) {
    for (ClassLabel c : kAllClasses) {
      const auto it = counts.find({im.id, class_id(c)});
      t.page_counts.push_back({im.id, c, it == counts.end() ? 0 : it->second});
    }
  }
  return t;
}

std::string instances_csv(const StatsTable& t) {
  std::ostringstream os;
  os << "image_id,category_id,category,center_x,center_y,width,height\n";
  for (const auto& s : t.instances) {
    os << s.image_id << ',' << class_id(s.label) << ',' << class_name(s.label) << ',' << fmt(s.center_x) << ','
       << fmt(s.center_y) << ',' << fmt(s.width) << ',' << fmt(s.height) << '\n';
  }
  return os.str();
}

std::string counts_csv(const StatsTable& t) {
  std::ostringstream os;
  os << "image_id,category_id,category,count\n";
  for (const auto& c : t.page_counts) {
    os << c.image_id << ',' << class_id(c.label) << ',' << class_name(c.label) << ',' << c.count << '\n';
  }
  return os.str();
}

}  // namespace ddr
