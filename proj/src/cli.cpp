#include "ddr/cli.hpp"

#include <charconv>
#include <functional>
#include <memory>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddr/corpus.hpp"
#include "ddr/error.hpp"
#include "ddr/eval.hpp"

namespace ddr {

using nlohmann::ordered_json;

namespace {

std::string to_arg(const std::string& v) { return v; }
std::string to_arg(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
template <class T>
  requires std::is_integral_v<T>
std::string to_arg(T v) {
  return std::to_string(v);
}

// Registers options and remembers how to echo their resolved values, so a
// run can be written to run.json and replayed from it.
class Echo {
 public:
  explicit Echo(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& name, T& var, const std::string& desc) {
    fields_.push_back({name, [&var] { return ordered_json(var); }, [&var, name](std::vector<std::string>& argv) {
                         argv.push_back("--" + name);
                         argv.push_back(to_arg(var));
                       }});
    return app_->add_option("--" + name, var, desc)->capture_default_str();
  }

  CLI::Option* path(const std::string& name, std::string& var, const std::string& desc) {
    fields_.push_back({name, [&var] { return var.empty() ? ordered_json(nullptr) : ordered_json(var); },
                       [&var, name](std::vector<std::string>& argv) {
                         if (var.empty()) return;
                         argv.push_back("--" + name);
                         argv.push_back(var);
                       }});
    return app_->add_option("--" + name, var, desc);
  }

  template <class T>
  CLI::Option* list(const std::string& name, std::vector<T>& var, const std::string& desc) {
    fields_.push_back({name, [&var] { return ordered_json(var); }, [&var, name](std::vector<std::string>& argv) {
                         for (const T& v : var) {
                           argv.push_back("--" + name);
                           argv.push_back(to_arg(v));
                         }
                       }});
    return app_->add_option("--" + name, var, desc)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    fields_.push_back({name, [&var] { return ordered_json(var); }, [&var, name](std::vector<std::string>& argv) {
                         if (var) argv.push_back("--" + name);
                       }});
    return app_->add_flag("--" + name, var, desc);
  }

  ordered_json run_record() const {
    ordered_json j;
    j["tool"] = "ddr";
    j["version"] = version_string();
    j["command"] = app_->get_name();
    ordered_json args = ordered_json::object();
    std::vector<std::string> argv{app_->get_name()};
    for (const auto& f : fields_) {
      args[f.name] = f.value();
      f.append(argv);
    }
    j["args"] = args;
    j["argv"] = argv;
    return j;
  }

 private:
  struct Field {
    std::string name;
    std::function<ordered_json()> value;
    std::function<void(std::vector<std::string>&)> append;
  };
  CLI::App* app_;
  std::vector<Field> fields_;
};

std::filesystem::path run_file_for(const std::filesystem::path& out) {
  return out.parent_path() / (out.stem().string() + ".run.json");
}

void write_run(const Echo& echo, const std::filesystem::path& path) {
  write_text_file(path, echo.run_record().dump(1) + "\n");
}

struct GenerateArgs {
  std::string profile = "acl";
  int train = 0;
  int val = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string assets;
  std::string asset_policy = "once";
  bool no_images = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int width = RenderSpec{}.width_px;
  int height = RenderSpec{}.height_px;
  bool degrade = false;
  bool no_antialias = false;
  std::string font_map;
};

struct NoiseArgs {
  std::string manifest;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct DownsampleArgs {
  std::string manifest;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct EvalArgs {
  std::string manifest;
  std::string pred;
  std::vector<double> iou{0.8};
  bool normalized = false;
  std::string out = "eval.json";
};

struct StatsArgs {
  std::string manifest;
  std::string out;
};

struct HeuristicsArgs {
  std::string manifest;
  std::string pred;
  std::vector<std::string> which{"page-order", "position"};
  bool normalized = false;
  std::string out;
};

struct AsPredictionsArgs {
  std::string manifest;
  std::string out;
  bool normalized = false;
};

CoordSpace space_of(bool normalized) { return normalized ? CoordSpace::kNormalized : CoordSpace::kPixel; }

int cmd_generate(const GenerateArgs& a, const Echo& echo, std::ostream& out, std::ostream& err) {
  auto profile = std::make_shared<const StyleProfile>(resolve_profile(a.profile));
  const UsagePolicy policy = a.asset_policy == "once" ? UsagePolicy::kOnce : UsagePolicy::kWithReplacement;
  AssetPool pool = a.assets.empty() ? AssetPool::procedural() : load_asset_dir(a.assets, default_class_map(), policy);

  GenerateOptions opt;
  opt.n_train = a.train;
  opt.n_val = a.val;
  opt.master_seed = a.seed;
  opt.profile_name = a.profile;
  opt.render.width_px = a.width;
  opt.render.height_px = a.height;
  opt.render.degrade = a.degrade;
  opt.render.antialias = !a.no_antialias;
  opt.out_dir = a.out;
  opt.write_images = !a.no_images;
  opt.jobs = a.jobs;
  if (!a.font_map.empty()) opt.font_map = a.font_map;
  opt.log = [&err](const std::string& s) { err << s << "\n"; };

  const std::filesystem::path dir = a.out;
  std::filesystem::create_directories(dir);
  CorpusResult res = generate_corpus(profile, pool, opt);
  save_manifest(res.train.manifest, dir / "train.json");
  save_manifest(res.val.manifest, dir / "val.json");
  if (!res.truncations.empty()) {
    std::sort(res.truncations.begin(), res.truncations.end());
    std::string log;
    for (const auto& t : res.truncations) log += t + "\n";
    write_text_file(dir / "truncations.log", log);
  }
  write_run(echo, dir / "run.json");

  std::size_t dropped = 0;
  for (const auto* split : {&res.train, &res.val}) {
    for (const auto& l : split->layouts) dropped += l.dropped.size();
  }
  out << "generated " << res.train.manifest.images.size() << " train and " << res.val.manifest.images.size()
      << " val pages (" << res.train.manifest.annotations.size() + res.val.manifest.annotations.size()
      << " annotations) in " << dir.string() << "\n";
  if (dropped) out << dropped << " elements found no free position and were dropped\n";
  if (!res.truncations.empty()) out << res.truncations.size() << " text blocks truncated to fit (truncations.log)\n";
  return kExitOk;
}

int cmd_noise(const NoiseArgs& a, const Echo& echo, std::ostream& out, std::ostream& err) {
  const DatasetManifest m = load_manifest(a.manifest);
  const DatasetManifest n =
      inject_label_noise(m, {a.rate, a.seed}, [&err](const std::string& w) { err << "warning: " << w << "\n"; });
  std::size_t changed = 0;
  for (std::size_t i = 0; i < m.annotations.size(); ++i) {
    changed += m.annotations[i].category_id != n.annotations[i].category_id ? 1 : 0;
  }
  save_manifest(n, a.out);
  write_run(echo, run_file_for(a.out));
  out << "relabelled " << changed << " of " << n.annotations.size() << " annotations\n";
  return kExitOk;
}

int cmd_downsample(const DownsampleArgs& a, const Echo& echo, std::ostream& out, std::ostream&) {
  const DatasetManifest m = load_manifest(a.manifest);
  const DatasetManifest d = downsample(m, a.fraction, a.seed);
  save_manifest(d, a.out);
  write_run(echo, run_file_for(a.out));
  out << "kept " << d.images.size() << " of " << m.images.size() << " pages\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, const Echo& echo, std::ostream& out, std::ostream&) {
  const DatasetManifest m = load_manifest(a.manifest);
  const PredictionSet p = load_predictions(a.pred, space_of(a.normalized));
  const auto reports = evaluate(p, m, a.iou);
  ordered_json j;
  j["manifest"] = a.manifest;
  j["predictions"] = a.pred;
  j["reports"] = ordered_json::array();
  for (const auto& r : reports) {
    out << format_report(r) << "\n";
    ordered_json rj = to_json(r);
    rj["errors"] = to_json(error_distribution(p, m, r.iou_threshold))["classes"];
    j["reports"].push_back(std::move(rj));
  }
  write_text_file(a.out, j.dump(1) + "\n");
  write_run(echo, run_file_for(a.out));
  return kExitOk;
}

int cmd_stats(const StatsArgs& a, const Echo& echo, std::ostream& out, std::ostream&) {
  const StatsTable t = corpus_stats(load_manifest(a.manifest));
  const std::filesystem::path dir = a.out;
  write_text_file(dir / "centroids.csv", instances_csv(t));
  write_text_file(dir / "counts.csv", counts_csv(t));
  write_run(echo, dir / "run.json");
  out << "wrote " << t.instances.size() << " instances to " << (dir / "centroids.csv").string() << "\n";
  return kExitOk;
}

int cmd_heuristics(const HeuristicsArgs& a, const Echo& echo, std::ostream& out, std::ostream& err) {
  std::set<Heuristic> which;
  for (const auto& w : a.which) which.insert(w == "page-order" ? Heuristic::kPageOrder : Heuristic::kPosition);
  const DatasetManifest m = load_manifest(a.manifest);
  const HeuristicResult r = apply_heuristics(load_predictions(a.pred, space_of(a.normalized)), m, which);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  write_text_file(a.out, dump_predictions(r.kept));
  std::string log;
  for (const auto& rm : r.removed) {
    ordered_json j;
    j["image_id"] = rm.detection.image_id;
    j["category_id"] = class_id(rm.detection.label);
    j["bbox"] = {rm.detection.box.x, rm.detection.box.y, rm.detection.box.w, rm.detection.box.h};
    j["score"] = rm.detection.score;
    j["reason"] = rm.reason;
    log += j.dump() + "\n";
  }
  const std::filesystem::path outp = a.out;
  write_text_file(outp.parent_path() / (outp.stem().string() + ".removed.jsonl"), log);
  write_run(echo, run_file_for(a.out));
  out << "removed " << r.removed.size() << " detections, kept " << r.kept.detections.size() << "\n";
  return kExitOk;
}

int cmd_as_predictions(const AsPredictionsArgs& a, const Echo& echo, std::ostream& out, std::ostream&) {
  const PredictionSet p = ground_truth_predictions(load_manifest(a.manifest), space_of(a.normalized));
  write_text_file(a.out, dump_predictions(p));
  write_run(echo, run_file_for(a.out));
  out << "wrote " << p.detections.size() << " detections\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic document-layout pages with ground truth, corpus tools and detection evaluation", "ddr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Compose, render and annotate train/val pages");
  Echo gen_echo(gen);
  gen_echo.option("profile", ga.profile, "Bundled profile name(s) joined by '+', or a profile file");
  gen_echo.option("train", ga.train, "Training pages")->check(CLI::NonNegativeNumber);
  gen_echo.option("val", ga.val, "Validation pages")->check(CLI::NonNegativeNumber);
  gen_echo.option("seed", ga.seed, "Master seed");
  gen_echo.path("out", ga.out, "Output directory")->required();
  gen_echo.path("assets", ga.assets, "Asset directory with figure/ table/ algorithm/ equation/ subdirectories");
  gen_echo.option("asset-policy", ga.asset_policy, "once or with-replacement")
      ->check(CLI::IsMember({"once", "with-replacement"}));
  gen_echo.flag("no-images", ga.no_images, "Write manifests only");
  gen_echo.option("jobs", ga.jobs, "Render threads")->check(CLI::PositiveNumber);
  gen_echo.option("width", ga.width, "Page width in pixels")->check(CLI::Range(200, 20000));
  gen_echo.option("height", ga.height, "Page height in pixels")->check(CLI::Range(200, 20000));
  gen_echo.flag("degrade", ga.degrade, "Imitate low-quality scans");
  gen_echo.flag("no-antialias", ga.no_antialias, "Binary text rasterization");
  gen_echo.path("font-map", ga.font_map, "Font map file (default: $DDR_FONT_MAP or the bundled map)");

  NoiseArgs na;
  auto* noise = app.add_subcommand("noise", "Swap labels uniformly among the eight non-body-text classes");
  Echo noise_echo(noise);
  noise_echo.path("manifest", na.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  noise_echo.option("rate", na.rate, "Per-annotation flip probability")->check(CLI::Range(0.0, 1.0));
  noise_echo.option("seed", na.seed, "Noise seed");
  noise_echo.path("out", na.out, "Output manifest")->required();

  DownsampleArgs da;
  auto* down = app.add_subcommand("downsample", "Keep a uniform random fraction of the pages");
  Echo down_echo(down);
  down_echo.path("manifest", da.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
  down_echo.option("fraction", da.fraction, "Fraction of pages to keep, in (0, 1]")->check(CLI::Range(0.0, 1.0));
  down_echo.option("seed", da.seed, "Sampling seed");
  down_echo.path("out", da.out, "Output manifest")->required();

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Precision, recall, F1, AP and mAP of predictions against a manifest");
  Echo eval_echo(ev);
  eval_echo.path("manifest", ea.manifest, "Ground-truth manifest")->required()->check(CLI::ExistingFile);
  eval_echo.path("pred", ea.pred, "Predictions (JSON lines)")->required()->check(CLI::ExistingFile);
  eval_echo.list("iou", ea.iou, "IoU threshold (repeatable)")->check(CLI::Range(0.0, 1.0));
  eval_echo.flag("normalized", ea.normalized, "Prediction boxes are page fractions");
  eval_echo.option("out", ea.out, "Report JSON");

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Per-class centroid, size and per-page count tables");
  Echo stats_echo(stats);
  stats_echo.path("manifest", sa.manifest, "Manifest")->required()->check(CLI::ExistingFile);
  stats_echo.path("out", sa.out, "Output directory")->required();

  HeuristicsArgs ha;
  auto* heur = app.add_subcommand("heuristics", "Remove structurally impossible detections");
  Echo heur_echo(heur);
  heur_echo.path("manifest", ha.manifest, "Manifest with page ordinals")->required()->check(CLI::ExistingFile);
  heur_echo.path("pred", ha.pred, "Predictions (JSON lines)")->required()->check(CLI::ExistingFile);
  heur_echo.list("which", ha.which, "page-order and/or position")->check(CLI::IsMember({"page-order", "position"}));
  heur_echo.flag("normalized", ha.normalized, "Prediction boxes are page fractions");
  heur_echo.path("out", ha.out, "Filtered predictions")->required();

  AsPredictionsArgs pa;
  auto* asp = app.add_subcommand("as-predictions", "Write a manifest's ground truth as predictions");
  Echo asp_echo(asp);
  asp_echo.path("manifest", pa.manifest, "Manifest")->required()->check(CLI::ExistingFile);
  asp_echo.path("out", pa.out, "Predictions (JSON lines)")->required();
  asp_echo.flag("normalized", pa.normalized, "Write page-fraction boxes");

  std::string run_path;
  auto* rerun = app.add_subcommand("rerun", "Repeat a run from its run.json");
  rerun->add_option("run", run_path, "run.json of a previous run")->required()->check(CLI::ExistingFile);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(ga, gen_echo, out, err);
    if (*noise) return cmd_noise(na, noise_echo, out, err);
    if (*down) return cmd_downsample(da, down_echo, out, err);
    if (*ev) return cmd_eval(ea, eval_echo, out, err);
    if (*stats) return cmd_stats(sa, stats_echo, out, err);
    if (*heur) return cmd_heuristics(ha, heur_echo, out, err);
    if (*asp) return cmd_as_predictions(pa, asp_echo, out, err);
    if (*rerun) {
      const auto j = nlohmann::json::parse(read_text_file(run_path));
      if (!j.contains("argv") || !j["argv"].is_array()) throw ParseError(run_path + ": no argv array");
      return run_cli(j["argv"].get<std::vector<std::string>>(), out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ddr
