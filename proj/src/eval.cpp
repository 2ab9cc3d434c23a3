#include "ddr/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "ddr/error.hpp"

namespace ddr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Key = std::pair<int, int>;  // (image id, category id)

double best_iou(const BBox& b, const std::vector<BBox>& gts) {
  double best = 0.0;
  for (const BBox& g : gts) best = std::max(best, iou(b, g));
  return best;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string opt_text(const std::optional<double>& v) { return v ? fixed(*v) : "-"; }

std::map<Key, std::vector<int>> group(const std::vector<Detection>& dets) {
  std::map<Key, std::vector<int>> out;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    out[{dets[i].image_id, class_id(dets[i].label)}].push_back(static_cast<int>(i));
  }
  return out;
}

std::map<Key, std::vector<BBox>> group(const std::vector<GroundTruthBox>& gts) {
  std::map<Key, std::vector<BBox>> out;
  for (const auto& g : gts) out[{g.image_id, class_id(g.label)}].push_back(g.box);
  return out;
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<int>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

void check_images(const PredictionSet& preds, const DatasetManifest& m) {
  std::set<int> ids;
  for (const auto& im : m.images) ids.insert(im.id);
  for (const Detection& d : preds.detections) {
    if (!ids.count(d.image_id)) throw ValidationError("prediction refers to unknown image_id " + std::to_string(d.image_id));
  }
}

}  // namespace

PredictionSet parse_predictions(std::string_view text, CoordSpace space) {
  PredictionSet out;
  out.space = space;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "predictions line " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    for (const char* key : {"image_id", "category_id", "bbox", "score"}) {
      if (!j.contains(key)) throw ParseError(where + ": missing '" + key + "'");
    }
    Detection d;
    try {
      d.image_id = j.at("image_id").get<int>();
      const int cat = j.at("category_id").get<int>();
      const auto label = class_from_id(cat);
      if (!label) throw ParseError(where + ": category_id " + std::to_string(cat) + " is not in 0..8");
      d.label = *label;
      const auto b = j.at("bbox").get<std::vector<double>>();
      if (b.size() != 4) throw ParseError(where + ": bbox needs 4 numbers");
      d.box = BBox{b[0], b[1], b[2], b[3]};
      d.score = j.at("score").get<double>();
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (d.box.w < 0 || d.box.h < 0) throw ParseError(where + ": bbox has negative extent");
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw ParseError(where + ": score must lie in [0, 1]");
    out.detections.push_back(d);
  }
  return out;
}

PredictionSet load_predictions(const std::filesystem::path& path, CoordSpace space) {
  return parse_predictions(read_text_file(path), space);
}

std::string dump_predictions(const PredictionSet& p) {
  std::string out;
  for (const Detection& d : p.detections) {
    ordered_json j;
    j["image_id"] = d.image_id;
    j["category_id"] = class_id(d.label);
    j["bbox"] = {d.box.x, d.box.y, d.box.w, d.box.h};
    j["score"] = d.score;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<GroundTruthBox> ground_truth_boxes(const DatasetManifest& m, CoordSpace space) {
  std::vector<GroundTruthBox> out;
  out.reserve(m.annotations.size());
  for (const Annotation& a : m.annotations) {
    const auto label = class_from_id(a.category_id);
    if (!label) throw ValidationError("annotation " + std::to_string(a.id) + ": unknown category_id");
    const BBox b = space == CoordSpace::kPixel ? BBox{static_cast<double>(a.bbox.x), static_cast<double>(a.bbox.y),
                                                      static_cast<double>(a.bbox.w), static_cast<double>(a.bbox.h)}
                                               : a.bbox_norm;
    out.push_back({a.image_id, *label, b});
  }
  return out;
}

PredictionSet ground_truth_predictions(const DatasetManifest& m, CoordSpace space) {
  PredictionSet p;
  p.space = space;
  for (const auto& g : ground_truth_boxes(m, space)) p.detections.push_back({g.image_id, g.label, g.box, 1.0});
  return p;
}

std::vector<int> match_order(const std::vector<Detection>& preds, const std::vector<BBox>& gts) {
  std::vector<double> best(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) best[i] = best_iou(preds[i].box, gts);
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = preds[static_cast<std::size_t>(a)];
    const auto& pb = preds[static_cast<std::size_t>(b)];
    if (pa.score != pb.score) return pa.score > pb.score;
    return best[static_cast<std::size_t>(a)] > best[static_cast<std::size_t>(b)];
  });
  return order;
}

MatchResult match_detections(const std::vector<Detection>& preds, const std::vector<BBox>& gts, double thr) {
  if (!(thr > 0.0 && thr <= 1.0)) throw ValidationError("iou threshold must lie in (0, 1]");
  MatchResult r;
  std::vector<bool> taken(gts.size(), false);
  for (int p : match_order(preds, gts)) {
    int best = -1;
    double best_v = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(preds[static_cast<std::size_t>(p)].box, gts[g]);
      if (v > best_v) {
        best_v = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_v >= thr) {
      taken[static_cast<std::size_t>(best)] = true;
      r.tp.emplace_back(p, best);
    } else {
      r.fp.push_back(p);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!taken[g]) r.fn.push_back(static_cast<int>(g));
  }
  return r;
}

std::optional<double> average_precision(const std::vector<Detection>& preds, const std::vector<GroundTruthBox>& gts,
                                        ClassLabel label, double thr) {
  std::map<int, std::vector<BBox>> gt_by_image;
  int n_gt = 0;
  for (const auto& g : gts) {
    if (g.label != label) continue;
    gt_by_image[g.image_id].push_back(g.box);
    ++n_gt;
  }
  if (n_gt == 0) return std::nullopt;

  std::map<int, std::vector<Detection>> pred_by_image;
  std::map<int, std::vector<int>> global_index;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].label != label) continue;
    pred_by_image[preds[i].image_id].push_back(preds[i]);
    global_index[preds[i].image_id].push_back(static_cast<int>(i));
  }

  struct Ranked {
    double score;
    double best;
    int index;
    bool tp;
  };
  std::vector<Ranked> ranked;
  for (const auto& [image, dets] : pred_by_image) {
    const std::vector<BBox>& g = gt_by_image[image];
    const MatchResult mr = match_detections(dets, g, thr);
    std::vector<bool> is_tp(dets.size(), false);
    for (const auto& [p, gi] : mr.tp) is_tp[static_cast<std::size_t>(p)] = true;
    for (std::size_t k = 0; k < dets.size(); ++k) {
      ranked.push_back({dets[k].score, best_iou(dets[k].box, g), global_index[image][k], is_tp[k]});
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.best != b.best) return a.best > b.best;
    return a.index < b.index;
  });

  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  int tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    tp += ranked[k].tp ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / n_gt;
  }
  // Monotone envelope, then sum precision over each recall step.
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

std::vector<EvalReport> evaluate(const PredictionSet& preds, const DatasetManifest& m,
                                 const std::vector<double>& thresholds) {
  check_images(preds, m);
  const std::vector<GroundTruthBox> gts = ground_truth_boxes(m, preds.space);
  const auto pred_groups = group(preds.detections);
  const auto gt_groups = group(gts);
  std::set<Key> keys;
  for (const auto& [k, v] : pred_groups) keys.insert(k);
  for (const auto& [k, v] : gt_groups) keys.insert(k);

  std::vector<EvalReport> reports;
  for (double thr : thresholds) {
    if (!(thr > 0.0 && thr <= 1.0)) throw ValidationError("iou threshold must lie in (0, 1]");
    EvalReport r;
    r.iou_threshold = thr;
    for (ClassLabel c : kAllClasses) r.classes[static_cast<std::size_t>(class_id(c))].label = c;
    for (const Key& k : keys) {
      ClassMetrics& cm = r.classes[static_cast<std::size_t>(k.second)];
      const auto pit = pred_groups.find(k);
      const auto git = gt_groups.find(k);
      const std::vector<Detection> p = pit == pred_groups.end() ? std::vector<Detection>{}
                                                                : pick(preds.detections, pit->second);
      const std::vector<BBox> g = git == gt_groups.end() ? std::vector<BBox>{} : git->second;
      const MatchResult mr = match_detections(p, g, thr);
      cm.n_pred += static_cast<int>(p.size());
      cm.n_gt += static_cast<int>(g.size());
      cm.tp += static_cast<int>(mr.tp.size());
      cm.fp += static_cast<int>(mr.fp.size());
      cm.fn += static_cast<int>(mr.fn.size());
    }
    double ap_sum = 0.0;
    for (ClassMetrics& cm : r.classes) {
      if (cm.tp + cm.fp > 0) cm.precision = static_cast<double>(cm.tp) / (cm.tp + cm.fp);
      if (cm.tp + cm.fn > 0) cm.recall = static_cast<double>(cm.tp) / (cm.tp + cm.fn);
      if (cm.precision && cm.recall) {
        const double s = *cm.precision + *cm.recall;
        cm.f1 = s > 0.0 ? 2.0 * *cm.precision * *cm.recall / s : 0.0;
      }
      cm.ap = average_precision(preds.detections, gts, cm.label, thr);
      if (cm.ap) {
        ap_sum += *cm.ap;
        r.map_classes.push_back(cm.label);
      }
    }
    r.map = r.map_classes.empty() ? 0.0 : ap_sum / static_cast<double>(r.map_classes.size());
    reports.push_back(r);
  }
  return reports;
}

ordered_json to_json(const EvalReport& r) {
  ordered_json j;
  j["iou_threshold"] = r.iou_threshold;
  j["mAP"] = r.map;
  j["mAP_classes"] = ordered_json::array();
  for (ClassLabel c : r.map_classes) j["mAP_classes"].push_back(class_name(c));
  j["classes"] = ordered_json::array();
  for (const ClassMetrics& cm : r.classes) {
    ordered_json c;
    c["category_id"] = class_id(cm.label);
    c["name"] = class_name(cm.label);
    c["gt"] = cm.n_gt;
    c["pred"] = cm.n_pred;
    c["tp"] = cm.tp;
    c["fp"] = cm.fp;
    c["fn"] = cm.fn;
    c["precision"] = opt_json(cm.precision);
    c["recall"] = opt_json(cm.recall);
    c["f1"] = opt_json(cm.f1);
    c["ap"] = opt_json(cm.ap);
    j["classes"].push_back(std::move(c));
  }
  return j;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  char line[160];
  os << "IoU " << fixed(r.iou_threshold, 2) << "\n";
  std::snprintf(line, sizeof line, "%-10s %6s %6s %6s %6s %6s %9s %9s %9s %9s\n", "class", "gt", "pred", "tp", "fp",
                "fn", "precision", "recall", "f1", "ap");
  os << line;
  for (const ClassMetrics& cm : r.classes) {
    std::snprintf(line, sizeof line, "%-10s %6d %6d %6d %6d %6d %9s %9s %9s %9s\n", std::string(class_name(cm.label)).c_str(),
                  cm.n_gt, cm.n_pred, cm.tp, cm.fp, cm.fn, opt_text(cm.precision).c_str(),
                  opt_text(cm.recall).c_str(), opt_text(cm.f1).c_str(), opt_text(cm.ap).c_str());
    os << line;
  }
  os << "mAP " << fixed(r.map) << " over " << r.map_classes.size() << " classes with ground truth\n";
  return os.str();
}

HeuristicResult apply_heuristics(const PredictionSet& preds, const DatasetManifest& m,
                                 const std::set<Heuristic>& which) {
  HeuristicResult out;
  out.kept.space = preds.space;
  std::map<int, const ImageRecord*> images;
  for (const auto& im : m.images) images[im.id] = &im;
  std::set<int> warned;
  for (const Detection& d : preds.detections) {
    const auto it = images.find(d.image_id);
    if (it == images.end()) throw ValidationError("prediction refers to unknown image_id " + std::to_string(d.image_id));
    const ImageRecord& im = *it->second;
    std::string reason;
    if (which.count(Heuristic::kPageOrder)) {
      const bool front_matter =
          d.label == ClassLabel::kAbstract || d.label == ClassLabel::kTitle || d.label == ClassLabel::kAuthor;
      if (im.page_ordinal.empty()) {
        if (warned.insert(im.id).second) {
          out.warnings.push_back("image " + std::to_string(im.id) + ": no page_ordinal, page-order heuristic skipped");
        }
      } else if (front_matter && im.page_ordinal != "first") {
        reason = "page-order: " + std::string(class_name(d.label)) + " on a " + im.page_ordinal + " page";
      }
    }
    if (reason.empty() && which.count(Heuristic::kPosition) && d.label == ClassLabel::kTitle) {
      const double top = preds.space == CoordSpace::kPixel ? d.box.y / im.height : d.box.y;
      if (top > kTitleZoneLimit) reason = "position: title top at " + fixed(top, 3) + " of the page";
    }
    if (reason.empty()) {
      out.kept.detections.push_back(d);
    } else {
      out.removed.push_back({d, reason});
    }
  }
  return out;
}

ErrorBreakdown error_distribution(const PredictionSet& preds, const DatasetManifest& m, double thr) {
  check_images(preds, m);
  ErrorBreakdown out;
  out.iou_threshold = thr;
  const std::vector<GroundTruthBox> gts = ground_truth_boxes(m, preds.space);
  std::map<int, std::vector<int>> gt_by_image;
  for (std::size_t i = 0; i < gts.size(); ++i) gt_by_image[gts[i].image_id].push_back(static_cast<int>(i));
  std::map<int, std::vector<int>> pred_by_image;
  for (std::size_t i = 0; i < preds.detections.size(); ++i) {
    pred_by_image[preds.detections[i].image_id].push_back(static_cast<int>(i));
  }
  const auto pred_groups = group(preds.detections);
  std::map<Key, std::vector<int>> gt_groups;
  for (std::size_t i = 0; i < gts.size(); ++i) gt_groups[{gts[i].image_id, class_id(gts[i].label)}].push_back(static_cast<int>(i));
  std::set<Key> keys;
  for (const auto& [k, v] : pred_groups) keys.insert(k);
  for (const auto& [k, v] : gt_groups) keys.insert(k);

  for (const Key& k : keys) {
    const auto pit = pred_groups.find(k);
    const auto git = gt_groups.find(k);
    const std::vector<int> pidx = pit == pred_groups.end() ? std::vector<int>{} : pit->second;
    const std::vector<int> gidx = git == gt_groups.end() ? std::vector<int>{} : git->second;
    const std::vector<Detection> p = pick(preds.detections, pidx);
    std::vector<BBox> g;
    for (int i : gidx) g.push_back(gts[static_cast<std::size_t>(i)].box);
    const MatchResult mr = match_detections(p, g, thr);
    ErrorCounts& ec = out.classes[static_cast<std::size_t>(k.second)];

    for (int fp : mr.fp) {
      const Detection& d = p[static_cast<std::size_t>(fp)];
      bool other = false;
      bool same = false;
      for (int gi : gt_by_image[k.first]) {
        const GroundTruthBox& gt = gts[static_cast<std::size_t>(gi)];
        const double v = iou(d.box, gt.box);
        if (gt.label != d.label && v >= thr) other = true;
        if (gt.label == d.label && v > 0.0) same = true;
      }
      if (other) {
        ++ec.fp_misclassified;
      } else if (same) {
        ++ec.fp_misplaced;
      } else {
        ++ec.fp_hallucinated;
      }
    }
    for (int fn : mr.fn) {
      const BBox& b = g[static_cast<std::size_t>(fn)];
      bool absorbed = false;
      for (int pi : pred_by_image[k.first]) {
        const Detection& d = preds.detections[static_cast<std::size_t>(pi)];
        if (class_id(d.label) != k.second && iou(d.box, b) >= thr) absorbed = true;
      }
      if (absorbed) {
        ++ec.fn_absorbed;
      } else {
        ++ec.fn_missed;
      }
    }
  }
  return out;
}

ordered_json to_json(const ErrorBreakdown& b) {
  ordered_json j;
  j["iou_threshold"] = b.iou_threshold;
  j["classes"] = ordered_json::array();
  for (ClassLabel c : kAllClasses) {
    const ErrorCounts& e = b.classes[static_cast<std::size_t>(class_id(c))];
    ordered_json r;
    r["name"] = class_name(c);
    r["fp_misplaced"] = e.fp_misplaced;
    r["fp_misclassified"] = e.fp_misclassified;
    r["fp_hallucinated"] = e.fp_hallucinated;
    r["fn_missed"] = e.fn_missed;
    r["fn_absorbed"] = e.fn_absorbed;
    j["classes"].push_back(std::move(r));
  }
  return j;
}

}  // namespace ddr
