#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddr/class_label.hpp"
#include "ddr/geometry.hpp"
#include "ddr/manifest.hpp"

namespace ddr {

struct Detection {
  int image_id = 0;
  ClassLabel label = ClassLabel::kBodyText;
  BBox box;
  double score = 1.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

enum class CoordSpace { kPixel, kNormalized };

struct PredictionSet {
  CoordSpace space = CoordSpace::kPixel;
  std::vector<Detection> detections;

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

// One JSON object per line: {"image_id", "category_id", "bbox": [x, y, w, h], "score"}.
// Blank lines are skipped. Throws ParseError with the line number.
PredictionSet parse_predictions(std::string_view text, CoordSpace space = CoordSpace::kPixel);
PredictionSet load_predictions(const std::filesystem::path& path, CoordSpace space = CoordSpace::kPixel);
std::string dump_predictions(const PredictionSet& p);

// Ground truth of a manifest as detections with score 1.
PredictionSet ground_truth_predictions(const DatasetManifest& m, CoordSpace space = CoordSpace::kPixel);

struct MatchResult {
  std::vector<std::pair<int, int>> tp;  // (prediction index, ground-truth index)
  std::vector<int> fp;
  std::vector<int> fn;
};

// Greedy matching for one image and class. Predictions are visited by
// descending score (ties: higher best IoU, then input order); each takes the
// unmatched ground truth of highest IoU (ties: lower index) if that IoU
// reaches the threshold.
MatchResult match_detections(const std::vector<Detection>& preds, const std::vector<BBox>& gts, double iou_threshold);

// Visiting order used by match_detections.
std::vector<int> match_order(const std::vector<Detection>& preds, const std::vector<BBox>& gts);

struct GroundTruthBox {
  int image_id = 0;
  ClassLabel label = ClassLabel::kBodyText;
  BBox box;
};

std::vector<GroundTruthBox> ground_truth_boxes(const DatasetManifest& m, CoordSpace space);

// Area under the all-points interpolated precision-recall curve for one
// class. nullopt when the class has no ground truth.
std::optional<double> average_precision(const std::vector<Detection>& preds, const std::vector<GroundTruthBox>& gts,
                                        ClassLabel label, double iou_threshold);

struct ClassMetrics {
  ClassLabel label = ClassLabel::kBodyText;
  int n_gt = 0;
  int n_pred = 0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::optional<double> precision;  // undefined without predictions
  std::optional<double> recall;     // undefined without ground truth
  std::optional<double> f1;
  std::optional<double> ap;
};

struct EvalReport {
  double iou_threshold = 0.0;
  std::array<ClassMetrics, kNumClasses> classes;
  double map = 0.0;
  std::vector<ClassLabel> map_classes;  // classes with ground truth
};

// Throws ValidationError on a prediction whose image id is not in the manifest.
std::vector<EvalReport> evaluate(const PredictionSet& preds, const DatasetManifest& m,
                                 const std::vector<double>& thresholds);

nlohmann::ordered_json to_json(const EvalReport& r);
std::string format_report(const EvalReport& r);

enum class Heuristic { kPageOrder, kPosition };

// Title detections whose top edge lies below this fraction of the page are removed.
inline constexpr double kTitleZoneLimit = 0.30;

struct Removal {
  Detection detection;
  std::string reason;
};

struct HeuristicResult {
  PredictionSet kept;
  std::vector<Removal> removed;
  std::vector<std::string> warnings;
};

HeuristicResult apply_heuristics(const PredictionSet& preds, const DatasetManifest& m,
                                 const std::set<Heuristic>& which);

struct ErrorCounts {
  int fp_misplaced = 0;
  int fp_misclassified = 0;
  int fp_hallucinated = 0;
  int fn_missed = 0;
  int fn_absorbed = 0;

  friend bool operator==(const ErrorCounts&, const ErrorCounts&) = default;
};

struct ErrorBreakdown {
  double iou_threshold = 0.0;
  std::array<ErrorCounts, kNumClasses> classes;
};

ErrorBreakdown error_distribution(const PredictionSet& preds, const DatasetManifest& m, double iou_threshold);
nlohmann::ordered_json to_json(const ErrorBreakdown& b);

}  // namespace ddr
