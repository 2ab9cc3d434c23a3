#include <doctest.h>

#include <string>

#include "ddr/error.hpp"
#include "ddr/eval.hpp"

using namespace ddr;

namespace {

const std::string kFixture = std::string(DDR_GOLDEN_DIR) + "/eval-fixture/";

const ClassMetrics& cls(const EvalReport& r, ClassLabel c) { return r.classes[static_cast<std::size_t>(class_id(c))]; }

}  // namespace

TEST_CASE("iou") {
  CHECK(iou({0, 0, 2, 2}, {1, 1, 2, 2}) == doctest::Approx(1.0 / 7.0));
  CHECK(iou({0, 0, 1, 1}, {1, 0, 1, 1}) == 0.0);
  CHECK(iou({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
  CHECK(iou({0, 0, 0, 0}, {0, 0, 0, 0}) == 1.0);
  CHECK(iou({0, 0, 4, 1}, {0, 0, 2, 1}) == 0.5);
}

TEST_CASE("prediction lines parse and round trip") {
  const std::string text =
      "{\"image_id\": 3, \"category_id\": 6, \"bbox\": [1, 2, 3, 4], \"score\": 0.5}\n"
      "\n"
      "{\"image_id\": 4, \"category_id\": 0, \"bbox\": [0.1, 0.2, 0.3, 0.4], \"score\": 1}\n";
  const PredictionSet p = parse_predictions(text);
  REQUIRE(p.detections.size() == 2);
  CHECK(p.detections[0] == Detection{3, ClassLabel::kFigure, {1, 2, 3, 4}, 0.5});
  CHECK(p.detections[1].label == ClassLabel::kAbstract);
  CHECK(parse_predictions(dump_predictions(p)) == p);
}

TEST_CASE("bad prediction lines report their line number") {
  auto fails = [](const std::string& text, const std::string& needle) {
    try {
      parse_predictions(text);
    } catch (const ParseError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  const std::string ok = "{\"image_id\": 1, \"category_id\": 1, \"bbox\": [0, 0, 1, 1], \"score\": 0.5}\n";
  CHECK(fails(ok + "{not json}\n", "line 2"));
  CHECK(fails(ok + ok + "{\"image_id\": 1, \"category_id\": 9, \"bbox\": [0, 0, 1, 1], \"score\": 0.5}\n", "line 3"));
  CHECK(fails("{\"image_id\": 1, \"category_id\": 1, \"bbox\": [0, 0, 1], \"score\": 0.5}", "bbox"));
  CHECK(fails("{\"image_id\": 1, \"category_id\": 1, \"bbox\": [0, 0, -1, 1], \"score\": 0.5}", "negative"));
  CHECK(fails("{\"image_id\": 1, \"category_id\": 1, \"bbox\": [0, 0, 1, 1], \"score\": 1.5}", "score"));
  CHECK(fails("{\"image_id\": 1, \"category_id\": 1, \"bbox\": [0, 0, 1, 1]}", "score"));
  CHECK(fails("[1]", "object"));
}

TEST_CASE("matcher tie rules") {
  const std::vector<BBox> gts = {{0, 0, 10, 10}, {0, 0, 10, 10}};
  // Identical ground truths: the lower index is taken first.
  std::vector<Detection> preds = {{1, ClassLabel::kTable, {0, 0, 10, 10}, 0.5},
                                  {1, ClassLabel::kTable, {0, 0, 10, 10}, 0.5}};
  MatchResult r = match_detections(preds, gts, 0.5);
  CHECK(r.tp == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  CHECK(r.fp.empty());
  CHECK(r.fn.empty());

  // Equal scores: the better-overlapping prediction goes first.
  preds = {{1, ClassLabel::kTable, {0, 0, 10, 8}, 0.5}, {1, ClassLabel::kTable, {0, 0, 10, 10}, 0.5}};
  CHECK(match_order(preds, {gts[0]}) == std::vector<int>{1, 0});
  r = match_detections(preds, {gts[0]}, 0.5);
  CHECK(r.tp == std::vector<std::pair<int, int>>{{1, 0}});
  CHECK(r.fp == std::vector<int>{0});

  // Higher score wins even with the worse box.
  preds[0].score = 0.9;
  r = match_detections(preds, {gts[0]}, 0.5);
  CHECK(r.tp == std::vector<std::pair<int, int>>{{0, 0}});

  CHECK_THROWS_AS(match_detections(preds, gts, 0.0), ValidationError);
  CHECK_THROWS_AS(match_detections(preds, gts, 1.01), ValidationError);
  CHECK(match_detections({}, gts, 0.5).fn == std::vector<int>{0, 1});
}

TEST_CASE("average precision fixtures") {
  const std::vector<GroundTruthBox> g = {{1, ClassLabel::kFigure, {0, 0, 1, 1}}, {2, ClassLabel::kFigure, {0, 0, 1, 1}}};
  // Ranks: hit, miss, hit -> (1 + 2/3) / 2.
  std::vector<Detection> p = {{1, ClassLabel::kFigure, {0, 0, 1, 1}, 0.9},
                              {1, ClassLabel::kFigure, {5, 5, 1, 1}, 0.8},
                              {2, ClassLabel::kFigure, {0, 0, 1, 1}, 0.7}};
  CHECK(*average_precision(p, g, ClassLabel::kFigure, 0.5) == doctest::Approx(5.0 / 6.0));
  // Miss first: the envelope lifts the first hit to the later 2/3.
  p[1].score = 0.95;
  CHECK(*average_precision(p, g, ClassLabel::kFigure, 0.5) == doctest::Approx(2.0 / 3.0));
  CHECK(*average_precision({}, g, ClassLabel::kFigure, 0.5) == 0.0);
  CHECK_FALSE(average_precision(p, g, ClassLabel::kTable, 0.5).has_value());
}

TEST_CASE("golden three-page fixture") {
  const DatasetManifest m = load_manifest(kFixture + "manifest.json");
  const PredictionSet p = load_predictions(kFixture + "predictions.jsonl");
  const auto reports = evaluate(p, m, {0.8, 0.5});
  REQUIRE(reports.size() == 2);

  const EvalReport& r8 = reports[0];
  const ClassMetrics& fig = cls(r8, ClassLabel::kFigure);
  CHECK(fig.tp == 2);
  CHECK(fig.fp == 2);
  CHECK(fig.fn == 0);
  CHECK(*fig.precision == 0.5);
  CHECK(*fig.recall == 1.0);
  CHECK(*fig.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(*fig.ap == 1.0);
  CHECK(*cls(r8, ClassLabel::kTitle).ap == 1.0);
  const ClassMetrics& tab = cls(r8, ClassLabel::kTable);
  CHECK(tab.tp == 0);
  CHECK(tab.fn == 2);
  CHECK(*tab.precision == 0.0);
  CHECK(*tab.f1 == 0.0);
  CHECK(*tab.ap == 0.0);
  const ClassMetrics& body = cls(r8, ClassLabel::kBodyText);
  CHECK_FALSE(body.precision.has_value());
  CHECK(*body.recall == 0.0);
  CHECK_FALSE(body.f1.has_value());
  CHECK_FALSE(cls(r8, ClassLabel::kEquation).ap.has_value());
  CHECK(r8.map_classes.size() == 4);
  CHECK(r8.map == doctest::Approx(0.5));

  const EvalReport& r5 = reports[1];
  CHECK(cls(r5, ClassLabel::kTable).tp == 1);
  CHECK(*cls(r5, ClassLabel::kTable).ap == doctest::Approx(0.5));
  CHECK(r5.map == doctest::Approx(0.625));

  const ErrorBreakdown e = error_distribution(p, m, 0.8);
  const ErrorCounts& ef = e.classes[static_cast<std::size_t>(class_id(ClassLabel::kFigure))];
  CHECK(ef == ErrorCounts{0, 1, 1, 0, 0});
  const ErrorCounts& et = e.classes[static_cast<std::size_t>(class_id(ClassLabel::kTable))];
  CHECK(et == ErrorCounts{1, 0, 0, 1, 1});
  const ErrorCounts& eb = e.classes[static_cast<std::size_t>(class_id(ClassLabel::kBodyText))];
  CHECK(eb == ErrorCounts{0, 0, 0, 1, 0});
}

TEST_CASE("pixel and normalized spaces agree on the fixture") {
  const DatasetManifest m = load_manifest(kFixture + "manifest.json");
  PredictionSet p = load_predictions(kFixture + "predictions.jsonl");
  PredictionSet n = p;
  n.space = CoordSpace::kNormalized;
  for (Detection& d : n.detections) d.box = BBox{d.box.x / 1000, d.box.y / 1000, d.box.w / 1000, d.box.h / 1000};
  for (double thr : {0.5, 0.8}) {
    const EvalReport a = evaluate(p, m, {thr})[0];
    const EvalReport b = evaluate(n, m, {thr})[0];
    CHECK(a.map == doctest::Approx(b.map));
    for (ClassLabel c : kAllClasses) CHECK(cls(a, c).tp == cls(b, c).tp);
  }
}

TEST_CASE("unknown image ids are rejected") {
  const DatasetManifest m = load_manifest(kFixture + "manifest.json");
  PredictionSet p;
  p.detections.push_back({42, ClassLabel::kFigure, {0, 0, 1, 1}, 0.5});
  CHECK_THROWS_AS(evaluate(p, m, {0.5}), ValidationError);
}

TEST_CASE("ground truth as predictions is perfect") {
  const DatasetManifest m = load_manifest(kFixture + "manifest.json");
  for (CoordSpace s : {CoordSpace::kPixel, CoordSpace::kNormalized}) {
    const EvalReport r = evaluate(ground_truth_predictions(m, s), m, {0.9})[0];
    CHECK(r.map == 1.0);
  }
}

TEST_CASE("heuristics") {
  const DatasetManifest m = load_manifest(kFixture + "manifest.json");
  PredictionSet p;
  p.detections = {{1, ClassLabel::kTitle, {100, 50, 800, 50}, 0.9},   // kept
                  {1, ClassLabel::kTitle, {100, 301, 800, 50}, 0.8},  // below the title zone
                  {1, ClassLabel::kTitle, {100, 300, 800, 50}, 0.8},  // exactly on the limit
                  {2, ClassLabel::kAuthor, {100, 50, 800, 50}, 0.7},  // not a first page
                  {2, ClassLabel::kFigure, {100, 50, 800, 50}, 0.7}};
  const HeuristicResult both = apply_heuristics(p, m, {Heuristic::kPageOrder, Heuristic::kPosition});
  CHECK(both.kept.detections.size() == 3);
  REQUIRE(both.removed.size() == 2);
  CHECK(both.removed[0].reason.rfind("position", 0) == 0);
  CHECK(both.removed[1].reason.rfind("page-order", 0) == 0);
  CHECK(apply_heuristics(p, m, {Heuristic::kPosition}).removed.size() == 1);
  CHECK(apply_heuristics(p, m, {Heuristic::kPageOrder}).removed.size() == 1);
  CHECK(apply_heuristics(p, m, {}).kept == p);

  DatasetManifest no_order = m;
  for (auto& im : no_order.images) im.page_ordinal.clear();
  const HeuristicResult w = apply_heuristics(p, no_order, {Heuristic::kPageOrder});
  CHECK(w.removed.empty());
  CHECK(w.warnings.size() == 2);
}

TEST_CASE("report formats") {
  const DatasetManifest m = load_manifest(kFixture + "manifest.json");
  const EvalReport r = evaluate(load_predictions(kFixture + "predictions.jsonl"), m, {0.8})[0];
  const auto j = to_json(r);
  CHECK(j["mAP"].get<double>() == doctest::Approx(0.5));
  CHECK(j["classes"].size() == 9);
  CHECK(j["classes"][3]["precision"].is_null());
  CHECK(format_report(r).find("figure") != std::string::npos);
}
