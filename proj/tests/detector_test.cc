#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "promptcd/detector.h"
#include "promptcd/errors.h"
#include "promptcd/mock_segmenter.h"
#include "promptcd/report_json.h"
#include "test_util.h"

namespace promptcd {
namespace {

constexpr double kNoGate = -std::numeric_limits<double>::infinity();

// n square objects of side 6 in a row; labels are 1..n left to right.
struct RowScene {
  BinaryMask mask;
  GroundTruthSemanticMap truth;
  RgbImage image;
};

RowScene row_scene(int n, const std::set<int>& removed) {
  RowScene s{BinaryMask(10 * n + 2, 10, 0),
             {Grid<std::uint8_t>(10 * n + 2, 10, 0), 1},
             RgbImage(10 * n + 2, 10)};
  for (int i = 0; i < n; ++i) {
    for (int y = 2; y < 8; ++y) {
      for (int x = 2 + 10 * i; x < 8 + 10 * i; ++x) {
        s.mask.at(x, y) = 1;
        if (!removed.count(i + 1)) s.truth.class_ids.at(x, y) = 1;
      }
    }
  }
  return s;
}

// Independent scorer: fraction of prompts on class 1.
double oracle_confidence(const GroundTruthSemanticMap& truth,
                         const std::vector<PointPrompt>& prompts) {
  int hits = 0;
  for (const auto& p : prompts) hits += truth.class_ids.at(p.point) == 1;
  return static_cast<double>(hits) / prompts.size();
}

ConfidenceTable table_of(double reference, std::vector<double> exclusions) {
  ConfidenceTable t;
  t.reference_confidence = reference;
  t.rows.push_back({0, reference, true});
  for (std::size_t i = 0; i < exclusions.size(); ++i) {
    t.rows.push_back({static_cast<int>(i) + 1, exclusions[i], true});
  }
  return t;
}

TEST(BuildTrials, ThreeObjects) {
  const RowScene s = row_scene(3, {});
  const LabeledMask labeled = connected_components(s.mask, Connectivity::kEight);
  const std::vector<int> active{1, 2, 3};
  const auto trials = build_trials(labeled, active, 2, 5);
  ASSERT_EQ(trials.size(), 4u);
  EXPECT_EQ(trials[0].excluded_label, 0);
  EXPECT_EQ(trials[0].prompts.size(), 6u);
  EXPECT_EQ(trials[2].excluded_label, 2);
  EXPECT_EQ(trials[2].prompts.size(), 4u);
  for (const auto& p : trials[2].prompts) {
    EXPECT_NE(labeled.labels.at(p.point), 2);
    EXPECT_NE(labeled.labels.at(p.point), 0);
  }
  // Same per-object points in every trial.
  for (const auto& t : trials) {
    for (const auto& p : t.prompts) {
      EXPECT_NE(std::find(trials[0].prompts.begin(), trials[0].prompts.end(),
                          p),
                trials[0].prompts.end());
    }
  }
}

TEST(BuildTrials, SingleObjectHasEmptyExclusion) {
  const RowScene s = row_scene(1, {});
  const LabeledMask labeled = connected_components(s.mask, Connectivity::kEight);
  const std::vector<int> active{1};
  const auto trials = build_trials(labeled, active, 3, 0);
  ASSERT_EQ(trials.size(), 2u);
  EXPECT_EQ(trials[0].prompts.size(), 3u);
  EXPECT_FALSE(trials[1].scorable());
}

TEST(BuildTrials, Errors) {
  const LabeledMask labeled = connected_components(row_scene(2, {}).mask, Connectivity::kEight);
  EXPECT_THROW(build_trials(labeled, {}, 1, 0), InputError);
  const std::vector<int> dup{1, 1};
  EXPECT_THROW(build_trials(labeled, dup, 1, 0), InputError);
  const std::vector<int> one{1};
  EXPECT_THROW(build_trials(labeled, one, 0, 0), InputError);
}

TEST(ScoreTrials, FourObjectsThirdRemoved) {
  const RowScene s = row_scene(4, {3});
  const LabeledMask labeled = connected_components(s.mask, Connectivity::kEight);
  MockSegmenter mock(s.truth);
  const auto emb = mock.embed_image(s.image);
  const std::vector<int> active{1, 2, 3, 4};
  auto trials = build_trials(labeled, active, 3, 11);
  const ConfidenceTable t = score_trials(trials, emb, mock);
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_DOUBLE_EQ(t.reference_confidence, 0.75);
  EXPECT_DOUBLE_EQ(t.rows[1].confidence, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.rows[2].confidence, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.rows[3].confidence, 1.0);
  EXPECT_DOUBLE_EQ(t.rows[4].confidence, 2.0 / 3.0);
  for (const auto& trial : trials) {
    const auto& row = t.rows[trial.excluded_label];
    EXPECT_DOUBLE_EQ(row.confidence, oracle_confidence(s.truth, trial.prompts));
  }
}

TEST(ScoreTrials, AllIntactGivesFullConfidence) {
  const RowScene s = row_scene(5, {});
  MockSegmenter mock(s.truth);
  const std::vector<int> active{1, 2, 3, 4, 5};
  auto trials = build_trials(connected_components(s.mask, Connectivity::kEight), active, 2, 1);
  const auto t = score_trials(trials, mock.embed_image(s.image), mock);
  for (const auto& row : t.rows) EXPECT_DOUBLE_EQ(row.confidence, 1.0);
}

TEST(ScoreTrials, OrderAndJobsDoNotMatter) {
  const RowScene s = row_scene(6, {2, 5});
  MockSegmenter mock(s.truth, {0.1, 4});
  const auto emb = mock.embed_image(s.image);
  const std::vector<int> active{1, 2, 3, 4, 5, 6};
  auto trials = build_trials(connected_components(s.mask, Connectivity::kEight), active, 3, 2);
  const auto base = score_trials(trials, emb, mock, 1);
  std::mt19937 gen(9);
  for (int round = 0; round < 5; ++round) {
    auto shuffled = trials;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const auto t = score_trials(shuffled, emb, mock, 1 + round);
    ASSERT_EQ(t.rows.size(), base.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_EQ(t.rows[i].excluded_label, base.rows[i].excluded_label);
      EXPECT_EQ(t.rows[i].confidence, base.rows[i].confidence);
    }
  }
}

TEST(ScoreTrials, UnscorableGetsReference) {
  const RowScene s = row_scene(1, {1});
  MockSegmenter mock(s.truth);
  const std::vector<int> active{1};
  auto trials = build_trials(connected_components(s.mask, Connectivity::kEight), active, 3, 0);
  const auto t = score_trials(trials, mock.embed_image(s.image), mock);
  EXPECT_DOUBLE_EQ(t.reference_confidence, 0.0);
  EXPECT_FALSE(t.rows[1].scorable);
  EXPECT_DOUBLE_EQ(t.rows[1].confidence, 0.0);
}

TEST(IdentifyChanged, Examples) {
  auto d = identify_changed(table_of(0.75, {2.0 / 3, 2.0 / 3, 1.0, 2.0 / 3}),
                            0.1);
  ASSERT_TRUE(d.label);
  EXPECT_EQ(*d.label, 3);
  EXPECT_DOUBLE_EQ(d.margin, 1.0 / 3);

  // Ties go to the lowest label, with zero margin.
  d = identify_changed(table_of(0.5, {0.9, 0.9, 0.2}), kNoGate);
  EXPECT_EQ(*d.label, 1);
  EXPECT_DOUBLE_EQ(d.margin, 0.0);

  // Gate: best must beat the reference by min_margin.
  EXPECT_FALSE(identify_changed(table_of(1.0, {1.0, 1.0}), 0.1).label);
  EXPECT_FALSE(identify_changed(table_of(0.85, {0.9, 0.8}), 0.1).label);
  EXPECT_TRUE(identify_changed(table_of(0.85, {0.9, 0.8}), kNoGate).label);
  EXPECT_TRUE(identify_changed(table_of(0.75, {0.875, 0.5}), 0.125).label);

  // Reference only.
  EXPECT_FALSE(identify_changed(table_of(0.5, {}), kNoGate).label);
}

TEST(IdentifyChanged, SingleObjectFallback) {
  ConfidenceTable t = table_of(0.0, {0.0});
  t.rows[1].scorable = false;
  auto d = identify_changed(t, 0.1);
  ASSERT_TRUE(d.label);
  EXPECT_DOUBLE_EQ(d.margin, 1.0);
  t.reference_confidence = t.rows[0].confidence = t.rows[1].confidence = 0.95;
  EXPECT_FALSE(identify_changed(t, 0.1).label);
}

TEST(IdentifyChanged, ArgmaxInvariantUnderPositiveAffineMaps) {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> ex(2 + round % 9);
    for (double& v : ex) v = u(gen);
    const double ref = u(gen);
    const double a = 0.1 + 3.0 * u(gen);
    const double b = u(gen) - 0.5;
    std::vector<double> mapped;
    for (double v : ex) mapped.push_back(a * v + b);
    const auto d1 = identify_changed(table_of(ref, ex), kNoGate);
    const auto d2 = identify_changed(table_of(a * ref + b, mapped), kNoGate);
    ASSERT_TRUE(d1.label && d2.label);
    EXPECT_EQ(*d1.label, *d2.label);
    EXPECT_NEAR(d2.margin, a * d1.margin, 1e-9);
  }
}

DetectorConfig mock_config(std::optional<int> m) {
  DetectorConfig c;
  c.min_area = 1;
  c.expected_changes = m;
  return c;
}

TEST(DetectChanges, SingleRemoval) {
  const RowScene s = row_scene(5, {4});
  MockSegmenter mock(s.truth);
  const auto r = detect_changes(s.mask, s.image, mock, mock_config(1));
  EXPECT_EQ(r.changed_labels, std::vector<int>{4});
  ASSERT_EQ(r.margins.size(), 1u);
  EXPECT_DOUBLE_EQ(r.margins[0], 1.0 - 3.0 / 4.0);
  EXPECT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.num_objects, 5);
  const auto map = render_change_map(r, connected_components(s.mask, Connectivity::kEight));
  EXPECT_EQ(count_foreground(map), 36);
  EXPECT_TRUE(map.at(32, 2));
}

TEST(DetectChanges, TwoRemovals) {
  const RowScene s = row_scene(6, {2, 5});
  MockSegmenter mock(s.truth);
  const auto r = detect_changes(s.mask, s.image, mock, mock_config(2));
  EXPECT_EQ(r.changed_labels, (std::vector<int>{2, 5}));
  EXPECT_EQ(r.tables.size(), 2u);
  // First round ties between 2 and 5.
  EXPECT_DOUBLE_EQ(r.margins[0], 0.0);
  EXPECT_DOUBLE_EQ(r.margins[1], 1.0 - 3.0 / 4.0);  // five objects left

  // Asking for three forces a false positive with zero margin.
  const auto r3 = detect_changes(s.mask, s.image, mock, mock_config(3));
  ASSERT_EQ(r3.changed_labels.size(), 3u);
  EXPECT_EQ(r3.changed_labels[2], 1);
  EXPECT_DOUBLE_EQ(r3.margins[2], 0.0);
}

TEST(DetectChanges, ZeroChangesEmitsOneTable) {
  const RowScene s = row_scene(3, {2});
  MockSegmenter mock(s.truth);
  const auto r = detect_changes(s.mask, s.image, mock, mock_config(0));
  EXPECT_TRUE(r.changed_labels.empty());
  EXPECT_EQ(r.tables.size(), 1u);
}

TEST(DetectChanges, AutoMode) {
  const RowScene none = row_scene(4, {});
  MockSegmenter intact(none.truth);
  auto r = detect_changes(none.mask, none.image, intact, mock_config({}));
  EXPECT_TRUE(r.changed_labels.empty());
  EXPECT_EQ(r.tables.size(), 1u);

  const RowScene two = row_scene(5, {1, 3});
  MockSegmenter mock(two.truth);
  r = detect_changes(two.mask, two.image, mock, mock_config({}));
  EXPECT_EQ(r.changed_labels, (std::vector<int>{1, 3}));
  EXPECT_EQ(r.tables.size(), 3u);
}

TEST(DetectChanges, SingleObject) {
  const RowScene gone = row_scene(1, {1});
  MockSegmenter mock(gone.truth);
  auto r = detect_changes(gone.mask, gone.image, mock, mock_config(1));
  EXPECT_EQ(r.changed_labels, std::vector<int>{1});
  EXPECT_DOUBLE_EQ(r.margins[0], 1.0);

  const RowScene kept = row_scene(1, {});
  MockSegmenter intact(kept.truth);
  r = detect_changes(kept.mask, kept.image, intact, mock_config({}));
  EXPECT_TRUE(r.changed_labels.empty());
}

TEST(DetectChanges, EmptyMaskAndSmallObjects) {
  RowScene s = row_scene(2, {});
  MockSegmenter mock(s.truth);
  auto r = detect_changes(BinaryMask(22, 10, 0), s.image, mock, mock_config(1));
  EXPECT_TRUE(r.changed_labels.empty());
  EXPECT_TRUE(r.tables.empty());
  EXPECT_EQ(r.warnings.size(), 1u);

  DetectorConfig c = mock_config(1);
  c.min_area = 37;  // objects have 36 pixels
  r = detect_changes(s.mask, s.image, mock, c);
  EXPECT_EQ(r.ignored_labels, (std::vector<int>{1, 2}));
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(DetectChanges, RunsOutOfObjects) {
  const RowScene s = row_scene(2, {1});
  MockSegmenter mock(s.truth);
  const auto r = detect_changes(s.mask, s.image, mock, mock_config(5));
  EXPECT_EQ(r.changed_labels.size(), 2u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(DetectChanges, Errors) {
  const RowScene s = row_scene(2, {1});
  MockSegmenter mock(s.truth);
  EXPECT_THROW(detect_changes(BinaryMask(5, 5, 1), s.image, mock,
                              mock_config(1)),
               InputError);
  DetectorConfig c = mock_config(1);
  c.points_per_object = 0;
  EXPECT_THROW(detect_changes(s.mask, s.image, mock, c), InputError);
  c = mock_config(-1);
  EXPECT_THROW(detect_changes(s.mask, s.image, mock, c), InputError);
  c = mock_config(1);
  c.aggregation = "mean";
  EXPECT_THROW(detect_changes(s.mask, s.image, mock, c), InputError);
}

TEST(DetectChanges, DeterministicAndJobsIndependent) {
  const RowScene s = row_scene(8, {3, 6});
  MockSegmenter mock(s.truth, {0.2, 21});
  DetectorConfig c = mock_config(3);
  c.seed = 99;
  const std::string a =
      format_json(report_to_json(detect_changes(s.mask, s.image, mock, c)));
  EXPECT_EQ(a, format_json(report_to_json(
                   detect_changes(s.mask, s.image, mock, c))));
  c.jobs = 4;
  EXPECT_EQ(a, format_json(report_to_json(
                   detect_changes(s.mask, s.image, mock, c))));
}

TEST(ReportJson, Schema) {
  const RowScene s = row_scene(3, {2});
  MockSegmenter mock(s.truth);
  const auto r = detect_changes(s.mask, s.image, mock, mock_config(1));
  const auto j = report_to_json(r, {{"backend", "mock"}});
  EXPECT_EQ(j["changed"], nlohmann::ordered_json::array({2}));
  EXPECT_EQ(j["iterations"].size(), 4u);
  EXPECT_EQ(j["iterations"][0]["excluded"], 0);
  EXPECT_EQ(j["config"]["backend"], "mock");
  EXPECT_EQ(j["config"]["mode"], "fixed");
  const std::string text = format_json(j);
  EXPECT_NE(text.find("\"confidence\": 0.666667"), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
}

}  // namespace
}  // namespace promptcd
