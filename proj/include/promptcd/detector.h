#ifndef PROMPTCD_DETECTOR_H_
#define PROMPTCD_DETECTOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptcd/grid.h"
#include "promptcd/mask_ops.h"
#include "promptcd/segmenter.h"

namespace promptcd {

struct DetectorConfig {
  int points_per_object = 3;
  int min_area = 20;  // 1 keeps every object
  Connectivity connectivity = Connectivity::kEight;
  // Number of disappeared objects to report. nullopt selects auto mode,
  // which stops once no exclusion beats the reference trial by min_margin.
  std::optional<int> expected_changes = 1;
  double min_margin = 0.1;
  std::uint64_t seed = 0;
  std::string aggregation = "single-call";
  // Worker threads used to score the trials of one iteration.
  int jobs = 1;
};

// Throws InputError on out-of-range fields.
void validate(const DetectorConfig& config);

// One leave-one-out prompt set. excluded_label == 0 is the reference trial
// that prompts every active object.
struct ExclusionTrial {
  int excluded_label = 0;
  std::vector<PointPrompt> prompts;
  SegmentationOutcome outcome;

  // A trial with no prompts (the single-object case) cannot be sent to the
  // backend.
  bool scorable() const { return !prompts.empty(); }
};

struct ConfidenceRow {
  int excluded_label = 0;
  double confidence = 0.0;
  bool scorable = true;
};

// Rows ascending by excluded label; rows[0] is the reference trial.
struct ConfidenceTable {
  std::vector<ConfidenceRow> rows;
  double reference_confidence = 0.0;
};

struct Detection {
  std::optional<int> label;
  double margin = 0.0;
};

struct ChangeReport {
  std::vector<int> changed_labels;  // detection order
  std::vector<double> margins;
  std::vector<ConfidenceTable> tables;  // one per iteration
  std::vector<int> ignored_labels;      // below min_area
  int num_objects = 0;
  std::uint64_t seed = 0;
  DetectorConfig config;
  std::vector<std::string> warnings;
};

// True exactly at the pre-change pixels of the changed objects.
using ChangeMap = BinaryMask;

// Reference trial plus one trial per active label. Each object's points come
// from interior_point_sample with seed ^ label, so an object contributes the
// same points to every trial it appears in.
std::vector<ExclusionTrial> build_trials(const LabeledMask& labeled,
                                         std::span<const int> active, int k,
                                         std::uint64_t seed);

// Fills each trial's outcome. Unscorable trials get the reference
// confidence. Result does not depend on trial order or `jobs`.
ConfidenceTable score_trials(std::span<ExclusionTrial> trials,
                             const ImageEmbedding& embedding,
                             const Segmenter& backend, int jobs = 1);

// Label whose exclusion gives the highest confidence (lowest label on ties),
// if it beats the reference by at least min_margin. Pass -infinity to always
// take the argmax. Margin is best minus second-best exclusion confidence.
Detection identify_changed(const ConfidenceTable& table, double min_margin);

// Full pipeline: label the mask, drop small objects, embed once, then
// repeatedly build/score trials and remove the detected object.
ChangeReport detect_changes(const BinaryMask& mask, const RgbImage& post_image,
                            const Segmenter& backend,
                            const DetectorConfig& config);

ChangeMap render_change_map(const ChangeReport& report,
                            const LabeledMask& labeled);

}  // namespace promptcd

#endif  // PROMPTCD_DETECTOR_H_
