#include "promptcd/detector.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <string>
#include <thread>

#include "promptcd/errors.h"
#include "promptcd/rng.h"

namespace promptcd {

void validate(const DetectorConfig& config) {
  if (config.points_per_object < 1) {
    throw InputError("points per object must be >= 1");
  }
  if (config.min_area < 1) throw InputError("min area must be >= 1");
  if (config.expected_changes && *config.expected_changes < 0) {
    throw InputError("expected change count must be >= 0");
  }
  if (!std::isfinite(config.min_margin) || config.min_margin < 0.0) {
    throw InputError("min margin must be finite and >= 0");
  }
  if (config.aggregation != "single-call") {
    throw InputError("unsupported aggregation '" + config.aggregation +
                     "' (only single-call is implemented)");
  }
  if (config.jobs < 1) throw InputError("jobs must be >= 1");
}

std::vector<ExclusionTrial> build_trials(const LabeledMask& labeled,
                                         std::span<const int> active, int k,
                                         std::uint64_t seed) {
  if (active.empty()) throw InputError("no active objects to build trials");
  if (k < 1) throw InputError("points per object must be >= 1");

  std::vector<int> labels(active.begin(), active.end());
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw InputError("duplicate label in active set");
  }

  std::map<int, std::vector<PixelPoint>> points;
  for (int label : labels) {
    points[label] = interior_point_sample(
        labeled, label, k, seed ^ static_cast<std::uint64_t>(label));
  }

  std::vector<ExclusionTrial> trials;
  trials.reserve(labels.size() + 1);
  auto make = [&](int excluded) {
    ExclusionTrial trial;
    trial.excluded_label = excluded;
    for (int label : labels) {
      if (label == excluded) continue;
      for (const PixelPoint& p : points[label]) {
        trial.prompts.push_back({p, Polarity::kForeground});
      }
    }
    return trial;
  };
  trials.push_back(make(0));
  for (int label : labels) trials.push_back(make(label));
  return trials;
}

ConfidenceTable score_trials(std::span<ExclusionTrial> trials,
                             const ImageEmbedding& embedding,
                             const Segmenter& backend, int jobs) {
  auto run = [&](ExclusionTrial& trial) {
    if (!trial.scorable()) return;
    try {
      trial.outcome = backend.segment(embedding, trial.prompts);
    } catch (const BackendError& e) {
      throw BackendError("trial excluding object " +
                         std::to_string(trial.excluded_label) + ": " +
                         e.what());
    }
  };

  jobs = std::clamp<int>(jobs, 1, static_cast<int>(trials.size()));
  if (jobs == 1) {
    for (ExclusionTrial& trial : trials) run(trial);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(trials.size());
    std::vector<std::thread> workers;
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < trials.size(); i = next++) {
          try {
            run(trials[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    // Report the failure of the first trial in order, not the first to fail.
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ConfidenceTable table;
  const auto reference =
      std::find_if(trials.begin(), trials.end(),
                   [](const ExclusionTrial& t) { return t.excluded_label == 0; });
  if (reference == trials.end() || !reference->scorable()) {
    throw InputError("trial set has no scorable reference trial");
  }
  table.reference_confidence = reference->outcome.confidence;

  for (ExclusionTrial& trial : trials) {
    if (!trial.scorable()) {
      trial.outcome = {BinaryMask(embedding.source_width,
                                  embedding.source_height, 0),
                       table.reference_confidence};
    }
    table.rows.push_back(
        {trial.excluded_label, trial.outcome.confidence, trial.scorable()});
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ConfidenceRow& a, const ConfidenceRow& b) {
              return a.excluded_label < b.excluded_label;
            });
  return table;
}

Detection identify_changed(const ConfidenceTable& table, double min_margin) {
  std::vector<ConfidenceRow> rows;
  for (const ConfidenceRow& row : table.rows) {
    if (row.excluded_label != 0) rows.push_back(row);
  }
  if (rows.empty()) return {};
  std::sort(rows.begin(), rows.end(),
            [](const ConfidenceRow& a, const ConfidenceRow& b) {
              return a.excluded_label < b.excluded_label;
            });

  // Single object: its exclusion trial is empty, so fall back to testing
  // the reference confidence against 1 - min_margin.
  if (rows.size() == 1 && !rows[0].scorable) {
    const double shortfall = 1.0 - table.reference_confidence;
    if (shortfall >= min_margin) return {rows[0].excluded_label, shortfall};
    return {};
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].confidence > rows[best].confidence) best = i;
  }
  double second = table.reference_confidence;
  if (rows.size() > 1) {
    second = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != best) second = std::max(second, rows[i].confidence);
    }
  }
  if (rows[best].confidence - table.reference_confidence < min_margin) {
    return {};
  }
  return {rows[best].excluded_label,
          std::max(0.0, rows[best].confidence - second)};
}

ChangeReport detect_changes(const BinaryMask& mask, const RgbImage& post_image,
                            const Segmenter& backend,
                            const DetectorConfig& config) {
  validate(config);
  if (!mask.same_shape(post_image)) {
    throw InputError("mask is " + std::to_string(mask.width()) + "x" +
                     std::to_string(mask.height()) + " but image is " +
                     std::to_string(post_image.width()) + "x" +
                     std::to_string(post_image.height()));
  }

  ChangeReport report;
  report.seed = config.seed;
  report.config = config;

  const LabeledMask labeled = connected_components(mask, config.connectivity);
  report.num_objects = labeled.num_objects;
  std::vector<int> active;
  for (const ObjectStats& s : object_stats(labeled)) {
    if (s.area >= config.min_area) {
      active.push_back(s.label);
    } else {
      report.ignored_labels.push_back(s.label);
    }
  }
  if (labeled.num_objects == 0) {
    report.warnings.push_back("pre-change mask contains no objects");
    return report;
  }
  if (active.empty()) {
    report.warnings.push_back("every object is smaller than min_area");
    return report;
  }

  const ImageEmbedding embedding = backend.embed_image(post_image);
  const bool fixed = config.expected_changes.has_value();
  const int wanted = fixed ? *config.expected_changes : 0;
  const double margin_gate =
      fixed ? -std::numeric_limits<double>::infinity() : config.min_margin;

  for (int iteration = 0;; ++iteration) {
    const int found = static_cast<int>(report.changed_labels.size());
    if (fixed && found >= wanted && iteration > 0) break;
    if (active.empty()) {
      if (fixed && found < wanted) {
        report.warnings.push_back("ran out of objects after " +
                                  std::to_string(found) + " detections");
      }
      break;
    }

    std::vector<ExclusionTrial> trials =
        build_trials(labeled, active, config.points_per_object,
                     combine_seed(config.seed, iteration));
    report.tables.push_back(
        score_trials(trials, embedding, backend, config.jobs));
    if (fixed && found >= wanted) break;  // m == 0: table only

    const Detection detection =
        identify_changed(report.tables.back(), margin_gate);
    if (!detection.label) break;
    report.changed_labels.push_back(*detection.label);
    report.margins.push_back(detection.margin);
    active.erase(std::find(active.begin(), active.end(), *detection.label));
  }
  return report;
}

ChangeMap render_change_map(const ChangeReport& report,
                            const LabeledMask& labeled) {
  return mask_of_labels(labeled, report.changed_labels);
}

}  // namespace promptcd
