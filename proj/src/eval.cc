#include "promptcd/eval.h"

#include <atomic>
#include <charconv>
#include <exception>
#include <thread>

#include "promptcd/errors.h"
#include "promptcd/graph_segmenter.h"
#include "promptcd/image_io.h"
#include "promptcd/mock_segmenter.h"
#include "promptcd/report_json.h"
#include "promptcd/rng.h"

namespace promptcd {

nlohmann::ordered_json to_json(const BackendSpec& spec) {
  nlohmann::ordered_json j{{"backend", spec.kind}};
  if (spec.kind == "mock") {
    j["noise_sigma"] = spec.noise_sigma;
  } else {
    j["model_dir"] = spec.model_dir.string();
  }
  return j;
}

std::uint64_t mock_seed(std::uint64_t run_seed) {
  return combine_seed(run_seed, 0x6d6f636bULL);
}

std::unique_ptr<Segmenter> make_backend(
    const BackendSpec& spec,
    const std::optional<GroundTruthSemanticMap>& semantic, std::uint64_t seed) {
  if (spec.kind == "mock") {
    if (!semantic) {
      throw InputError("mock backend requires a post-change semantic map");
    }
    return std::make_unique<MockSegmenter>(
        *semantic, MockOptions{spec.noise_sigma, mock_seed(seed)});
  }
  if (spec.kind == "onnx") {
    return std::make_unique<GraphSegmenter>(spec.model_dir);
  }
  throw InputError("unknown backend '" + spec.kind + "' (expected mock|onnx)");
}

std::optional<int> parse_change_count(const std::string& text) {
  if (text == "auto") return std::nullopt;
  int value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || value < 0) {
    throw InputError("expected change count must be a non-negative integer "
                     "or 'auto', got '" + text + "'");
  }
  return value;
}

int scene_change_count(const ScenePair& scene, const DetectorConfig& config) {
  if (scene.meta.contains("n_disappeared") &&
      scene.meta["n_disappeared"].is_number_integer()) {
    return scene.meta["n_disappeared"].get<int>();
  }
  const LabeledMask labeled =
      connected_components(scene.pre_mask, config.connectivity);
  return static_cast<int>(
      reference_labels(labeled, scene.reference_change).size());
}

SceneResult evaluate_scene(const ScenePair& scene, const Segmenter& backend,
                           const DetectorConfig& config) {
  SceneResult result;
  result.scene_id = scene.scene_id;
  result.report =
      detect_changes(scene.pre_mask, scene.post_image, backend, config);
  const LabeledMask labeled =
      connected_components(scene.pre_mask, config.connectivity);
  result.num_objects = labeled.num_objects;
  result.change_map = render_change_map(result.report, labeled);
  result.changed = result.report.changed_labels;
  result.margins = result.report.margins;
  result.truth = reference_labels(labeled, scene.reference_change);
  result.pixel = score(result.change_map, scene.reference_change);
  result.exact = same_label_set(result.changed, result.truth);
  return result;
}

EvalSummary aggregate(std::vector<SceneResult> scenes) {
  EvalSummary summary;
  summary.scenes = std::move(scenes);
  std::sort(summary.scenes.begin(), summary.scenes.end(),
            [](const SceneResult& a, const SceneResult& b) {
              return a.scene_id < b.scene_id;
            });
  const double n = static_cast<double>(summary.scenes.size());
  if (n == 0) return summary;
  int exact = 0;
  for (const SceneResult& s : summary.scenes) {
    summary.mean.iou += s.pixel.iou;
    summary.mean.precision += s.pixel.precision;
    summary.mean.recall += s.pixel.recall;
    summary.mean.f1 += s.pixel.f1;
    exact += s.exact;
  }
  summary.mean.iou /= n;
  summary.mean.precision /= n;
  summary.mean.recall /= n;
  summary.mean.f1 /= n;
  summary.object_accuracy = exact / n;
  return summary;
}

EvalSummary evaluate_corpus(const std::filesystem::path& root,
                            const EvalOptions& options) {
  validate(options.detector);
  std::optional<int> fixed_count;
  if (options.num_changed != "scene" && options.num_changed != "auto") {
    fixed_count = parse_change_count(options.num_changed);
    if (!fixed_count) throw InputError("num_changed must be scene, auto or N");
  }
  if (options.jobs < 1) throw InputError("jobs must be >= 1");
  const std::vector<std::string> ids = read_corpus_index(root);

  // One graph backend is shared by all scenes; mock backends are per scene.
  std::unique_ptr<Segmenter> shared;
  if (options.backend.kind != "mock") {
    shared = make_backend(options.backend, std::nullopt, options.detector.seed);
  }

  std::vector<SceneResult> results(ids.size());
  std::vector<std::exception_ptr> errors(ids.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      try {
        const ScenePair scene = load_scene(scene_dir(root, ids[i]));
        DetectorConfig config = options.detector;
        config.jobs = 1;
        if (options.num_changed == "scene") {
          config.expected_changes = scene_change_count(scene, config);
        } else if (options.num_changed == "auto") {
          config.expected_changes.reset();
        } else {
          config.expected_changes = fixed_count;
        }
        std::unique_ptr<Segmenter> own;
        const Segmenter* backend = shared.get();
        if (!backend) {
          own = make_backend(options.backend, scene.post_semantic, config.seed);
          backend = own.get();
        }
        results[i] = evaluate_scene(scene, *backend, config);
        results[i].scene_id = ids[i];
        if (options.reports_dir) {
          nlohmann::ordered_json extra = to_json(options.backend);
          extra["scene"] = ids[i];
          write_text_file(*options.reports_dir / (ids[i] + ".json"),
                          format_json(report_to_json(results[i].report, extra)));
          write_mask_png(*options.reports_dir / (ids[i] + ".png"),
                         results[i].change_map);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int jobs = std::min<int>(options.jobs, static_cast<int>(ids.size()));
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> workers;
    for (int j = 0; j < jobs; ++j) workers.emplace_back(work);
    for (auto& w : workers) w.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return aggregate(std::move(results));
}

nlohmann::ordered_json metrics_to_json(const EvalSummary& summary,
                               const nlohmann::ordered_json& config) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SceneResult& s : summary.scenes) {
    nlohmann::ordered_json margins = nlohmann::ordered_json::array();
    for (double m : s.margins) margins.push_back(m);
    rows.push_back({{"scene", s.scene_id},
                    {"num_objects", s.num_objects},
                    {"changed", s.changed},
                    {"truth", s.truth},
                    {"margins", margins},
                    {"exact", s.exact},
                    {"pixel_iou", s.pixel.iou},
                    {"precision", s.pixel.precision},
                    {"recall", s.pixel.recall},
                    {"f1", s.pixel.f1}});
  }
  nlohmann::ordered_json j;
  j["scenes"] = rows;
  j["aggregate"] = {{"scenes", summary.scenes.size()},
                    {"pixel_iou", summary.mean.iou},
                    {"precision", summary.mean.precision},
                    {"recall", summary.mean.recall},
                    {"f1", summary.mean.f1},
                    {"object_accuracy", summary.object_accuracy}};
  j["config"] = config;
  return j;
}

}  // namespace promptcd
