#ifndef PROMPTCD_EVAL_H_
#define PROMPTCD_EVAL_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptcd/detector.h"
#include "promptcd/metrics.h"
#include "promptcd/scene.h"

namespace promptcd {

struct BackendSpec {
  std::string kind = "mock";  // "mock" | "onnx"
  std::filesystem::path model_dir = "models";
  double noise_sigma = 0.0;
};

nlohmann::ordered_json to_json(const BackendSpec& spec);

// Mock backends need the scene's post-change semantic map (InputError when
// absent); graph backends throw BackendError when the model files are
// missing. `seed` keys the mock noise stream.
std::unique_ptr<Segmenter> make_backend(
    const BackendSpec& spec,
    const std::optional<GroundTruthSemanticMap>& semantic, std::uint64_t seed);

struct SceneResult {
  std::string scene_id;
  int num_objects = 0;
  std::vector<int> changed;
  std::vector<int> truth;
  std::vector<double> margins;
  PixelMetrics pixel;
  bool exact = false;
  ChangeReport report;
  ChangeMap change_map;
};

// Detects on one scene and scores it against its reference change map.
SceneResult evaluate_scene(const ScenePair& scene, const Segmenter& backend,
                           const DetectorConfig& config);

// "auto" -> nullopt, otherwise a non-negative integer (InputError if not).
std::optional<int> parse_change_count(const std::string& text);

// Expected change count for a scene: meta.json "n_disappeared" when present,
// otherwise the number of reference objects.
int scene_change_count(const ScenePair& scene, const DetectorConfig& config);

struct EvalOptions {
  BackendSpec backend;
  DetectorConfig detector;
  // "scene" (use scene_change_count), "auto", or a non-negative integer.
  std::string num_changed = "scene";
  int jobs = 1;
  std::optional<std::filesystem::path> reports_dir;
};

struct EvalSummary {
  std::vector<SceneResult> scenes;  // sorted by scene id
  PixelMetrics mean;
  double object_accuracy = 0.0;
};

EvalSummary aggregate(std::vector<SceneResult> scenes);

// Runs every scene of a corpus; scenes are processed by `jobs` workers but
// results and files do not depend on the job count.
EvalSummary evaluate_corpus(const std::filesystem::path& root,
                            const EvalOptions& options);

nlohmann::ordered_json metrics_to_json(const EvalSummary& summary,
                               const nlohmann::ordered_json& config);

// Mock noise stream seed derived from the run seed.
std::uint64_t mock_seed(std::uint64_t run_seed);

}  // namespace promptcd

#endif  // PROMPTCD_EVAL_H_
