#ifndef PROMPTCD_SCENE_H_
#define PROMPTCD_SCENE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptcd/grid.h"
#include "promptcd/mock_segmenter.h"

namespace promptcd {

// Bi-temporal scene as consumed by the detector and the baseline.
//
// Directory layout: pre_mask.png, post.png, ref_change.png (required);
// pre.png, post_semantic.png, meta.json (optional).
struct ScenePair {
  std::string scene_id;
  BinaryMask pre_mask;
  RgbImage post_image;
  std::optional<RgbImage> pre_image;
  BinaryMask reference_change;
  std::optional<GroundTruthSemanticMap> post_semantic;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

ScenePair load_scene(const std::filesystem::path& dir);
void save_scene(const std::filesystem::path& dir, const ScenePair& scene);

// Semantic class ids used by generated scenes.
inline constexpr int kBackgroundClass = 0;
inline constexpr int kBuildingClass = 1;
inline constexpr int kVegetationChangeClass = 2;

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  std::int64_t area() const {
    return static_cast<std::int64_t>(width) * height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct SceneSpec {
  int width = 256;
  int height = 256;
  int n_objects = 5;
  int n_disappeared = 1;
  int distractors = 0;
  std::uint64_t seed = 0;
  int min_side = 8;   // building side range, pixels
  int max_side = 24;
  int min_gap = 3;    // background pixels between buildings
};

nlohmann::ordered_json to_json(const SceneSpec& spec);

// Throws InputError for an inconsistent spec.
void validate(const SceneSpec& spec);

struct GeneratedScene {
  ScenePair pair;
  std::vector<Rect> buildings;
  std::vector<int> disappeared;  // indices into buildings
  std::vector<Rect> distractors;
  BinaryMask distractor_mask;    // pixels altered by distractor patches
};

// Rectangular buildings on a textured background; n_disappeared of them are
// painted over with background in the post image, and distractor patches
// (vegetation-like color changes away from buildings) are added to it.
// Deterministic in the spec. Throws GenerationError if packing fails.
GeneratedScene generate_scene(const SceneSpec& spec,
                              const std::string& scene_id = "scene");

// Builds a scene from per-date class-id maps: pre_mask = pre_labels ==
// class_id, reference_change = pre_mask & post_labels != class_id.
ScenePair derive_scene(const Grid<std::uint8_t>& pre_labels,
                       const Grid<std::uint8_t>& post_labels,
                       const RgbImage& post_image,
                       std::optional<RgbImage> pre_image, int class_id,
                       const std::string& scene_id);

// A corpus of generated scenes. Scene i uses n_objects drawn uniformly from
// [base.n_objects, max_objects] (max_objects <= 0: fixed count) and a seed
// derived from (base.seed, i).
struct CorpusSpec {
  int scenes = 10;
  SceneSpec base;
  int max_objects = 0;
};

void validate(const CorpusSpec& spec);
nlohmann::ordered_json to_json(const CorpusSpec& spec);
std::string corpus_scene_id(int index);
SceneSpec corpus_scene_spec(const CorpusSpec& spec, int index);

// Writes scenes/<id>/... and corpus.json under root. Returns the scene ids.
std::vector<std::string> generate_corpus(const std::filesystem::path& root,
                                         const CorpusSpec& spec);

// corpus.json: {"scenes": [ids...], "generator": {...}}.
void write_corpus_index(const std::filesystem::path& root,
                        const std::vector<std::string>& scene_ids,
                        const nlohmann::ordered_json& generator);
// Scene ids sorted ascending. Throws InputError if the index is missing or
// lists no scenes.
std::vector<std::string> read_corpus_index(const std::filesystem::path& root);
std::filesystem::path scene_dir(const std::filesystem::path& root,
                                const std::string& scene_id);

}  // namespace promptcd

#endif  // PROMPTCD_SCENE_H_
