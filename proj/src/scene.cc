#include "promptcd/scene.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "promptcd/errors.h"
#include "promptcd/image_io.h"
#include "promptcd/report_json.h"
#include "promptcd/rng.h"

namespace promptcd {
namespace fs = std::filesystem;

namespace {

constexpr int kPackingAttempts = 2000;

struct Color {
  double r, g, b;
};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Rectangles separated by at least `gap` pixels on some axis.
bool separated(const Rect& a, const Rect& b, int gap) {
  return a.x + a.width + gap <= b.x || b.x + b.width + gap <= a.x ||
         a.y + a.height + gap <= b.y || b.y + b.height + gap <= a.y;
}

// Smooth low-frequency field plus fine per-pixel grain, with a couple of
// straight roads.
Grid<Color> background_texture(const SceneSpec& spec, Rng& rng) {
  const Color base{96.0, 118.0, 78.0};
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 3; ++i) {
    waves.push_back({(rng.uniform() * 3.0 + 0.5) / spec.width,
                     (rng.uniform() * 3.0 + 0.5) / spec.height,
                     rng.uniform() * 2.0 * std::numbers::pi,
                     4.0 + rng.uniform() * 6.0});
  }
  const int road_x = rng.between(0, spec.width - 6);
  const int road_y = rng.between(0, spec.height - 6);

  Grid<Color> tex(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double shade = 0.0;
      for (const Wave& w : waves) {
        shade += w.amp * std::cos(2.0 * std::numbers::pi *
                                      (w.fx * x + w.fy * y) +
                                  w.phase);
      }
      Color c{base.r + shade, base.g + shade, base.b + 0.5 * shade};
      const bool road = (x >= road_x && x < road_x + 6) ||
                        (y >= road_y && y < road_y + 6);
      if (road) c = {128.0, 126.0, 122.0};
      const double grain = rng.uniform() * 12.0 - 6.0;
      tex.at(x, y) = {c.r + grain, c.g + grain, c.b + grain};
    }
  }
  return tex;
}

const Color kRoofs[] = {
    {205.0, 203.0, 198.0},  // concrete
    {168.0, 82.0, 64.0},    // tile
    {112.0, 136.0, 178.0},  // painted metal
    {226.0, 214.0, 170.0},  // light membrane
};

const Color kSurfaceChanges[] = {
    {176.0, 146.0, 104.0},  // bare soil
    {38.0, 62.0, 96.0},     // water
    {40.0, 150.0, 40.0},    // fresh crop
};

Rect random_rect(const SceneSpec& spec, int min_side, int max_side, Rng& rng) {
  Rect r;
  r.width = rng.between(min_side, std::min(max_side, spec.width));
  r.height = rng.between(min_side, std::min(max_side, spec.height));
  r.x = rng.between(0, spec.width - r.width);
  r.y = rng.between(0, spec.height - r.height);
  return r;
}

bool inside_ellipse(const Rect& r, int x, int y) {
  const double cx = r.x + (r.width - 1) / 2.0;
  const double cy = r.y + (r.height - 1) / 2.0;
  const double ax = r.width / 2.0;
  const double ay = r.height / 2.0;
  const double dx = (x - cx) / ax;
  const double dy = (y - cy) / ay;
  return dx * dx + dy * dy <= 1.0;
}

void check_same_shape(const BinaryMask& reference, int w, int h,
                      const fs::path& file) {
  if (!reference.same_shape(w, h)) {
    throw InputError(file.string() + " is " + std::to_string(w) + "x" +
                     std::to_string(h) + ", expected " +
                     std::to_string(reference.width()) + "x" +
                     std::to_string(reference.height()));
  }
}

}  // namespace

nlohmann::ordered_json to_json(const SceneSpec& spec) {
  return {{"width", spec.width},
          {"height", spec.height},
          {"n_objects", spec.n_objects},
          {"n_disappeared", spec.n_disappeared},
          {"distractors", spec.distractors},
          {"seed", spec.seed},
          {"min_side", spec.min_side},
          {"max_side", spec.max_side},
          {"min_gap", spec.min_gap}};
}

void validate(const SceneSpec& spec) {
  if (spec.width < 64 || spec.height < 64) {
    throw InputError("scene dimensions must be >= 64");
  }
  if (spec.n_objects < 0 || spec.n_disappeared < 0 || spec.distractors < 0) {
    throw InputError("object and distractor counts must be >= 0");
  }
  if (spec.n_disappeared > spec.n_objects) {
    throw InputError("cannot remove " + std::to_string(spec.n_disappeared) +
                     " of " + std::to_string(spec.n_objects) + " objects");
  }
  if (spec.min_side < 1 || spec.max_side < spec.min_side) {
    throw InputError("building side range is empty");
  }
  if (spec.min_gap < 1) throw InputError("min gap must be >= 1");
}

GeneratedScene generate_scene(const SceneSpec& spec,
                              const std::string& scene_id) {
  validate(spec);
  Rng rng(spec.seed);
  const Grid<Color> texture = background_texture(spec, rng);

  GeneratedScene out;
  for (int i = 0; i < spec.n_objects; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPackingAttempts && !placed; ++attempt) {
      const Rect r = random_rect(spec, spec.min_side, spec.max_side, rng);
      placed = std::all_of(out.buildings.begin(), out.buildings.end(),
                           [&](const Rect& o) {
                             return separated(r, o, spec.min_gap);
                           });
      if (placed) out.buildings.push_back(r);
    }
    if (!placed) {
      throw GenerationError("could not place building " + std::to_string(i) +
                            " after " + std::to_string(kPackingAttempts) +
                            " attempts");
    }
  }

  // Choose the removed buildings by partial shuffle of the indices.
  std::vector<int> order(spec.n_objects);
  for (int i = 0; i < spec.n_objects; ++i) order[i] = i;
  for (int i = 0; i < spec.n_disappeared; ++i) {
    const int j = i + static_cast<int>(rng.below(spec.n_objects - i));
    std::swap(order[i], order[j]);
  }
  out.disappeared.assign(order.begin(), order.begin() + spec.n_disappeared);
  std::sort(out.disappeared.begin(), out.disappeared.end());

  const int min_patch = std::max(8, std::min(spec.width, spec.height) / 16);
  const int max_patch = std::max(min_patch, std::min(spec.width, spec.height) / 5);
  for (int i = 0; i < spec.distractors; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPackingAttempts && !placed; ++attempt) {
      const Rect r = random_rect(spec, min_patch, max_patch, rng);
      placed = std::all_of(out.buildings.begin(), out.buildings.end(),
                           [&](const Rect& o) {
                             return separated(r, o, spec.min_gap);
                           });
      if (placed) out.distractors.push_back(r);
    }
    if (!placed) {
      throw GenerationError("could not place distractor " + std::to_string(i) +
                            " after " + std::to_string(kPackingAttempts) +
                            " attempts");
    }
  }

  const int w = spec.width;
  const int h = spec.height;
  RgbImage pre(w, h);
  RgbImage post(w, h);
  BinaryMask pre_mask(w, h, 0);
  BinaryMask reference(w, h, 0);
  Grid<std::uint8_t> semantic(w, h, kBackgroundClass);
  out.distractor_mask = BinaryMask(w, h, 0);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Color& c = texture.at(x, y);
      pre.at(x, y) = {to_byte(c.r), to_byte(c.g), to_byte(c.b)};
      // Independent sensor noise on the second date.
      const double n = rng.uniform() * 6.0 - 3.0;
      post.at(x, y) = {to_byte(c.r + n), to_byte(c.g + n), to_byte(c.b + n)};
    }
  }

  const std::set<int> removed(out.disappeared.begin(), out.disappeared.end());
  for (int i = 0; i < spec.n_objects; ++i) {
    const Rect& r = out.buildings[i];
    const Color roof = kRoofs[rng.below(std::size(kRoofs))];
    const bool gone = removed.count(i) > 0;
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) {
        const double n = rng.uniform() * 8.0 - 4.0;
        const Rgb px{to_byte(roof.r + n), to_byte(roof.g + n),
                     to_byte(roof.b + n)};
        pre.at(x, y) = px;
        pre_mask.at(x, y) = 1;
        if (gone) {
          reference.at(x, y) = 1;
        } else {
          const double m = rng.uniform() * 6.0 - 3.0;
          post.at(x, y) = {to_byte(px.r + m), to_byte(px.g + m),
                           to_byte(px.b + m)};
          semantic.at(x, y) = kBuildingClass;
        }
      }
    }
  }

  for (const Rect& r : out.distractors) {
    const Color surface = kSurfaceChanges[rng.below(std::size(kSurfaceChanges))];
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) {
        if (!inside_ellipse(r, x, y)) continue;
        const double n = rng.uniform() * 10.0 - 5.0;
        post.at(x, y) = {to_byte(surface.r + n), to_byte(surface.g + n),
                         to_byte(surface.b + n)};
        semantic.at(x, y) = kVegetationChangeClass;
        out.distractor_mask.at(x, y) = 1;
      }
    }
  }

  ScenePair& pair = out.pair;
  pair.scene_id = scene_id;
  pair.pre_mask = std::move(pre_mask);
  pair.post_image = std::move(post);
  pair.pre_image = std::move(pre);
  pair.reference_change = std::move(reference);
  pair.post_semantic = GroundTruthSemanticMap{std::move(semantic),
                                              kBuildingClass};

  auto rects = [](const std::vector<Rect>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const Rect& r : v) a.push_back({r.x, r.y, r.width, r.height});
    return a;
  };
  pair.meta = {{"scene_id", scene_id},
               {"target_class", kBuildingClass},
               {"n_objects", spec.n_objects},
               {"n_disappeared", spec.n_disappeared},
               {"buildings", rects(out.buildings)},
               {"disappeared", out.disappeared},
               {"distractors", rects(out.distractors)},
               {"generator", to_json(spec)}};
  return out;
}

ScenePair derive_scene(const Grid<std::uint8_t>& pre_labels,
                       const Grid<std::uint8_t>& post_labels,
                       const RgbImage& post_image,
                       std::optional<RgbImage> pre_image, int class_id,
                       const std::string& scene_id) {
  if (class_id < 0 || class_id > 255) {
    throw InputError("class id must be in [0, 255]");
  }
  if (!pre_labels.same_shape(post_labels) ||
      !pre_labels.same_shape(post_image) ||
      (pre_image && !pre_labels.same_shape(*pre_image))) {
    throw InputError("label maps and images must share dimensions");
  }
  const int w = pre_labels.width();
  const int h = pre_labels.height();
  ScenePair pair;
  pair.scene_id = scene_id;
  pair.pre_mask = BinaryMask(w, h, 0);
  pair.reference_change = BinaryMask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool before = pre_labels.at(x, y) == class_id;
      pair.pre_mask.at(x, y) = before;
      pair.reference_change.at(x, y) = before && post_labels.at(x, y) != class_id;
    }
  }
  pair.post_image = post_image;
  pair.pre_image = std::move(pre_image);
  pair.post_semantic = GroundTruthSemanticMap{post_labels, class_id};
  pair.meta = {{"scene_id", scene_id},
               {"target_class", class_id},
               {"derived_from", "class-id maps"},
               {"class_id", class_id}};
  return pair;
}

ScenePair load_scene(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw InputError("scene directory not found: " + dir.string());
  }
  ScenePair pair;
  pair.scene_id = dir.filename().string();
  if (pair.scene_id.empty()) pair.scene_id = dir.parent_path().filename().string();

  const fs::path meta_path = dir / "meta.json";
  if (fs::is_regular_file(meta_path)) {
    std::ifstream in(meta_path);
    try {
      pair.meta = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::ordered_json::exception& e) {
      throw InputError("invalid " + meta_path.string() + ": " + e.what());
    }
    if (pair.meta.contains("scene_id") && pair.meta["scene_id"].is_string()) {
      pair.scene_id = pair.meta["scene_id"].get<std::string>();
    }
  }

  pair.pre_mask = read_mask_png(dir / "pre_mask.png");

  pair.post_image = read_rgb_png(dir / "post.png");
  check_same_shape(pair.pre_mask, pair.post_image.width(),
                   pair.post_image.height(), dir / "post.png");
  pair.reference_change = read_mask_png(dir / "ref_change.png");
  check_same_shape(pair.pre_mask, pair.reference_change.width(),
                   pair.reference_change.height(), dir / "ref_change.png");

  if (fs::is_regular_file(dir / "pre.png")) {
    pair.pre_image = read_rgb_png(dir / "pre.png");
    check_same_shape(pair.pre_mask, pair.pre_image->width(),
                     pair.pre_image->height(), dir / "pre.png");
  }
  if (fs::is_regular_file(dir / "post_semantic.png")) {
    int target = kBuildingClass;
    if (pair.meta.contains("target_class")) {
      target = pair.meta["target_class"].get<int>();
    }
    pair.post_semantic =
        GroundTruthSemanticMap{read_gray_png(dir / "post_semantic.png"), target};
    check_same_shape(pair.pre_mask, pair.post_semantic->class_ids.width(),
                     pair.post_semantic->class_ids.height(),
                     dir / "post_semantic.png");
  }
  return pair;
}

void save_scene(const fs::path& dir, const ScenePair& scene) {
  fs::create_directories(dir);
  write_mask_png(dir / "pre_mask.png", scene.pre_mask);
  write_rgb_png(dir / "post.png", scene.post_image);
  write_mask_png(dir / "ref_change.png", scene.reference_change);
  if (scene.pre_image) write_rgb_png(dir / "pre.png", *scene.pre_image);
  if (scene.post_semantic) {
    write_gray_png(dir / "post_semantic.png", scene.post_semantic->class_ids);
  }
  write_text_file(dir / "meta.json", format_json(scene.meta));
}

void write_corpus_index(const fs::path& root,
                        const std::vector<std::string>& scene_ids,
                        const nlohmann::ordered_json& generator) {
  nlohmann::ordered_json index;
  index["scenes"] = scene_ids;
  index["generator"] = generator;
  write_text_file(root / "corpus.json", format_json(index));
}

std::vector<std::string> read_corpus_index(const fs::path& root) {
  const fs::path path = root / "corpus.json";
  if (!fs::is_regular_file(path)) {
    throw InputError("missing corpus index: " + path.string());
  }
  std::ifstream in(path);
  std::vector<std::string> ids;
  try {
    ids = nlohmann::ordered_json::parse(in).at("scenes").get<std::vector<std::string>>();
  } catch (const nlohmann::ordered_json::exception& e) {
    throw InputError("invalid " + path.string() + ": " + e.what());
  }
  if (ids.empty()) throw InputError("corpus lists no scenes: " + path.string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

void validate(const CorpusSpec& spec) {
  if (spec.scenes < 1) throw InputError("corpus needs at least one scene");
  validate(spec.base);
  if (spec.max_objects > 0 && spec.max_objects < spec.base.n_objects) {
    throw InputError("max objects is below the minimum object count");
  }
}

nlohmann::ordered_json to_json(const CorpusSpec& spec) {
  nlohmann::ordered_json j = to_json(spec.base);
  j["scenes"] = spec.scenes;
  j["max_objects"] = spec.max_objects;
  return j;
}

std::string corpus_scene_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04d", index);
  return buf;
}

SceneSpec corpus_scene_spec(const CorpusSpec& spec, int index) {
  Rng rng(combine_seed(spec.base.seed, static_cast<std::uint64_t>(index)));
  SceneSpec scene = spec.base;
  if (spec.max_objects > spec.base.n_objects) {
    scene.n_objects = rng.between(spec.base.n_objects, spec.max_objects);
  }
  scene.seed = rng.next();
  return scene;
}

std::vector<std::string> generate_corpus(const fs::path& root,
                                         const CorpusSpec& spec) {
  validate(spec);
  std::vector<std::string> ids;
  for (int i = 0; i < spec.scenes; ++i) {
    const std::string id = corpus_scene_id(i);
    const GeneratedScene scene = generate_scene(corpus_scene_spec(spec, i), id);
    save_scene(scene_dir(root, id), scene.pair);
    ids.push_back(id);
  }
  write_corpus_index(root, ids, to_json(spec));
  return ids;
}

fs::path scene_dir(const fs::path& root, const std::string& scene_id) {
  return root / "scenes" / scene_id;
}

}  // namespace promptcd
