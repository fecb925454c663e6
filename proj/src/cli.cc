#include "promptcd/cli.h"

#include <filesystem>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "promptcd/detector.h"
#include "promptcd/errors.h"
#include "promptcd/eval.h"
#include "promptcd/image_io.h"
#include "promptcd/mock_segmenter.h"
#include "promptcd/rcva.h"
#include "promptcd/report_json.h"
#include "promptcd/scene.h"

namespace promptcd {
namespace fs = std::filesystem;

namespace {

// Flags shared by detect and eval.
struct DetectorFlags {
  std::string backend = "mock";
  std::string model_dir = "models";
  double sigma = 0.0;
  int points = 3;
  int min_area = 20;
  int connectivity = 8;
  double min_margin = 0.1;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void add_detector_flags(CLI::App* cmd, DetectorFlags& f) {
  cmd->add_option("--backend", f.backend, "Segmentation backend")
      ->check(CLI::IsMember({"mock", "onnx"}))
      ->capture_default_str();
  cmd->add_option("--model-dir", f.model_dir,
                  "Directory holding encoder.onnx and decoder.onnx")
      ->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "Mock backend Gaussian noise sigma")
      ->capture_default_str();
  cmd->add_option("--points", f.points, "Prompt points per object")
      ->capture_default_str();
  cmd->add_option("--min-area", f.min_area,
                  "Objects smaller than this (pixels) are ignored")
      ->capture_default_str();
  cmd->add_option("--connectivity", f.connectivity, "Object connectivity")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  cmd->add_option("--min-margin", f.min_margin,
                  "Auto mode: required gain over the reference trial")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed for every random choice")
      ->capture_default_str();
}

DetectorConfig detector_config(const DetectorFlags& f) {
  DetectorConfig config;
  config.points_per_object = f.points;
  config.min_area = f.min_area;
  config.connectivity = connectivity_from_int(f.connectivity);
  config.min_margin = f.min_margin;
  config.seed = f.seed;
  config.jobs = f.jobs;
  return config;
}

BackendSpec backend_spec(const DetectorFlags& f) {
  return BackendSpec{f.backend, f.model_dir, f.sigma};
}

std::string format_list(const std::vector<double>& values) {
  std::ostringstream s;
  s << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", values[i]);
    s << (i ? ", " : "") << buf;
  }
  s << ']';
  return s.str();
}

std::string format_list(const std::vector<int>& values) {
  std::ostringstream s;
  s << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    s << (i ? ", " : "") << values[i];
  }
  s << ']';
  return s.str();
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Object disappearance detection from a pre-change mask and a "
               "post-change image",
               "promptcd"};
  app.set_config("--config", "", "TOML file with flag values");
  app.require_subcommand(1);

  // detect
  DetectorFlags detect_flags;
  std::string mask_path, image_path, semantic_path, report_path = "report.json",
                                                     map_path = "change_map.png";
  std::string num_changed = "1";
  int target_class = kBuildingClass;
  CLI::App* detect = app.add_subcommand(
      "detect", "Detect disappeared objects with leave-one-out prompt trials");
  detect->add_option("--mask", mask_path, "Pre-change object mask (PNG)")
      ->required();
  detect->add_option("--image", image_path, "Post-change image (PNG)")
      ->required();
  detect->add_option("--semantic", semantic_path,
                     "Post-change class-id map (mock backend)");
  detect->add_option("--target-class", target_class,
                     "Class id of the objects of interest in --semantic")
      ->capture_default_str();
  detect->add_option("--num-changed", num_changed,
                     "Number of changed objects to report, or 'auto'")
      ->capture_default_str();
  detect->add_option("--jobs", detect_flags.jobs,
                     "Threads used to score trials")
      ->capture_default_str();
  detect->add_option("--out", report_path, "Report JSON path")
      ->capture_default_str();
  detect->add_option("--map", map_path, "Change map PNG path")
      ->capture_default_str();
  add_detector_flags(detect, detect_flags);

  // synth
  CorpusSpec corpus;
  std::string synth_out;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate a synthetic scene corpus");
  synth->add_option("--scenes", corpus.scenes, "Number of scenes")
      ->capture_default_str();
  synth->add_option("--width", corpus.base.width)->capture_default_str();
  synth->add_option("--height", corpus.base.height)->capture_default_str();
  synth->add_option("--objects", corpus.base.n_objects,
                    "Buildings per scene (minimum when --max-objects is set)")
      ->capture_default_str();
  synth->add_option("--max-objects", corpus.max_objects,
                    "Draw the building count uniformly up to this value")
      ->capture_default_str();
  synth->add_option("--disappeared", corpus.base.n_disappeared,
                    "Buildings removed in the post-change image")
      ->capture_default_str();
  synth->add_option("--distractors", corpus.base.distractors,
                    "Non-building surface-change patches")
      ->capture_default_str();
  synth->add_option("--min-side", corpus.base.min_side)->capture_default_str();
  synth->add_option("--max-side", corpus.base.max_side)->capture_default_str();
  synth->add_option("--seed", corpus.base.seed)->capture_default_str();
  synth->add_option("--out", synth_out, "Corpus root directory")->required();

  // eval
  DetectorFlags eval_flags;
  std::string corpus_root, metrics_path = "metrics.json", reports_dir;
  std::string eval_num_changed = "scene";
  CLI::App* eval = app.add_subcommand("eval", "Run detect over a corpus");
  eval->add_option("--corpus", corpus_root, "Corpus root (with corpus.json)")
      ->required();
  eval->add_option("--out", metrics_path, "Metrics JSON path")
      ->capture_default_str();
  eval->add_option("--reports", reports_dir,
                   "Directory for per-scene reports and change maps");
  eval->add_option("--num-changed", eval_num_changed,
                   "'scene' (from meta.json), 'auto', or a fixed count")
      ->capture_default_str();
  eval->add_option("--jobs", eval_flags.jobs, "Scenes processed in parallel")
      ->capture_default_str();
  add_detector_flags(eval, eval_flags);

  // baseline-rcva
  std::string rcva_pre, rcva_post, rcva_scene, rcva_out = "rcva_change.png",
                                                magnitude_path;
  int window = 3;
  CLI::App* rcva = app.add_subcommand(
      "baseline-rcva", "Pixel-level change vector analysis baseline");
  rcva->add_option("--pre", rcva_pre, "Pre-change image (PNG)");
  rcva->add_option("--post", rcva_post, "Post-change image (PNG)");
  rcva->add_option("--scene", rcva_scene,
                   "Scene directory (uses pre.png and post.png)");
  rcva->add_option("--window", window, "Odd neighborhood size")
      ->capture_default_str();
  rcva->add_option("--out", rcva_out, "Thresholded change map PNG")
      ->capture_default_str();
  rcva->add_option("--magnitude", magnitude_path,
                   "Optional 16-bit magnitude PNG");

  // derive
  std::string pre_labels, post_labels, derive_post, derive_pre, derive_out,
      derive_id;
  int class_id = -1;
  CLI::App* derive = app.add_subcommand(
      "derive", "Build a scene directory from per-date class-id maps");
  derive->add_option("--pre-labels", pre_labels, "Pre-change class-id PNG")
      ->required();
  derive->add_option("--post-labels", post_labels, "Post-change class-id PNG")
      ->required();
  derive->add_option("--post-image", derive_post, "Post-change image (PNG)")
      ->required();
  derive->add_option("--pre-image", derive_pre, "Pre-change image (PNG)");
  derive->add_option("--class-id", class_id, "Class id of the objects")
      ->required();
  derive->add_option("--scene-id", derive_id, "Scene id (default: out dir)");
  derive->add_option("--out", derive_out, "Scene directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitInput;
  }

  try {
    if (detect->parsed()) {
      DetectorConfig config = detector_config(detect_flags);
      config.expected_changes = parse_change_count(num_changed);
      validate(config);
      const BinaryMask mask = read_mask_png(mask_path);
      const RgbImage image = read_rgb_png(image_path);
      std::optional<GroundTruthSemanticMap> semantic;
      if (!semantic_path.empty()) {
        semantic = GroundTruthSemanticMap{read_gray_png(semantic_path),
                                          target_class};
      }
      const BackendSpec spec = backend_spec(detect_flags);
      const auto backend = make_backend(spec, semantic, config.seed);

      const ChangeReport report = detect_changes(mask, image, *backend, config);
      const LabeledMask labeled =
          connected_components(mask, config.connectivity);
      nlohmann::ordered_json extra = to_json(spec);
      extra["mask"] = mask_path;
      extra["image"] = image_path;
      if (semantic) {
        extra["semantic"] = semantic_path;
        extra["target_class"] = target_class;
      }
      write_text_file(report_path, format_json(report_to_json(report, extra)));
      write_mask_png(map_path, render_change_map(report, labeled));
      out << "changed " << format_list(report.changed_labels) << " margins "
          << format_list(report.margins) << "\n";
      for (const std::string& w : report.warnings) err << "warning: " << w << "\n";
    } else if (synth->parsed()) {
      validate(corpus);
      const auto ids = generate_corpus(synth_out, corpus);
      out << "wrote " << ids.size() << " scenes to " << synth_out << "\n";
    } else if (eval->parsed()) {
      EvalOptions options;
      options.backend = backend_spec(eval_flags);
      options.detector = detector_config(eval_flags);
      options.detector.jobs = 1;
      options.num_changed = eval_num_changed;
      options.jobs = eval_flags.jobs;
      if (!reports_dir.empty()) options.reports_dir = reports_dir;
      const EvalSummary summary = evaluate_corpus(corpus_root, options);

      nlohmann::ordered_json config = config_to_json(options.detector);
      config.update(to_json(options.backend));
      config["num_changed"] = eval_num_changed;
      config["corpus"] = corpus_root;
      write_text_file(metrics_path,
                      format_json(metrics_to_json(summary, config)));
      char line[160];
      std::snprintf(line, sizeof line,
                    "scenes %zu object_accuracy %.6f pixel_iou %.6f\n",
                    summary.scenes.size(), summary.object_accuracy,
                    summary.mean.iou);
      out << line;
    } else if (rcva->parsed()) {
      RgbImage pre, post;
      if (!rcva_scene.empty()) {
        const ScenePair scene = load_scene(rcva_scene);
        if (!scene.pre_image) {
          throw InputError("scene " + rcva_scene +
                           " has no pre.png; the baseline needs both images");
        }
        pre = *scene.pre_image;
        post = scene.post_image;
      } else {
        if (rcva_pre.empty()) throw InputError("--pre is required");
        if (rcva_post.empty()) throw InputError("--post is required");
        pre = read_rgb_png(rcva_pre);
        post = read_rgb_png(rcva_post);
      }
      const MagnitudeMap magnitude = rcva_magnitude(pre, post, window);
      const ThresholdResult result = otsu_threshold(magnitude);
      write_mask_png(rcva_out, result.change_mask);
      if (!magnitude_path.empty()) {
        write_gray16_png(magnitude_path, magnitude_to_u16(magnitude));
      }
      char line[128];
      std::snprintf(line, sizeof line, "threshold %.6f changed_pixels %zu\n",
                    result.threshold, count_foreground(result.change_mask));
      out << line;
    } else if (derive->parsed()) {
      std::optional<RgbImage> pre_image;
      if (!derive_pre.empty()) pre_image = read_rgb_png(derive_pre);
      const std::string id =
          derive_id.empty() ? fs::path(derive_out).filename().string()
                            : derive_id;
      const ScenePair scene =
          derive_scene(read_gray_png(pre_labels), read_gray_png(post_labels),
                       read_rgb_png(derive_post), std::move(pre_image),
                       class_id, id);
      save_scene(derive_out, scene);
      out << "wrote scene " << id << " with "
          << count_foreground(scene.reference_change)
          << " changed pixels\n";
    }
  } catch (const BackendError& e) {
    err << "backend error: " << one_line(e.what()) << "\n";
    return kExitBackend;
  } catch (const InputError& e) {
    err << "input error: " << one_line(e.what()) << "\n";
    return kExitInput;
  } catch (const GenerationError& e) {
    err << "generation error: " << one_line(e.what()) << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << one_line(e.what()) << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace promptcd
