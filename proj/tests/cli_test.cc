#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptcd/cli.h"
#include "promptcd/image_io.h"
#include "promptcd/metrics.h"
#include "promptcd/scene.h"
#include "test_util.h"

namespace promptcd {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// One generated scene saved under dir/scene.
GeneratedScene make_scene(const fs::path& dir, int objects, int disappeared,
                          int distractors, std::uint64_t seed) {
  SceneSpec spec;
  spec.n_objects = objects;
  spec.n_disappeared = disappeared;
  spec.distractors = distractors;
  spec.seed = seed;
  GeneratedScene g = generate_scene(spec, "scene");
  save_scene(dir / "scene", g.pair);
  return g;
}

std::vector<std::string> detect_args(const fs::path& scene,
                                     const fs::path& out_dir) {
  return {"detect",
          "--mask", (scene / "pre_mask.png").string(),
          "--image", (scene / "post.png").string(),
          "--semantic", (scene / "post_semantic.png").string(),
          "--out", (out_dir / "report.json").string(),
          "--map", (out_dir / "map.png").string()};
}

TEST(Cli, DetectFindsTheRemovedBuilding) {
  const auto dir = testing::temp_dir("cli_detect");
  const GeneratedScene g = make_scene(dir, 6, 1, 0, 3);
  const CliRun r = run(detect_args(dir / "scene", dir));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("changed [", 0), 0u);
  EXPECT_EQ(read_mask_png(dir / "map.png"), g.pair.reference_change);
  const auto report = nlohmann::json::parse(testing::read_file(dir / "report.json"));
  EXPECT_EQ(report["changed"].size(), 1u);
  EXPECT_EQ(report["config"]["backend"], "mock");
  EXPECT_EQ(report["iterations"].size(), 7u);
}

TEST(Cli, DetectIsByteStableAcrossRunsAndJobs) {
  const auto dir = testing::temp_dir("cli_stable");
  make_scene(dir, 9, 2, 1, 4);
  std::vector<std::string> texts;
  for (const char* jobs : {"1", "1", "4"}) {
    auto args = detect_args(dir / "scene", dir);
    for (const char* extra : {"--sigma", "0.2", "--num-changed", "3",
                              "--seed", "17", "--jobs"}) {
      args.push_back(extra);
    }
    args.push_back(jobs);
    ASSERT_EQ(run(args).code, 0);
    texts.push_back(testing::read_file(dir / "report.json") +
                    testing::read_file(dir / "map.png"));
  }
  EXPECT_EQ(texts[0], texts[1]);
  EXPECT_EQ(texts[0], texts[2]);
}

TEST(Cli, ExitCodes) {
  const auto dir = testing::temp_dir("cli_codes");
  make_scene(dir, 3, 1, 0, 5);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"detect", "--bogus"}).code, 2);

  auto missing = detect_args(dir / "scene", dir);
  missing[2] = (dir / "nope.png").string();
  const CliRun m = run(missing);
  EXPECT_EQ(m.code, 2);
  EXPECT_NE(m.err.find("nope.png"), std::string::npos);

  auto no_semantic = detect_args(dir / "scene", dir);
  no_semantic.erase(no_semantic.begin() + 5, no_semantic.begin() + 7);
  EXPECT_EQ(run(no_semantic).code, 2);

  auto graph = detect_args(dir / "scene", dir);
  for (const std::string& s :
       {std::string("--backend"), std::string("onnx"),
        std::string("--model-dir"), (dir / "models").string()}) {
    graph.push_back(s);
  }
  EXPECT_EQ(run(graph).code, 3);

  auto bad_count = detect_args(dir / "scene", dir);
  bad_count.insert(bad_count.end(), {"--num-changed", "-2"});
  EXPECT_EQ(run(bad_count).code, 2);

  EXPECT_EQ(run({"synth", "--objects", "2", "--disappeared", "3", "--out",
                 (dir / "c").string()})
                .code,
            2);
  const auto empty = dir / "empty";
  fs::create_directories(empty);
  EXPECT_EQ(run({"eval", "--corpus", empty.string()}).code, 2);
}

TEST(Cli, SynthThenEval) {
  const auto dir = testing::temp_dir("cli_eval");
  const auto corpus = (dir / "corpus").string();
  ASSERT_EQ(run({"synth", "--scenes", "4", "--objects", "3", "--max-objects",
                 "7", "--seed", "2", "--out", corpus})
                .code,
            0);
  std::vector<std::string> outputs;
  for (const char* jobs : {"1", "3"}) {
    const CliRun r = run({"eval", "--corpus", corpus, "--out",
                       (dir / "metrics.json").string(), "--reports",
                       (dir / "reports").string(), "--sigma", "0.1",
                       "--jobs", jobs});
    ASSERT_EQ(r.code, 0) << r.err;
    outputs.push_back(testing::read_file(dir / "metrics.json") +
                      testing::read_file(dir / "reports" / "scene_0002.json"));
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  const auto metrics =
      nlohmann::json::parse(testing::read_file(dir / "metrics.json"));
  EXPECT_EQ(metrics["scenes"].size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "reports" / "scene_0000.png"));
}

TEST(Cli, BaselineFlagsDistractors) {
  const auto dir = testing::temp_dir("cli_rcva");
  const GeneratedScene g = make_scene(dir, 4, 1, 3, 6);
  const CliRun r = run({"baseline-rcva", "--scene", (dir / "scene").string(),
                     "--out", (dir / "rcva.png").string(), "--magnitude",
                     (dir / "mag.png").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const BinaryMask pred = read_mask_png(dir / "rcva.png");
  std::int64_t on_distractors = 0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      on_distractors += pred.at(x, y) && g.distractor_mask.at(x, y);
    }
  }
  EXPECT_GT(on_distractors, 0);
  EXPECT_TRUE(fs::exists(dir / "mag.png"));

  // Explicit images; missing --pre is an input error.
  EXPECT_EQ(run({"baseline-rcva", "--pre",
                 (dir / "scene" / "pre.png").string(), "--post",
                 (dir / "scene" / "post.png").string(), "--out",
                 (dir / "rcva2.png").string()})
                .code,
            0);
  EXPECT_EQ(testing::read_file(dir / "rcva.png"),
            testing::read_file(dir / "rcva2.png"));
  EXPECT_EQ(run({"baseline-rcva", "--post",
                 (dir / "scene" / "post.png").string()})
                .code,
            2);
  fs::remove(dir / "scene" / "pre.png");
  EXPECT_EQ(run({"baseline-rcva", "--scene", (dir / "scene").string()}).code,
            2);
}

TEST(Cli, DeriveScene) {
  const auto dir = testing::temp_dir("cli_derive");
  Grid<std::uint8_t> pre(8, 8, 0), post(8, 8, 0);
  for (int y = 1; y < 4; ++y) {
    for (int x = 1; x < 4; ++x) pre.at(x, y) = pre.at(x + 4, y + 4) = 3;
  }
  post = pre;
  for (int y = 5; y < 8; ++y) {
    for (int x = 5; x < 8; ++x) post.at(x, y) = 0;
  }
  write_gray_png(dir / "pre_labels.png", pre);
  write_gray_png(dir / "post_labels.png", post);
  write_rgb_png(dir / "post.png", RgbImage(8, 8, Rgb{1, 2, 3}));
  const CliRun r = run({"derive", "--pre-labels", (dir / "pre_labels.png").string(),
                     "--post-labels", (dir / "post_labels.png").string(),
                     "--post-image", (dir / "post.png").string(), "--class-id",
                     "3", "--out", (dir / "s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const ScenePair s = load_scene(dir / "s");
  EXPECT_EQ(s.scene_id, "s");
  EXPECT_EQ(count_foreground(s.pre_mask), 18);
  EXPECT_EQ(count_foreground(s.reference_change), 9);
  EXPECT_TRUE(s.reference_change.at(6, 6));
}

}  // namespace
}  // namespace promptcd
