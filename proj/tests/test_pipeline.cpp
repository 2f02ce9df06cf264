#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nlohmann/json.hpp"
#include "worldact/errors.hpp"
#include "worldact/pipeline.hpp"

using namespace worldact;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("config validation catches the obvious mistakes") {
  PipelineConfig cfg;
  cfg.out_dir.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = PipelineConfig{};
  cfg.backends["vlm"] = {"carrier-pigeon", ""};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = PipelineConfig{};
  cfg.backends["depth"] = {"http", ""};  // http needs a url
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = PipelineConfig{};
  cfg.simplify_target = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = PipelineConfig{};
  cfg.seg.tau = -0.5;  // nested validators keep their own error type
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);

  CHECK_NOTHROW(PipelineConfig{}.validate());
}

TEST_CASE("config files load with overrides applied and defaults elsewhere") {
  testutil::TempDir dir("cfg");
  fs::path path = dir.path / "cfg.json";
  write_text(path, R"({
    "out": "runs/a",
    "seed": 42,
    "backends": {"vlm": "mock", "segmenter": "http://seg.local:9000"},
    "http": {"timeout_s": 7, "retries": 5},
    "segmentation": {"lambda": 0.25, "max_iters": 123},
    "collision": {"sample_count": 5000, "simplify_target": 800},
    "align": {"candidate_yaws": 4, "scale_max": 9.0}
  })");

  PipelineConfig cfg = load_pipeline_config(path);
  CHECK(cfg.out_dir == "runs/a");
  CHECK(cfg.seed == 42);
  CHECK(cfg.backends.at("vlm").kind == "mock");
  CHECK(cfg.backends.at("segmenter").kind == "http");
  CHECK(cfg.backends.at("segmenter").url == "http://seg.local:9000");
  CHECK(cfg.http.timeout_s == 7);
  CHECK(cfg.http.retries == 5);
  CHECK(cfg.seg.lambda == doctest::Approx(0.25));
  CHECK(cfg.seg.max_iters == 123);
  CHECK(cfg.sample_count == 5000);
  CHECK(cfg.simplify_target == 800);
  CHECK(cfg.align.candidate_yaws == 4);
  CHECK(cfg.align.scale_max == doctest::Approx(9.0));
  // untouched fields keep their defaults
  PipelineConfig def;
  CHECK(cfg.agent.dedup_iou == def.agent.dedup_iou);
  CHECK(cfg.restore.keyframe_stride == def.restore.keyframe_stride);
}

TEST_CASE("config snapshot round trips through load_pipeline_config") {
  PipelineConfig cfg;
  cfg.out_dir = "runs/b";
  cfg.seed = 7;
  cfg.backends["inpaint"] = {"http", "http://paint.local"};
  cfg.seg.tau = 0.6;
  cfg.simplify_target = 1234;

  testutil::TempDir dir("cfg");
  fs::path path = dir.path / "snapshot.json";
  write_text(path, pipeline_config_json(cfg));
  PipelineConfig back = load_pipeline_config(path);
  CHECK(pipeline_config_json(back) == pipeline_config_json(cfg));
}

TEST_CASE("bad or missing config files raise ConfigError") {
  testutil::TempDir dir("cfg");
  CHECK_THROWS_AS(load_pipeline_config(dir.path / "nope.json"), ConfigError);
  fs::path bad = dir.path / "bad.json";
  write_text(bad, "{ definitely not json");
  CHECK_THROWS_AS(load_pipeline_config(bad), ConfigError);
  fs::path invalid = dir.path / "invalid.json";
  write_text(invalid, R"({"out": "x", "collision": {"simplify_target": 2}})");
  CHECK_THROWS_AS(load_pipeline_config(invalid), ConfigError);
}

TEST_CASE("synth and render stages write their manifests and outputs") {
  testutil::TempDir dir("stage");
  SynthSpec spec = default_room_spec();
  spec.trajectory.frame_count = 3;
  fs::path spec_path = dir.path / "spec.json";
  save_synth_spec(spec, spec_path);

  PipelineConfig cfg;
  cfg.out_dir = dir.path / "run";
  cfg.synth_spec_path = spec_path;
  run_synth_stage(cfg);

  CHECK(fs::exists(cfg.out_dir / "synth.manifest.json"));
  CHECK(fs::exists(cfg.out_dir / "synth" / "scene.ply"));
  CHECK(fs::exists(cfg.out_dir / "synth" / "trajectory.json"));
  CHECK(fs::exists(cfg.out_dir / "synth" / "spec.json"));
  CHECK(fs::exists(cfg.out_dir / "synth" / "truth.json"));

  run_render_stage(cfg);
  std::ifstream in(cfg.out_dir / "render.manifest.json");
  nlohmann::json man;
  in >> man;
  REQUIRE(man.at("frames").size() == 3);
  for (const auto& f : man.at("frames"))
    CHECK(fs::exists(cfg.out_dir / f.get<std::string>()));
}

TEST_CASE("stages refuse to run without their inputs") {
  testutil::TempDir dir("stage");
  PipelineConfig cfg;
  cfg.out_dir = dir.path / "empty";
  fs::create_directories(cfg.out_dir);
  CHECK_THROWS_AS(run_render_stage(cfg), ConfigError);  // no scene anywhere
}

#ifdef WORLDACT_CLI_PATH
TEST_CASE("cli maps error categories to exit codes") {
  testutil::TempDir dir("cli");
  std::string cli = WORLDACT_CLI_PATH;
  auto run = [&](const std::string& args) {
    std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  // config errors -> 2
  fs::path bad = dir.path / "bad.json";
  write_text(bad, "{ not json");
  CHECK(run("synth --config " + bad.string()) == 2);
  CHECK(run("render --out " + (dir.path / "nothing").string()) == 2);

  // a tiny synth + render round through the CLI succeeds
  SynthSpec spec = default_room_spec();
  spec.trajectory.frame_count = 2;
  fs::path spec_path = dir.path / "spec.json";
  save_synth_spec(spec, spec_path);
  fs::path out = dir.path / "run";
  CHECK(run("synth --spec " + spec_path.string() + " --out " + out.string()) == 0);
  CHECK(run("render --out " + out.string()) == 0);
  CHECK(fs::exists(out / "render.manifest.json"));

  // unreachable backend -> 3 (transport)
  CHECK(run("decompose --out " + out.string() +
            " --backend vlm=http://127.0.0.1:1"
            " --backend segmenter=http://127.0.0.1:1") == 3);
}
#endif

TEST_SUITE_END();
