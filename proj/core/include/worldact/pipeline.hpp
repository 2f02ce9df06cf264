#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "worldact/agent.hpp"
#include "worldact/assembler.hpp"
#include "worldact/backends.hpp"
#include "worldact/collision.hpp"
#include "worldact/restorer.hpp"
#include "worldact/segmenter.hpp"
#include "worldact/synth.hpp"

namespace worldact {

struct BackendChoice {
  std::string kind = "mock";  // mock | http
  std::string url;
};

/// File-captured run configuration; every field has a default so a minimal
/// config only names its inputs.
struct PipelineConfig {
  std::filesystem::path scene_path;
  std::filesystem::path trajectory_path;
  std::filesystem::path synth_spec_path;  // feeds cmd_synth and the mocks
  std::filesystem::path out_dir = "out";
  uint64_t seed = 1;

  std::map<std::string, BackendChoice> backends;  // vlm segmenter inpaint depth asset embed
  HttpOptions http;

  AgentConfig agent;
  SegmentationConfig seg;
  RestoreConfig restore;

  size_t sample_count = 20000;
  SampleConfig sample;
  SurfaceConfig surface;
  RansacConfig ransac;
  PlanarizeConfig planarize;
  size_t simplify_target = 3000;
  SimplifyConfig simplify;

  AssetConfig asset;
  AlignConfig align;

  void validate() const;  // throws ConfigError
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string pipeline_config_json(const PipelineConfig& cfg);  // snapshot for run.json

/// Instantiates the configured clients; `mock` backends are wired to the
/// regenerated synthetic ground truth of cfg.synth_spec_path.
Backends resolve_backends(const PipelineConfig& cfg);

// Stage entry points. Each writes <stage>.manifest.json under cfg.out_dir and
// reads its inputs from the previous stage's manifest.
void run_synth_stage(const PipelineConfig& cfg);
void run_render_stage(const PipelineConfig& cfg);
void run_decompose_stage(const PipelineConfig& cfg, const Backends& backends);
void run_restore_stage(const PipelineConfig& cfg, const Backends& backends);
void run_assemble_stage(const PipelineConfig& cfg, const Backends& backends);

/// Chains synth (when a spec is given and no scene exists), decompose,
/// restore, assemble; writes run.json with the config snapshot, seeds and
/// per-stage timings. With resume = true, completed stages are skipped.
void run_pipeline(const PipelineConfig& cfg, bool resume = false);

}  // namespace worldact
