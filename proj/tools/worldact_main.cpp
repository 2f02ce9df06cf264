// worldact: batch conversion of a Gaussian-splat scene into an
// interaction-ready decomposition (objects, completed background, collision
// proxy, posed assets), stage by stage or as one pipeline run.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "worldact/errors.hpp"
#include "worldact/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitData = 4;

struct CommonFlags {
  std::string config;
  std::string out;
  std::string scene;
  std::string trajectory;
  std::string spec;
  int64_t seed = -1;
  bool resume = false;
  std::vector<std::string> backend_overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Pipeline config JSON");
  cmd->add_option("--out", flags.out, "Output directory (overrides config)");
  cmd->add_option("--scene", flags.scene, "Input scene PLY (overrides config)");
  cmd->add_option("--trajectory", flags.trajectory, "Camera trajectory JSON (overrides config)");
  cmd->add_option("--spec", flags.spec, "Synthetic scene spec JSON (overrides config)");
  cmd->add_option("--seed", flags.seed, "Seed (overrides config)");
  cmd->add_option("--backend", flags.backend_overrides,
                  "Backend override, name=mock|url (repeatable)");
}

worldact::PipelineConfig build_config(const CommonFlags& flags) {
  worldact::PipelineConfig cfg;
  if (!flags.config.empty()) cfg = worldact::load_pipeline_config(flags.config);
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (!flags.scene.empty()) cfg.scene_path = flags.scene;
  if (!flags.trajectory.empty()) cfg.trajectory_path = flags.trajectory;
  if (!flags.spec.empty()) cfg.synth_spec_path = flags.spec;
  if (flags.seed >= 0) cfg.seed = static_cast<uint64_t>(flags.seed);
  for (const auto& ov : flags.backend_overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw worldact::ConfigError("--backend expects name=mock|url, got '" + ov + "'");
    std::string name = ov.substr(0, eq), value = ov.substr(eq + 1);
    worldact::BackendChoice choice;
    if (value != "mock") {
      choice.kind = "http";
      choice.url = value;
    }
    cfg.backends[name] = choice;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-splat scene decomposition pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic room scene");
  auto* render = app.add_subcommand("render", "Render a scene along a trajectory");
  auto* decompose = app.add_subcommand("decompose", "Discover and segment objects");
  auto* restore = app.add_subcommand("restore", "Complete the background and build collision");
  auto* assemble = app.add_subcommand("assemble", "Generate assets and place them");
  auto* pipeline = app.add_subcommand("pipeline", "Run all stages in order");
  for (auto* cmd : {synth, render, decompose, restore, assemble, pipeline}) add_common(cmd, flags);
  pipeline->add_flag("--resume", flags.resume, "Skip stages with an existing manifest");

  CLI11_PARSE(app, argc, argv);

  try {
    worldact::PipelineConfig cfg = build_config(flags);
    if (synth->parsed()) {
      worldact::run_synth_stage(cfg);
    } else if (render->parsed()) {
      worldact::run_render_stage(cfg);
    } else if (pipeline->parsed()) {
      worldact::run_pipeline(cfg, flags.resume);
    } else {
      worldact::Backends backends = worldact::resolve_backends(cfg);
      if (decompose->parsed()) worldact::run_decompose_stage(cfg, backends);
      if (restore->parsed()) worldact::run_restore_stage(cfg, backends);
      if (assemble->parsed()) worldact::run_assemble_stage(cfg, backends);
    }
  } catch (const worldact::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const worldact::ArgumentError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const worldact::TransportError& e) {
    std::fprintf(stderr, "backend error: %s\n", e.what());
    return kExitBackend;
  } catch (const worldact::ProtocolError& e) {
    std::fprintf(stderr, "backend error: %s\nraw payload:\n%s\n", e.what(),
                 e.raw_payload.c_str());
    return kExitBackend;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
