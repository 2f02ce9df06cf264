#include <benchmark/benchmark.h>

#include "worldact/renderer.hpp"
#include "worldact/synth.hpp"

using namespace worldact;

namespace {

const SynthResult& room() {
  static SynthResult r = generate(default_room_spec());
  return r;
}

void BM_RenderFrame(benchmark::State& state) {
  const auto& truth = room();
  const CameraFrame& cam = truth.trajectory.frames.front();
  for (auto _ : state) {
    RenderedFrame f = render(truth.scene, cam);
    benchmark::DoNotOptimize(f.color.data());
  }
}
BENCHMARK(BM_RenderFrame)->Unit(benchmark::kMillisecond);

void BM_RenderAllWeights(benchmark::State& state) {
  const auto& truth = room();
  const CameraFrame& cam = truth.trajectory.frames.front();
  for (auto _ : state) {
    auto w = render_all_weights(truth.scene, cam);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_RenderAllWeights)->Unit(benchmark::kMillisecond);

void BM_ProjectScene(benchmark::State& state) {
  const auto& truth = room();
  const CameraFrame& cam = truth.trajectory.frames.front();
  RenderOptions opts;
  for (auto _ : state) {
    auto splats = project_scene(truth.scene, cam, opts);
    benchmark::DoNotOptimize(splats.data());
  }
}
BENCHMARK(BM_ProjectScene)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
