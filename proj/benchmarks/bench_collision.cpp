#include <benchmark/benchmark.h>

#include "worldact/collision.hpp"
#include "worldact/synth.hpp"

using namespace worldact;

namespace {

const GaussianScene& bg() {
  static GaussianScene s = subset_by_label(generate(default_room_spec()).scene, 0);
  return s;
}

void BM_SamplePoints(benchmark::State& state) {
  SampleConfig cfg;
  cfg.seed = 7;
  for (auto _ : state) {
    PointCloud pts = sample_points(bg(), 10000, cfg);
    benchmark::DoNotOptimize(pts.data());
  }
}
BENCHMARK(BM_SamplePoints)->Unit(benchmark::kMillisecond);

void BM_ReconstructSurface(benchmark::State& state) {
  SampleConfig scfg;
  scfg.seed = 7;
  PointCloud pts = sample_points(bg(), 10000, scfg);
  SurfaceConfig cfg;
  cfg.grid_resolution = static_cast<int>(state.range(0));
  for (auto _ : state) {
    CollisionMesh mesh = reconstruct_surface(pts, cfg);
    benchmark::DoNotOptimize(mesh.vertices.data());
  }
}
BENCHMARK(BM_ReconstructSurface)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DetectPlanes(benchmark::State& state) {
  SampleConfig scfg;
  scfg.seed = 7;
  PointCloud pts = sample_points(bg(), 10000, scfg);
  RansacConfig cfg;
  cfg.seed = 7;
  for (auto _ : state) {
    auto planes = detect_planes(pts, cfg);
    benchmark::DoNotOptimize(planes.data());
  }
}
BENCHMARK(BM_DetectPlanes)->Unit(benchmark::kMillisecond);

}  // namespace
