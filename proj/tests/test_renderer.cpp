#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "worldact/renderer.hpp"
#include "worldact/synth.hpp"

using namespace worldact;

TEST_SUITE_BEGIN("renderer");

TEST_CASE("tile renderer matches the brute-force oracle") {
  CameraFrame cam = testutil::simple_camera(64, 64);
  for (uint64_t seed : {1u, 2u, 3u}) {
    GaussianScene scene = testutil::random_scene(150, seed);
    RenderedFrame tiled = render(scene, cam);
    RenderedFrame brute = oracle_brute_render(scene, cam);
    double worst = 0;
    for (size_t i = 0; i < tiled.color.size(); ++i)
      worst = std::max(worst, std::abs(tiled.color.data()[i] - brute.color.data()[i]));
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("weights reproduce the rendered color") {
  CameraFrame cam = testutil::simple_camera(48, 48);
  GaussianScene scene = testutil::random_scene(80, 9);
  RenderOptions opts;
  opts.background = Vec3(0.2, 0.4, 0.6);
  RenderedFrame rf = render(scene, cam, opts);

  std::vector<std::pair<int, int>> pixels;
  for (int r = 0; r < 48; r += 3)
    for (int c = 0; c < 48; c += 3) pixels.emplace_back(r, c);
  std::vector<WeightRecord> recs = render_weights(scene, cam, pixels, opts);
  REQUIRE(recs.size() == pixels.size());

  for (const auto& rec : recs) {
    Vec3 acc = Vec3::Zero();
    double wsum = 0;
    double prev_depth = -1;
    for (const auto& e : rec.entries) {
      acc += e.weight * scene.primitives[e.gaussian].color();
      wsum += e.weight;
      CHECK(e.weight > 0);
      // entries come nearest-first
      double d = cam.world_to_camera(scene.primitives[e.gaussian].center()).z();
      CHECK(d >= prev_depth - 1e-12);
      prev_depth = d;
    }
    CHECK(wsum <= 1.0 + 1e-12);
    acc += (1.0 - wsum) * opts.background;
    for (int ch = 0; ch < 3; ++ch)
      CHECK(std::abs(acc[ch] - rf.color.at(rec.row, rec.col, ch)) <= 1e-9);
  }
}

TEST_CASE("render_all_weights covers every pixel row-major") {
  CameraFrame cam = testutil::simple_camera(16, 16);
  GaussianScene scene = testutil::random_scene(10, 4);
  std::vector<WeightRecord> recs = render_all_weights(scene, cam);
  REQUIRE(recs.size() == 256);
  for (int i = 0; i < 256; ++i) {
    CHECK(recs[i].row == i / 16);
    CHECK(recs[i].col == i % 16);
  }
}

TEST_CASE("projection culls near, far and transparent splats") {
  GaussianScene scene;
  auto add = [&](const Vec3& c, double opacity) {
    scene.primitives.push_back(GaussianPrimitive::make(
        c, Vec3(0.05, 0.05, 0.05), Eigen::Quaterniond::Identity(), opacity, Vec3(1, 0, 0)));
    scene.labels.push_back(0);
  };
  RenderOptions opts;
  add(Vec3(0, 0, opts.near_plane * 0.5), 0.9);   // in front of the near plane
  add(Vec3(0, 0, 2), 0.9);                       // visible
  add(Vec3(0, 0, opts.far_plane * 2), 0.9);      // beyond far
  add(Vec3(0, 0, 3), opts.opacity_floor * 0.5);  // too dim

  CameraFrame cam = testutil::simple_camera();
  std::vector<ProjectedSplat> splats = project_scene(scene, cam, opts);
  REQUIRE(splats.size() == 1);
  CHECK(splats[0].index == 1);
}

TEST_CASE("projected splats are depth sorted with index tiebreak") {
  GaussianScene scene;
  for (double z : {3.0, 1.0, 2.0, 1.0}) {
    scene.primitives.push_back(GaussianPrimitive::make(
        Vec3(0, 0, z), Vec3(0.05, 0.05, 0.05), Eigen::Quaterniond::Identity(), 0.5,
        Vec3(1, 1, 1)));
    scene.labels.push_back(0);
  }
  auto splats = project_scene(scene, testutil::simple_camera(), RenderOptions{});
  REQUIRE(splats.size() == 4);
  CHECK(splats[0].index == 1);  // depth 1, lower index first
  CHECK(splats[1].index == 3);
  CHECK(splats[2].index == 2);
  CHECK(splats[3].index == 0);
}

TEST_CASE("splat_alpha applies the falloff cutoff and clamp") {
  GaussianScene scene;
  scene.primitives.push_back(GaussianPrimitive::make(
      Vec3(0, 0, 2), Vec3(0.2, 0.2, 0.2), Eigen::Quaterniond::Identity(), 0.9999,
      Vec3(1, 1, 1)));
  scene.labels.push_back(0);
  RenderOptions opts;
  auto splats = project_scene(scene, testutil::simple_camera(), opts);
  REQUIRE(splats.size() == 1);
  const ProjectedSplat& s = splats[0];
  double at_center = splat_alpha(s, s.mean.x(), s.mean.y(), opts);
  CHECK(at_center <= opts.alpha_clamp);
  CHECK(at_center > 0.9);
  // beyond the 3-sigma radius the response is exactly zero
  CHECK(splat_alpha(s, s.mean.x() + 2 * s.radius + 1, s.mean.y(), opts) == 0.0);
}

TEST_CASE("alpha channel accumulates and bounds at one") {
  CameraFrame cam = testutil::simple_camera(32, 32);
  GaussianScene scene = testutil::random_scene(60, 13);
  RenderedFrame rf = render(scene, cam);
  for (size_t i = 0; i < rf.alpha.size(); ++i) {
    CHECK(rf.alpha.data()[i] >= 0.0);
    CHECK(rf.alpha.data()[i] <= 1.0 + 1e-12);
  }
}

TEST_CASE("background shows through empty pixels") {
  GaussianScene scene;
  scene.primitives.push_back(GaussianPrimitive::make(
      Vec3(0, 0, 2), Vec3(0.01, 0.01, 0.01), Eigen::Quaterniond::Identity(), 0.9,
      Vec3(1, 1, 1)));
  scene.labels.push_back(0);
  RenderOptions opts;
  opts.background = Vec3(0.1, 0.2, 0.3);
  RenderedFrame rf = render(scene, testutil::simple_camera(), opts);
  CHECK(rf.color.at(0, 0, 0) == doctest::Approx(0.1));
  CHECK(rf.color.at(0, 0, 1) == doctest::Approx(0.2));
  CHECK(rf.color.at(0, 0, 2) == doctest::Approx(0.3));
  CHECK(rf.alpha.at(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("soft mask is the weight-space dot product with the scores") {
  CameraFrame cam = testutil::simple_camera(24, 24);
  GaussianScene scene = testutil::random_scene(30, 21);
  std::vector<double> scores(scene.size());
  for (size_t i = 0; i < scores.size(); ++i) scores[i] = (i % 5) / 4.0;

  ImageF sm = render_soft_mask(scene, scores, cam);
  std::vector<WeightRecord> recs = render_all_weights(scene, cam);
  for (const auto& rec : recs) {
    double expect = 0;
    for (const auto& e : rec.entries) expect += e.weight * scores[e.gaussian];
    CHECK(sm.at(rec.row, rec.col) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("silhouette of the full scene equals all-ones soft mask") {
  CameraFrame cam = testutil::simple_camera(24, 24);
  GaussianScene scene = testutil::random_scene(25, 3);
  ImageF sil = render_silhouette(scene, cam);
  ImageF sm = render_soft_mask(scene, std::vector<double>(scene.size(), 1.0), cam);
  for (size_t i = 0; i < sil.size(); ++i)
    CHECK(sil.data()[i] == doctest::Approx(sm.data()[i]).epsilon(1e-12));
}

TEST_CASE("in-context silhouette is dimmed by occluders") {
  GaussianScene scene;
  auto add = [&](double z, double opacity) {
    scene.primitives.push_back(GaussianPrimitive::make(
        Vec3(0, 0, z), Vec3(0.3, 0.3, 0.3), Eigen::Quaterniond::Identity(), opacity,
        Vec3(1, 1, 1)));
    scene.labels.push_back(0);
  };
  add(1.5, 0.8);  // occluder
  add(3.0, 0.9);  // target behind it
  CameraFrame cam = testutil::simple_camera(32, 32);

  std::vector<uint8_t> sel = {0, 1};
  ImageF in_ctx = render_silhouette_in_context(scene, sel, cam);
  GaussianScene alone;
  alone.primitives.push_back(scene.primitives[1]);
  alone.labels.push_back(0);
  ImageF solo = render_silhouette(alone, cam);
  // the occluder eats transmittance in context
  CHECK(in_ctx.at(16, 16) < solo.at(16, 16) - 0.1);
}

TEST_SUITE_END();
