#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "worldact/errors.hpp"
#include "worldact/segmenter.hpp"
#include "worldact/synth.hpp"

using namespace worldact;

namespace {

// Two separated clusters in front of the identity camera; the left one is the
// "object". Returns the scene and the ground-truth member flags.
std::pair<GaussianScene, std::vector<uint8_t>> two_cluster_scene(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  GaussianScene scene;
  std::vector<uint8_t> member;
  for (int i = 0; i < 24; ++i) {
    bool left = i % 2 == 0;
    Vec3 c((left ? -0.6 : 0.6) + 0.25 * (u(rng) - 0.5), 0.5 * (u(rng) - 0.5), 2.5 + u(rng));
    scene.primitives.push_back(GaussianPrimitive::make(
        c, Vec3(0.08, 0.08, 0.08), Eigen::Quaterniond::Identity(), 0.9,
        Vec3(u(rng), u(rng), u(rng))));
    scene.labels.push_back(0);
    member.push_back(left ? 1 : 0);
  }
  return {scene, member};
}

MaskStack stack_from_members(const GaussianScene& scene, const std::vector<uint8_t>& member,
                             const Trajectory& cams, int object_id) {
  MaskStack ms;
  ms.object_id = object_id;
  for (const auto& cam : cams.frames) {
    Mask m = threshold_mask(render_silhouette_in_context(scene, member, cam), 0.25);
    if (mask_area(m) > 0) ms.masks[cam.frame_index] = m;
  }
  return ms;
}

}  // namespace

TEST_SUITE_BEGIN("segmenter");

TEST_CASE("analytic gradient matches central differences") {
  auto [scene, member] = two_cluster_scene(7);
  Trajectory cams;
  cams.frames.push_back(testutil::simple_camera(48, 48, 0));
  MaskStack masks = stack_from_members(scene, member, cams, 1);

  SegmentationConfig cfg;
  cfg.ray_sample_count = 0;  // deterministic: full ray set
  WeightCache cache = WeightCache::build(scene, cams, masks.view_set());

  std::vector<double> grad = seg_loss_gradient(scene, masks, cams, cfg, &cache);
  AssignmentField f;
  f.scores.assign(scene.size(), 0.37);

  double worst_rel = 0;
  const double h = 1e-5;
  for (size_t i = 0; i < scene.size(); ++i) {
    AssignmentField fp = f, fm = f;
    fp.scores[i] += h;
    fm.scores[i] -= h;
    double fd = (seg_loss(scene, fp, masks, cams, cfg, &cache) -
                 seg_loss(scene, fm, masks, cams, cfg, &cache)) /
                (2 * h);
    double scale = std::max({std::abs(grad[i]), std::abs(fd), 1e-8});
    worst_rel = std::max(worst_rel, std::abs(grad[i] - fd) / scale);
  }
  CHECK(worst_rel <= 1e-5);
}

TEST_CASE("loss is linear in the scores") {
  auto [scene, member] = two_cluster_scene(3);
  Trajectory cams;
  cams.frames.push_back(testutil::simple_camera(32, 32, 0));
  MaskStack masks = stack_from_members(scene, member, cams, 1);

  SegmentationConfig cfg;
  cfg.ray_sample_count = 0;
  AssignmentField a, b, mid;
  a.scores.assign(scene.size(), 0.1);
  b.scores.assign(scene.size(), 0.9);
  mid.scores.assign(scene.size(), 0.5);
  double la = seg_loss(scene, a, masks, cams, cfg);
  double lb = seg_loss(scene, b, masks, cams, cfg);
  double lm = seg_loss(scene, mid, masks, cams, cfg);
  CHECK(lm == doctest::Approx(0.5 * (la + lb)).epsilon(1e-10));
}

TEST_CASE("optimizer separates two clusters") {
  auto [scene, member] = two_cluster_scene(11);
  Trajectory cams;
  for (int i = 0; i < 2; ++i) {
    CameraFrame cam = testutil::simple_camera(48, 48, i);
    cam.rotation = Eigen::AngleAxisd(0.25 * i, Vec3::UnitY()).toRotationMatrix();
    cam.translation = -cam.rotation * Vec3(0.4 * i, 0, 0);
    cams.frames.push_back(cam);
  }
  MaskStack masks = stack_from_members(scene, member, cams, 1);

  SegmentationConfig cfg;
  cfg.seed = 1;
  AssignmentField f = optimize_assignment(scene, masks, cams, cfg);
  std::vector<uint8_t> z = binarize(f, cfg.tau);
  REQUIRE(z.size() == scene.size());
  CHECK(z == member);
}

TEST_CASE("binarize is strict at tau") {
  AssignmentField f;
  f.scores = {0.49, 0.5, 0.51};
  std::vector<uint8_t> z = binarize(f, 0.5);
  CHECK(z == std::vector<uint8_t>{0, 0, 1});
}

TEST_CASE("assign_objects builds a disjoint partition with argmax ties to no object") {
  GaussianScene scene = testutil::random_scene(6, 2);
  AssignmentField f1, f2;
  f1.object_id = 1;
  f2.object_id = 2;
  f1.scores = {0.9, 0.2, 0.8, 0.4, 0.6, 0.3};
  f2.scores = {0.3, 0.9, 0.9, 0.4, 0.55, 0.2};
  SegmentationConfig cfg;  // tau = 0.5 strict
  GaussianScene out = assign_objects(scene, {f1, f2}, cfg);
  CHECK(out.labels == std::vector<int>{1, 2, 2, 0, 1, 0});
}

TEST_CASE("weight cache reproduces uncached losses") {
  auto [scene, member] = two_cluster_scene(19);
  Trajectory cams;
  cams.frames.push_back(testutil::simple_camera(32, 32, 0));
  MaskStack masks = stack_from_members(scene, member, cams, 1);
  SegmentationConfig cfg;
  cfg.ray_sample_count = 0;
  WeightCache cache = WeightCache::build(scene, cams, masks.view_set());
  AssignmentField f;
  f.scores.assign(scene.size(), 0.6);
  CHECK(seg_loss(scene, f, masks, cams, cfg, &cache) ==
        doctest::Approx(seg_loss(scene, f, masks, cams, cfg)).epsilon(1e-12));
}

TEST_CASE("mask stack validation rejects unknown frames and bad shapes") {
  Trajectory cams;
  cams.frames.push_back(testutil::simple_camera(32, 32, 0));
  MaskStack ms;
  ms.object_id = 1;
  ms.masks[5] = Mask(32, 32, 1);  // frame 5 not in the trajectory
  CHECK_THROWS_AS(ms.validate(cams), ArgumentError);

  MaskStack bad;
  bad.object_id = 1;
  bad.masks[0] = Mask(16, 16, 1);  // wrong shape for the 32x32 camera
  CHECK_THROWS_AS(bad.validate(cams), ArgumentError);
}

TEST_CASE("config validation") {
  SegmentationConfig cfg;
  cfg.tau = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = SegmentationConfig{};
  cfg.step_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_SUITE_END();
