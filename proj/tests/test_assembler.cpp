#include <memory>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "worldact/assembler.hpp"
#include "worldact/backends.hpp"
#include "worldact/errors.hpp"
#include "worldact/renderer.hpp"
#include "worldact/synth.hpp"

using namespace worldact;

namespace {

// Unit cube mesh centered at the origin (canonical-asset stand-in).
CollisionMesh unit_cube() {
  CollisionMesh m;
  const double h = 0.5;
  for (int x : {-1, 1})
    for (int y : {-1, 1})
      for (int z : {-1, 1}) m.vertices.push_back(Vec3(x * h, y * h, z * h));
  auto quad = [&](int a, int b, int c, int d) {
    m.faces.push_back({a, b, c});
    m.faces.push_back({a, c, d});
  };
  quad(0, 1, 3, 2);
  quad(4, 6, 7, 5);
  quad(0, 4, 5, 1);
  quad(2, 3, 7, 6);
  quad(0, 2, 6, 4);
  quad(1, 5, 7, 3);
  return m;
}

std::vector<Vec3> box_points(const Vec3& half, int per_face, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> pts;
  for (int axis = 0; axis < 3; ++axis)
    for (int side = -1; side <= 1; side += 2)
      for (int i = 0; i < per_face; ++i) {
        Vec3 p(u(rng) * half.x(), u(rng) * half.y(), u(rng) * half.z());
        p[axis] = side * half[axis];
        pts.push_back(p);
      }
  return pts;
}

}  // namespace

TEST_SUITE_BEGIN("assembler");

TEST_CASE("r6 rotation parameterization round trips") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 20; ++i) {
    Eigen::Quaterniond q(u(rng), u(rng), u(rng), u(rng));
    if (q.norm() < 1e-3) continue;
    q.normalize();
    Mat3 r = q.toRotationMatrix();
    CHECK(r6_to_rotation(rotation_to_r6(r)).isApprox(r, 1e-12));
  }
  Vec6 zero = Vec6::Zero();
  CHECK_THROWS_AS(r6_to_rotation(zero), ArgumentError);
  Vec6 parallel;
  parallel << 1, 0, 0, 2, 0, 0;
  CHECK_THROWS_AS(r6_to_rotation(parallel), ArgumentError);
}

TEST_CASE("r6 is gram-schmidt: non-orthogonal inputs still give rotations") {
  Vec6 skew;
  skew << 1, 0.2, -0.1, 0.3, 1, 0.4;
  Mat3 r = r6_to_rotation(skew);
  CHECK((r * r.transpose()).isApprox(Mat3::Identity(), 1e-12));
  CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transform_gaussians moves centers and composes rotations") {
  GaussianScene scene = testutil::random_scene(8, 6);
  PlacementPose pose;
  pose.translation = Vec3(1, -2, 0.5);
  pose.scale = 2.0;
  pose.r6 = rotation_to_r6(
      Eigen::AngleAxisd(0.4, Vec3(0, 1, 0)).toRotationMatrix());

  GaussianScene out = transform_gaussians(scene, pose, 7);
  REQUIRE(out.size() == scene.size());
  Mat3 r = pose.rotation();
  for (size_t i = 0; i < scene.size(); ++i) {
    Vec3 expect = pose.scale * (r * scene.primitives[i].center()) + pose.translation;
    CHECK(out.primitives[i].center().isApprox(expect, 1e-6));
    CHECK(out.primitives[i].scale().isApprox(scene.primitives[i].scale() * pose.scale, 1e-5));
    CHECK(out.labels[i] == 7);
  }
}

TEST_CASE("icp recovers a known similarity transform") {
  std::vector<Vec3> src = box_points(Vec3(0.5, 0.3, 0.15), 60, 2);
  Eigen::AlignedBox3d bb;
  for (const auto& p : src) bb.extend(p);
  double diag = bb.diagonal().norm();

  Mat3 r = Eigen::AngleAxisd(2.1, Vec3::UnitY()).toRotationMatrix();
  double s = 1.4;
  Vec3 t(0.3, -0.2, 0.5);
  std::vector<Vec3> dst;
  for (const auto& p : src) dst.push_back(s * (r * p) + t);

  AlignConfig cfg;
  cfg.seed = 1;
  std::vector<IcpCandidate> cands = icp_candidates(src, dst, cfg);
  REQUIRE(!cands.empty());
  REQUIRE(cands.size() == static_cast<size_t>(cfg.candidate_yaws * 2));
  // sorted ascending by residual
  for (size_t i = 1; i < cands.size(); ++i) CHECK(cands[i].residual >= cands[i - 1].residual);

  const IcpCandidate& best = cands.front();
  Mat3 rr = best.pose.rotation();
  double ang = std::acos(std::clamp(((rr.transpose() * r).trace() - 1) / 2, -1.0, 1.0));
  CHECK(ang * 180 / std::numbers::pi < 0.5);
  CHECK((best.pose.translation - t).norm() / diag < 0.005);
  CHECK(std::abs(best.pose.scale - s) / s < 0.01);
}

TEST_CASE("icp rejects degenerate inputs") {
  AlignConfig cfg;
  CHECK_THROWS_AS(icp_candidates({Vec3::Zero()}, {Vec3::Zero(), Vec3::Ones(), Vec3::UnitX()}, cfg),
                  GeometryError);
  std::vector<Vec3> flat(5, Vec3(1, 1, 1));  // zero diagonal
  CHECK_THROWS_AS(icp_candidates(flat, flat, cfg), GeometryError);
}

TEST_CASE("align_loss penetration and contact behave as hinges") {
  ObjectAsset asset;
  asset.mesh = unit_cube();
  asset.gaussians.primitives.push_back(GaussianPrimitive::make(
      Vec3::Zero(), Vec3(0.2, 0.2, 0.2), Eigen::Quaterniond::Identity(), 0.9, Vec3(1, 0, 0)));
  asset.gaussians.labels.push_back(0);

  // background solid: a big cube whose top face is y = 0
  CollisionMesh ground = unit_cube();
  for (auto& v : ground.vertices) {
    v *= 4.0;
    v.y() -= 2.0;
  }
  MeshSdf sdf(ground);
  std::optional<PlaneParam> floor = PlaneParam{Vec3::UnitY(), 0.0, FaceClass::Floor};

  Trajectory cams;
  CameraFrame cam = testutil::simple_camera(48, 48, 0);
  cam.rotation = Mat3::Identity();
  cam.translation = Vec3(0, -0.8, 3.0);  // look at the cube from z = -3, slightly above
  cams.frames.push_back(cam);

  AlignConfig cfg;
  PlacementPose resting;
  resting.translation = Vec3(0, 0.5, 0);  // cube sits exactly on the floor

  MaskStack target;
  target.object_id = 1;
  target.masks[0] = threshold_mask(
      render_silhouette(transform_gaussians(asset.gaussians, resting), cam), 0.5);

  AlignComponents rest_c;
  align_loss(resting, asset, sdf, floor, target, cams, cfg, &rest_c);
  CHECK(rest_c.penetration == doctest::Approx(0.0));
  CHECK(rest_c.contact < 1e-6);
  CHECK(!rest_c.contact_skipped);

  PlacementPose floating = resting;
  floating.translation.y() += 0.4;
  AlignComponents float_c;
  align_loss(floating, asset, sdf, floor, target, cams, cfg, &float_c);
  CHECK(float_c.contact > 0.1 * 0.1);  // gap squared
  CHECK(float_c.penetration == doctest::Approx(0.0));

  PlacementPose sunk = resting;
  sunk.translation.y() -= 0.3;
  AlignComponents sunk_c;
  align_loss(sunk, asset, sdf, floor, target, cams, cfg, &sunk_c);
  CHECK(sunk_c.penetration > 0.0);

  AlignComponents no_floor_c;
  align_loss(resting, asset, sdf, std::nullopt, target, cams, cfg, &no_floor_c);
  CHECK(no_floor_c.contact_skipped);
  CHECK(no_floor_c.contact == doctest::Approx(0.0));
}

TEST_CASE("refine_pose descends monotonically and repairs a small offset") {
  ObjectAsset asset;
  asset.mesh = unit_cube();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 40; ++i) {
    Vec3 c(u(rng), u(rng), u(rng));
    int axis = i % 3;
    c[axis] = (i % 2) ? 0.5 : -0.5;
    asset.gaussians.primitives.push_back(GaussianPrimitive::make(
        c, Vec3(0.08, 0.08, 0.08), Eigen::Quaterniond::Identity(), 0.9, Vec3(0.8, 0.3, 0.2)));
    asset.gaussians.labels.push_back(0);
  }

  CollisionMesh ground = unit_cube();
  for (auto& v : ground.vertices) {
    v *= 6.0;
    v.y() -= 3.0;
  }
  MeshSdf sdf(ground);
  std::optional<PlaneParam> floor = PlaneParam{Vec3::UnitY(), 0.0, FaceClass::Floor};

  Trajectory cams;
  for (int i = 0; i < 2; ++i) {
    CameraFrame cam = testutil::simple_camera(48, 48, i);
    double a = 0.5 * i;
    Vec3 origin(3 * std::sin(a), 1.2, -3 * std::cos(a));
    Vec3 fwd = (Vec3(0, 0.5, 0) - origin).normalized();
    Vec3 right = Vec3::UnitY().cross(fwd).normalized();
    Vec3 down = fwd.cross(right);
    Mat3 r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = fwd.transpose();
    cam.rotation = r;
    cam.translation = -r * origin;
    cams.frames.push_back(cam);
  }

  PlacementPose truth_pose;
  truth_pose.translation = Vec3(0, 0.5, 0);
  MaskStack target;
  target.object_id = 1;
  for (const auto& cam : cams.frames) {
    Mask m = threshold_mask(
        render_silhouette(transform_gaussians(asset.gaussians, truth_pose), cam), 0.5);
    if (mask_area(m) > 0) target.masks[cam.frame_index] = m;
  }
  REQUIRE(!target.masks.empty());

  AlignConfig cfg;
  cfg.refine_max_iters = 40;
  PlacementPose init = truth_pose;
  init.translation += Vec3(0.03, 0.02, -0.03);
  init.scale = 1.04;

  std::vector<double> trace;
  AlignComponents comp;
  PlacementPose out = refine_pose(init, asset, sdf, floor, target, cams, cfg, &comp, &trace);

  REQUIRE(trace.size() >= 2);
  for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
  double init_loss = align_loss(init, asset, sdf, floor, target, cams, cfg);
  double out_loss = align_loss(out, asset, sdf, floor, target, cams, cfg);
  CHECK(out_loss <= init_loss);
  CHECK((out.translation - truth_pose.translation).norm() <
        (init.translation - truth_pose.translation).norm());
}

TEST_CASE("fd gradient is self-consistent across step sizes") {
  ObjectAsset asset;
  asset.mesh = unit_cube();
  asset.gaussians.primitives.push_back(GaussianPrimitive::make(
      Vec3::Zero(), Vec3(0.25, 0.25, 0.25), Eigen::Quaterniond::Identity(), 0.9,
      Vec3(1, 1, 1)));
  asset.gaussians.labels.push_back(0);

  CollisionMesh ground = unit_cube();
  for (auto& v : ground.vertices) {
    v *= 4.0;
    v.y() -= 2.0;
  }
  MeshSdf sdf(ground);
  std::optional<PlaneParam> floor = PlaneParam{Vec3::UnitY(), 0.0, FaceClass::Floor};

  Trajectory cams;
  CameraFrame cam = testutil::simple_camera(32, 32, 0);
  cam.translation = Vec3(0, -0.6, 2.5);
  cams.frames.push_back(cam);

  PlacementPose pose;
  pose.translation = Vec3(0.05, 0.62, 0.02);
  MaskStack target;
  target.object_id = 1;
  target.masks[0] =
      threshold_mask(render_silhouette(transform_gaussians(asset.gaussians, pose), cam), 0.4);

  AlignConfig cfg;
  auto g1 = align_loss_gradient(pose, asset, sdf, floor, target, cams, cfg, 1e-5);
  auto g2 = align_loss_gradient(pose, asset, sdf, floor, target, cams, cfg, 2e-5);
  double rel = (g1 - g2).norm() / std::max(g1.norm(), 1e-12);
  CHECK(rel <= 1e-3);
}

TEST_CASE("select_pose picks the candidate that matches the reference render") {
  auto truth = std::make_shared<SynthResult>(generate(default_room_spec()));
  Backends be = make_mock_backends(truth);

  ObjectAsset asset;
  asset.mesh = unit_cube();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 60; ++i) {
    Vec3 c(u(rng), u(rng), u(rng));
    int axis = i % 3;
    c[axis] = (i % 2) ? 0.5 : -0.5;
    // one bright face breaks the symmetry
    Vec3 color = (axis == 0 && i % 2) ? Vec3(1, 1, 1) : Vec3(0.6, 0.1, 0.1);
    asset.gaussians.primitives.push_back(GaussianPrimitive::make(
        c, Vec3(0.1, 0.1, 0.1), Eigen::Quaterniond::Identity(), 0.9, color));
    asset.gaussians.labels.push_back(0);
  }

  CameraFrame cam = testutil::simple_camera(64, 64, 0);
  cam.translation = Vec3(0, 0, 2.5);

  PlacementPose gt;
  gt.r6 = rotation_to_r6(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitY()).toRotationMatrix());
  ImageU8 reference =
      quantize_to_u8(render(transform_gaussians(asset.gaussians, gt), cam).color);

  std::vector<IcpCandidate> cands;
  for (int k = 0; k < 4; ++k) {
    IcpCandidate c;
    c.pose.r6 = rotation_to_r6(
        Eigen::AngleAxisd(k * std::numbers::pi / 2, Vec3::UnitY()).toRotationMatrix());
    c.residual = 0.1 + 0.01 * k;
    cands.push_back(c);
  }
  PlacementPose picked = select_pose(cands, asset, cam, reference, *be.embedder);
  CHECK(picked.rotation().isApprox(gt.rotation(), 1e-9));
}

TEST_CASE("compose and save/load assembly round trip") {
  AssembledScene assembly;
  assembly.background = testutil::random_scene(20, 14);
  assembly.collision = unit_cube();

  PlacedObject obj;
  obj.object_id = 1;
  obj.asset.object_id = 1;
  obj.asset.mesh = unit_cube();
  obj.asset.gaussians = testutil::random_scene(5, 15);
  obj.pose.translation = Vec3(0.5, 0.25, -1);
  obj.pose.scale = 0.5;
  assembly.objects.push_back(obj);

  GaussianScene composed = compose_scene(assembly);
  CHECK(composed.size() == 25);
  int labeled = 0;
  for (int l : composed.labels) labeled += l == 1;
  CHECK(labeled == 5);

  testutil::TempDir dir("assembly");
  save_assembly(assembly, dir.path, "{\"note\": 1}");
  AssembledScene back = load_assembly(dir.path);
  CHECK(back.background.size() == 20);
  CHECK(back.collision.face_count() == 12);
  REQUIRE(back.objects.size() == 1);
  CHECK(back.objects[0].object_id == 1);
  CHECK(back.objects[0].pose.translation.isApprox(obj.pose.translation, 1e-12));
  CHECK(back.objects[0].pose.scale == doctest::Approx(0.5));
  CHECK(back.objects[0].asset.gaussians.size() == 5);
}

TEST_SUITE_END();
