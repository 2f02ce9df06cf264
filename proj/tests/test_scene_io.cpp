#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "worldact/errors.hpp"
#include "worldact/scene.hpp"

using namespace worldact;

TEST_SUITE_BEGIN("scene");

TEST_CASE("primitive accessors activate raw fields") {
  GaussianPrimitive p = GaussianPrimitive::make(Vec3(1, 2, 3), Vec3(0.1, 0.2, 0.3),
                                                Eigen::Quaterniond::Identity(), 0.7,
                                                Vec3(0.5, 0.25, 1.0));
  CHECK(p.center().isApprox(Vec3(1, 2, 3)));
  CHECK(p.scale().isApprox(Vec3(0.1, 0.2, 0.3), 1e-6));
  CHECK(p.opacity() == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(p.color().x() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(p.color().z() == doctest::Approx(1.0).epsilon(1e-6));

  // Sigma = R S S^T R^T: diagonal of squared scales under identity rotation.
  Mat3 cov = p.covariance();
  CHECK(cov(0, 0) == doctest::Approx(0.01).epsilon(1e-5));
  CHECK(cov(1, 1) == doctest::Approx(0.04).epsilon(1e-5));
  CHECK(cov(2, 2) == doctest::Approx(0.09).epsilon(1e-5));
  CHECK(std::abs(cov(0, 1)) < 1e-9);
}

TEST_CASE("covariance rotates with the quaternion") {
  Eigen::Quaterniond q(Eigen::AngleAxisd(0.5, Vec3(1, 2, 3).normalized()));
  GaussianPrimitive p = GaussianPrimitive::make(Vec3::Zero(), Vec3(0.1, 0.2, 0.3), q, 0.5,
                                                Vec3(1, 1, 1));
  Mat3 r = q.toRotationMatrix();
  Mat3 s2 = Vec3(0.01, 0.04, 0.09).asDiagonal();
  CHECK(p.covariance().isApprox(r * s2 * r.transpose(), 1e-5));
}

TEST_CASE("scene ply round trip is bit exact") {
  GaussianScene scene = testutil::random_scene(50, 11);
  scene.primitives[5].sh_rest = {0.1f, -0.2f, 0.3f};
  // every primitive must agree on the sh_rest width for a single PLY layout
  for (auto& p : scene.primitives) p.sh_rest.resize(3, 0.0f);

  testutil::TempDir dir("ply");
  save_scene(scene, dir.path / "s.ply");
  GaussianScene back = load_scene(dir.path / "s.ply");

  REQUIRE(back.size() == scene.size());
  for (size_t i = 0; i < scene.size(); ++i) {
    const auto& a = scene.primitives[i];
    const auto& b = back.primitives[i];
    CHECK(a.center_raw == b.center_raw);
    CHECK(a.log_scale_raw == b.log_scale_raw);
    CHECK(a.rot_raw == b.rot_raw);
    CHECK(a.opacity_logit == b.opacity_logit);
    CHECK(a.f_dc == b.f_dc);
    CHECK(a.sh_rest == b.sh_rest);
  }
  // PLY carries no labels; they come back zeroed.
  CHECK(back.labels == std::vector<int>(scene.size(), 0));
}

TEST_CASE("trajectory json round trip") {
  Trajectory traj;
  for (int i = 0; i < 3; ++i) {
    CameraFrame cam = testutil::simple_camera(64, 48, i * 2);
    cam.rotation = Eigen::AngleAxisd(0.1 * i, Vec3::UnitY()).toRotationMatrix();
    cam.translation = Vec3(0.5 * i, -0.25, 1 + i);
    traj.frames.push_back(cam);
  }
  testutil::TempDir dir("traj");
  save_trajectory(traj, dir.path / "t.json");
  Trajectory back = load_trajectory(dir.path / "t.json");

  REQUIRE(back.frames.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.frames[i].rotation.isApprox(traj.frames[i].rotation, 1e-12));
    CHECK(back.frames[i].translation.isApprox(traj.frames[i].translation, 1e-12));
    CHECK(back.frames[i].fx == traj.frames[i].fx);
    CHECK(back.frames[i].frame_index == traj.frames[i].frame_index);
  }
  CHECK(back.find(2) != nullptr);
  CHECK(back.find(3) == nullptr);
}

TEST_CASE("camera transforms invert each other") {
  CameraFrame cam = testutil::simple_camera();
  cam.rotation = Eigen::AngleAxisd(0.7, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  cam.translation = Vec3(0.3, -1, 2);
  Vec3 p(0.4, -0.2, 3);
  CHECK(cam.camera_to_world(cam.world_to_camera(p)).isApprox(p, 1e-12));
  CHECK(cam.world_to_camera(cam.camera_origin()).norm() < 1e-12);
}

TEST_CASE("unproject uses pixel centers") {
  CameraFrame cam = testutil::simple_camera(64, 64);
  // the principal-point pixel center maps to the optical axis
  Vec3 p = cam.unproject(cam.cy - 0.5, cam.cx - 0.5, 2.0);
  CHECK(p.x() == doctest::Approx(0.0));
  CHECK(p.y() == doctest::Approx(0.0));
  CHECK(p.z() == doctest::Approx(2.0));
}

TEST_CASE("split and subset by labels partition the scene") {
  GaussianScene scene = testutil::random_scene(30, 5);
  for (size_t i = 0; i < scene.size(); ++i) scene.labels[i] = static_cast<int>(i % 3);

  ScenePartition part = split_by_labels(scene);
  CHECK(part.object_ids == std::vector<int>{1, 2});
  size_t total = part.background.size();
  for (const auto& o : part.objects) total += o.size();
  CHECK(total == scene.size());

  GaussianScene one = subset_by_label(scene, 1);
  CHECK(one.size() == 10);
  for (const auto& p : one.primitives) CHECK(p.opacity() > 0);
}

TEST_CASE("scene validate flags label count mismatch") {
  GaussianScene scene = testutil::random_scene(4, 1);
  scene.labels.pop_back();
  CHECK_THROWS_AS(scene.validate(), DataError);
}

TEST_CASE("trajectory validate requires increasing frame indices") {
  Trajectory traj;
  traj.frames.push_back(testutil::simple_camera(64, 64, 3));
  traj.frames.push_back(testutil::simple_camera(64, 64, 3));
  CHECK_THROWS_AS(traj.validate(), DataError);
}

TEST_SUITE_END();
