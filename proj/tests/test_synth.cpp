#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "worldact/errors.hpp"
#include "worldact/synth.hpp"

using namespace worldact;

TEST_SUITE_BEGIN("synth");

TEST_CASE("generation is deterministic under a fixed spec") {
  SynthResult a = generate(default_room_spec());
  SynthResult b = generate(default_room_spec());
  REQUIRE(a.scene.size() == b.scene.size());
  for (size_t i = 0; i < a.scene.size(); ++i) {
    CHECK(a.scene.primitives[i].center_raw == b.scene.primitives[i].center_raw);
    CHECK(a.scene.primitives[i].rot_raw == b.scene.primitives[i].rot_raw);
  }
  CHECK(a.scene.labels == b.scene.labels);
}

TEST_CASE("labels partition into the declared member indices") {
  SynthResult truth = generate(default_room_spec());
  truth.scene.validate();
  std::set<int> seen;
  for (const auto& obj : truth.objects) {
    CHECK(obj.label >= 1);
    CHECK(!obj.member_indices.empty());
    for (int i : obj.member_indices) {
      CHECK(truth.scene.labels[static_cast<size_t>(i)] == obj.label);
      CHECK(seen.insert(i).second);  // no index in two objects
    }
  }
  size_t labeled = 0;
  for (int l : truth.scene.labels) labeled += l != 0;
  CHECK(labeled == seen.size());
}

TEST_CASE("room has six classified boundary planes") {
  SynthResult truth = generate(default_room_spec());
  REQUIRE(truth.planes.size() == 6);
  int floor = 0, ceiling = 0, wall = 0;
  for (const auto& p : truth.planes) {
    CHECK(std::abs(p.normal.norm() - 1.0) < 1e-9);
    if (p.cls == FaceClass::Floor) ++floor;
    if (p.cls == FaceClass::Ceiling) ++ceiling;
    if (p.cls == FaceClass::Wall) ++wall;
  }
  CHECK(floor == 1);
  CHECK(ceiling == 1);
  CHECK(wall == 4);
}

TEST_CASE("trajectory orbits inside the room") {
  SynthResult truth = generate(default_room_spec());
  CHECK(truth.trajectory.frames.size() == 12);
  truth.trajectory.validate();
  for (const auto& cam : truth.trajectory.frames) {
    Vec3 o = cam.camera_origin();
    CHECK(std::abs(o.x()) < truth.spec.room.x() / 2);
    CHECK(o.y() > 0);
    CHECK(o.y() < truth.spec.room.y());
    CHECK(std::abs(o.z()) < truth.spec.room.z() / 2);
  }
}

TEST_CASE("analytic silhouettes agree with the renderer's view of each object") {
  SynthResult truth = generate(default_room_spec());
  const auto& obj = truth.objects.front();
  std::vector<uint8_t> sel(truth.scene.size(), 0);
  for (int i : obj.member_indices) sel[static_cast<size_t>(i)] = 1;

  const CameraFrame& cam = truth.trajectory.frames.front();
  Mask analytic = analytic_silhouette(truth, obj.label, cam, true);
  Mask rendered = threshold_mask(render_silhouette_in_context(truth.scene, sel, cam), 0.3);
  if (mask_area(analytic) > 50) CHECK(mask_iou(analytic, rendered) > 0.5);
}

TEST_CASE("stored ground-truth masks match the analytic silhouettes") {
  SynthResult truth = generate(default_room_spec());
  for (const auto& obj : truth.objects) {
    auto it = truth.masks.find(obj.label);
    REQUIRE(it != truth.masks.end());
    for (const auto& [t, m] : it->second.masks) {
      const CameraFrame* cam = truth.trajectory.find(t);
      REQUIRE(cam != nullptr);
      Mask expect = analytic_silhouette(truth, obj.label, *cam, true);
      CHECK(mask_iou(m, expect) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("spec json round trip") {
  testutil::TempDir dir("spec");
  SynthSpec spec = default_room_spec();
  spec.seed = 42;
  spec.noise = 0.01;
  save_synth_spec(spec, dir.path / "spec.json");
  SynthSpec back = load_synth_spec(dir.path / "spec.json");
  CHECK(back.seed == 42);
  CHECK(back.noise == doctest::Approx(0.01));
  CHECK(back.room.isApprox(spec.room));
  REQUIRE(back.objects.size() == spec.objects.size());
  for (size_t i = 0; i < spec.objects.size(); ++i) {
    CHECK(back.objects[i].name == spec.objects[i].name);
    CHECK(back.objects[i].shape == spec.objects[i].shape);
    CHECK(back.objects[i].dims.isApprox(spec.objects[i].dims));
    CHECK(back.objects[i].portable == spec.objects[i].portable);
  }
}

TEST_CASE("find_object resolves names and aliases") {
  SynthResult truth = generate(default_room_spec());
  const SynthObjectTruth* jar = truth.find_object("jar");
  REQUIRE(jar != nullptr);
  CHECK(truth.find_object("definitely-not-an-object") == nullptr);
  for (const auto& alias : jar->spec.aliases) CHECK(truth.find_object(alias) == jar);
}

TEST_CASE("objects placed outside the room are rejected") {
  SynthSpec spec = default_room_spec();
  spec.objects[0].position = Vec3(100, 0, 0);
  CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("export writes a loadable scene and trajectory") {
  testutil::TempDir dir("export");
  SynthSpec spec = default_room_spec();
  spec.trajectory.frame_count = 4;
  SynthResult truth = generate(spec);
  export_synth(truth, dir.path);

  GaussianScene scene = load_scene(dir.path / "scene.ply");
  CHECK(scene.size() == truth.scene.size());
  Trajectory traj = load_trajectory(dir.path / "trajectory.json");
  CHECK(traj.frames.size() == truth.trajectory.frames.size());
  for (const auto& obj : truth.objects) {
    char name[32];
    std::snprintf(name, sizeof(name), "obj_%03d", obj.label);
    const MaskStack& ms = truth.masks.at(obj.label);
    for (const auto& [t, m] : ms.masks) {
      char frame[32];
      std::snprintf(frame, sizeof(frame), "frame_%05d.png", t);
      Mask back = read_mask_png(dir.path / "masks" / name / frame);
      CHECK(mask_iou(back, m) == doctest::Approx(1.0));
    }
  }
}

TEST_SUITE_END();
