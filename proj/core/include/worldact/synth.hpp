#pragma once

#include <map>
#include <string>
#include <vector>

#include "worldact/collision.hpp"
#include "worldact/image.hpp"
#include "worldact/mesh.hpp"
#include "worldact/renderer.hpp"
#include "worldact/scene.hpp"
#include "worldact/segmenter.hpp"

namespace worldact {

enum class ShapeKind { Box, Sphere, Cylinder };

ShapeKind shape_from_name(const std::string& name);
const char* shape_name(ShapeKind kind);

struct SynthObjectSpec {
  std::string name;
  std::vector<std::string> aliases;  // alternative prompts resolving to this object
  ShapeKind shape = ShapeKind::Box;
  Vec3 dims = Vec3(0.3, 0.3, 0.3);   // full extents (sphere: dims.x = diameter)
  Vec3 position = Vec3::Zero();      // object-frame origin (centroid) in world
  double yaw = 0;                    // rotation about the up axis, radians
  Vec3 color = Vec3(0.8, 0.2, 0.2);
  bool portable = true;
  std::string recognizability = "precise";  // precise | subtle | unrecognizable
  bool discoverable = true;          // mock VLM omits undiscoverable entries
  double density = 600;              // gaussians per unit surface area
};

struct SynthTrajectorySpec {
  int frame_count = 12;
  int width = 128, height = 128;
  double fov_deg = 70;
  double orbit_radius_frac = 0.33;  // fraction of the smaller horizontal room extent
  double camera_height_frac = 0.55; // fraction of room height
  double target_height_frac = 0.2;
};

struct SynthSpec {
  Vec3 room = Vec3(4, 3, 4);  // width (x), height (y = up), depth (z)
  Vec3 up = Vec3::UnitY();
  std::vector<SynthObjectSpec> objects;
  double wall_density = 90;   // gaussians per unit area
  double noise = 0;           // positional jitter as a fraction of sample spacing
  uint64_t seed = 1;
  double opacity = 0.95;
  SynthTrajectorySpec trajectory;
};

SynthSpec default_room_spec();

SynthSpec load_synth_spec(const std::filesystem::path& path);
void save_synth_spec(const SynthSpec& spec, const std::filesystem::path& path);

struct SynthObjectTruth {
  int label = 0;  // >= 1
  SynthObjectSpec spec;
  std::vector<int> member_indices;  // gaussian indices inside the scene
};

struct SynthPlaneTruth {
  Vec3 normal;   // pointing into the room
  double offset;
  FaceClass cls;
};

struct SynthResult {
  SynthSpec spec;
  GaussianScene scene;  // labels carry the ground truth
  Trajectory trajectory;
  std::vector<SynthObjectTruth> objects;
  std::vector<SynthPlaneTruth> planes;
  /// Analytic visible-region silhouettes, label -> stack (occlusion-aware).
  std::map<int, MaskStack> masks;

  const SynthObjectTruth* find_object(const std::string& prompt) const;  // name or alias
};

/// Deterministic synthetic room generator; the source of all ground truth
/// used by the oracle tests.
SynthResult generate(const SynthSpec& spec);

/// Analytic silhouette of one object in one view via direct ray casting.
/// With occlusion = true, pixels where another object is nearer are excluded.
Mask analytic_silhouette(const SynthResult& truth, int label, const CameraFrame& cam,
                         bool occlusion = true);

/// Reference compositor: per-pixel loop over all Gaussians in exact depth
/// order, no tiling or binning. Equivalence oracle for the tile renderer.
RenderedFrame oracle_brute_render(const GaussianScene& scene, const CameraFrame& cam,
                                  const RenderOptions& opts = {});

/// Writes scene PLY, trajectory JSON, ground-truth mask PNGs and oracle
/// metadata (labels, planes, poses) under out_dir.
void export_synth(const SynthResult& truth, const std::filesystem::path& out_dir);

}  // namespace worldact
