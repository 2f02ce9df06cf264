#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "worldact/assets.hpp"
#include "worldact/collision.hpp"
#include "worldact/mesh.hpp"
#include "worldact/scene.hpp"
#include "worldact/segmenter.hpp"

namespace worldact {

class EmbedClient;

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Similarity transform of an asset into the world: x -> s R(r6) x + t.
struct PlacementPose {
  Vec3 translation = Vec3::Zero();
  Vec6 r6 = (Vec6() << 1, 0, 0, 0, 1, 0).finished();
  double scale = 1.0;

  Mat3 rotation() const;
  Vec3 apply(const Vec3& p) const { return scale * (rotation() * p) + translation; }
};

/// Gram-Schmidt orthonormalization of the 6D rotation parameterization.
Mat3 r6_to_rotation(const Vec6& r6);
Vec6 rotation_to_r6(const Mat3& r);

struct AlignConfig {
  double w_c = 0.1;  // contact weight
  double w_p = 1.0;  // penetration weight
  int candidate_yaws = 8;
  bool try_flip = true;
  int icp_max_iters = 60;
  double icp_tol = 1e-9;           // relative RMS improvement stop
  int refine_max_iters = 120;
  double refine_tol = 1e-6;        // relative loss improvement stop
  int refine_view_cap = 3;         // refine over at most this many evenly
                                   // spaced target views (0 = all); the loss
                                   // itself always uses the views it is given
  double contact_percentile = 0.05;
  int penetration_samples = 256;
  double scale_min = 0.05, scale_max = 20.0;
  Vec3 up = Vec3::UnitY();
  uint64_t seed = 0;
};

struct IcpCandidate {
  PlacementPose pose;
  double residual = 0;  // RMS point distance at convergence
};

/// Applies a pose to every primitive: centers moved, scales multiplied,
/// rotations left-composed. Labels set to `label` when >= 0.
GaussianScene transform_gaussians(const GaussianScene& scene, const PlacementPose& pose,
                                  int label = -1);

/// Point-to-point similarity ICP from K yaw starts (optionally each also
/// flipped upside down); similarity init from centroids and bbox diagonals.
std::vector<IcpCandidate> icp_candidates(const std::vector<Vec3>& asset_points,
                                         const std::vector<Vec3>& anchor_points,
                                         const AlignConfig& cfg);

/// Picks the candidate whose placed-asset render matches the reference view
/// best under the embedding's cosine similarity; ties take the lower residual.
PlacementPose select_pose(const std::vector<IcpCandidate>& candidates,
                          const ObjectAsset& asset, const CameraFrame& view,
                          const ImageU8& reference, EmbedClient& embedder);

struct AlignComponents {
  double mask = 0;
  double contact = 0;
  double penetration = 0;
  bool contact_skipped = false;  // no floor plane available
  bool scale_clamped = false;
  double total(const AlignConfig& cfg) const {
    return mask + cfg.w_c * contact + cfg.w_p * penetration;
  }
};

/// Placement loss: mean (1 - soft IoU) of the asset silhouette vs the target
/// masks, squared support-gap of the lowest contact_percentile sample points
/// to the floor plane, and squared hinge penetration into the background SDF.
double align_loss(const PlacementPose& pose, const ObjectAsset& asset, MeshSdf& background,
                  const std::optional<PlaneParam>& floor, const MaskStack& target_masks,
                  const Trajectory& cams, const AlignConfig& cfg,
                  AlignComponents* components = nullptr);

/// Central finite-difference descent over (t, r6, s) with backtracking line
/// search; the loss never increases on accepted steps. When loss_trace is
/// given it receives the loss after every accepted step (initial loss first).
PlacementPose refine_pose(const PlacementPose& init, const ObjectAsset& asset,
                          MeshSdf& background, const std::optional<PlaneParam>& floor,
                          const MaskStack& target_masks, const Trajectory& cams,
                          const AlignConfig& cfg, AlignComponents* final_components = nullptr,
                          std::vector<double>* loss_trace = nullptr);

/// Finite-difference gradient of align_loss over the 10 pose parameters.
Eigen::Matrix<double, 10, 1> align_loss_gradient(const PlacementPose& pose,
                                                 const ObjectAsset& asset, MeshSdf& background,
                                                 const std::optional<PlaneParam>& floor,
                                                 const MaskStack& target_masks,
                                                 const Trajectory& cams, const AlignConfig& cfg,
                                                 double step = 1e-5);

struct PlacedObject {
  int object_id = 0;
  ObjectAsset asset;
  PlacementPose pose;
};

struct AssembledScene {
  GaussianScene background;
  CollisionMesh collision;
  std::vector<PlacedObject> objects;
};

/// World-frame union scene: background plus each asset's Gaussians under its
/// pose, labeled by object id.
GaussianScene compose_scene(const AssembledScene& assembly);

/// Writes background.ply, collision.obj(+meta), assets/obj_{m:03}/ and a
/// scene.manifest.json that is sufficient to re-render the assembly.
void save_assembly(const AssembledScene& assembly, const std::filesystem::path& dir,
                   const std::string& settings_json = "{}");
AssembledScene load_assembly(const std::filesystem::path& dir);

}  // namespace worldact
