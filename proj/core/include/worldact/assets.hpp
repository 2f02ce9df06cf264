#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "worldact/image.hpp"
#include "worldact/mesh.hpp"
#include "worldact/scene.hpp"
#include "worldact/segmenter.hpp"

namespace worldact {

class VlmClient;
class AssetClient;

struct ViewScore {
  int object_id = 0;
  int frame_index = 0;
  int score = 0;  // 0..100
  std::string rationale;
};

/// Generated per-object asset in its canonical frame: centroid at the origin,
/// largest bbox axis scaled to 1. `canonical_scale` restores world units.
struct ObjectAsset {
  int object_id = 0;
  GaussianScene gaussians;
  CollisionMesh mesh;  // watertight, per-vertex color
  int source_view = -1;
  std::string provenance;
  double canonical_scale = 1.0;
};

struct AssetConfig {
  double hull_thickness_frac = 0.25;  // of the smaller unprojected mask extent
};

/// One score per view in the mask stack, ascending frame order.
std::vector<ViewScore> score_views(int object_id, const MaskStack& masks,
                                   const std::map<int, ImageU8>& frames,
                                   VlmClient& vlm);

/// Argmax score; ties break toward the smallest frame index.
int select_best_view(const std::vector<ViewScore>& scores);

ObjectAsset generate_asset(const ImageU8& rgb, const Mask& mask, const ImageF& depth,
                           const CameraFrame& cam, AssetClient& backend);

/// Depth-extruded closed hull over the masked pixels: front and back shells
/// offset along the view direction plus boundary side walls.
ObjectAsset visual_hull_asset(const ImageU8& rgb, const Mask& mask, const ImageF& depth,
                              const CameraFrame& cam, const AssetConfig& cfg = {});

/// Recenters to the centroid and normalizes the largest bbox extent to 1,
/// accumulating the factor into canonical_scale.
void canonicalize_asset(ObjectAsset& asset);

// Directory layout: gaussians.ply, mesh.obj (+ mesh.meta.json), asset.json.
void save_asset(const ObjectAsset& asset, const std::filesystem::path& dir);
ObjectAsset load_asset(const std::filesystem::path& dir);

}  // namespace worldact
