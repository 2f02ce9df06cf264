#pragma once

#include <map>

#include "worldact/image.hpp"
#include "worldact/renderer.hpp"
#include "worldact/scene.hpp"

namespace worldact {

class InpaintClient;
class DepthClient;

/// Per-view union mask of every removed object, dilated for splat falloff.
struct CompleteMaskSet {
  std::map<int, Mask> masks;  // frame_index -> mask
  int dilation_radius = 0;
};

struct InpaintResult {
  std::map<int, ImageU8> frames;       // frame_index -> inpainted RGB
  std::vector<int> keyframes;
  std::map<int, ImageF> keyframe_depths;
};

struct RestoreConfig {
  int dilation_radius = 3;
  int keyframe_stride = 10;
  int refine_iters = 30;
  double mask_threshold = 0.5;
  RenderOptions render;
};

/// Renders the unoccluded union silhouette of all labeled objects per view,
/// thresholds at 0.5 and dilates. Requires at least one nonzero label.
CompleteMaskSet fuse_masks(const GaussianScene& scene_with_labels, const Trajectory& cams,
                           int radius);

/// Inpaints the masked region of each frame and estimates depth on keyframes
/// (every cfg.keyframe_stride frames). The outside-mask identity is enforced
/// here regardless of what the backend returns.
InpaintResult inpaint_background(const std::map<int, ImageU8>& frames,
                                 const CompleteMaskSet& complete_masks,
                                 const Trajectory& cams, InpaintClient& inpainter,
                                 DepthClient& depth, const RestoreConfig& cfg);

/// Unprojects masked keyframe pixels to new isotropic Gaussians (scale d/fx)
/// colored from the inpainted frames, appends them to the background and
/// refines the new Gaussians' colors against the inpainted keyframes.
GaussianScene reinit_gaussians(const InpaintResult& inpaint, const CompleteMaskSet& masks,
                               const Trajectory& cams, const GaussianScene& background,
                               const RestoreConfig& cfg);

}  // namespace worldact
