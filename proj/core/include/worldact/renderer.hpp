#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "worldact/image.hpp"
#include "worldact/scene.hpp"

namespace worldact {

struct RenderOptions {
  double near_plane = 0.2;  // matches mainstream splat rasterizers; keeps the
                            // first-order EWA Jacobian from diverging for
                            // primitives grazing the camera
  double far_plane = 1000.0;
  double opacity_floor = 1.0 / 255.0;   // splats dimmer than this are culled
  double falloff_cutoff_sq = 9.0;       // Mahalanobis cut at 3 sigma
  double alpha_clamp = 0.999;
  double min_transmittance = 1e-12;     // compositing stops below this
  Vec3 background = Vec3::Zero();
  int tile_size = 16;
};

struct RenderedFrame {
  ImageF color;  // H x W x 3, in [0,1]
  ImageF depth;  // H x W, expected camera-space depth, weight-composited
  ImageF alpha;  // H x W, accumulated opacity
};

struct WeightEntry {
  int gaussian;   // index into the scene's primitive list
  double weight;  // alpha' * transmittance
};

/// Per-pixel compositing weights, depth-ordered (nearest first).
struct WeightRecord {
  int row = 0, col = 0;
  std::vector<WeightEntry> entries;
};

/// A Gaussian projected to the image plane via the first-order EWA
/// approximation. Shared by the forward render and the weight export.
struct ProjectedSplat {
  int index;            // primitive index
  double depth;         // camera-space center depth (sort key)
  Eigen::Vector2d mean; // image coordinates
  Eigen::Matrix2d cov_inv;
  double alpha_base;    // stored opacity, pre-falloff
  double radius;        // conservative 3-sigma pixel radius
  Vec3 color;
};

/// Project and depth-sort the scene's primitives for one camera.
/// Ties in depth break by primitive index.
std::vector<ProjectedSplat> project_scene(const GaussianScene& scene,
                                          const CameraFrame& cam,
                                          const RenderOptions& opts);

/// Effective opacity of a projected splat at an image point, with the
/// 3-sigma cut and opacity floor applied. Returns 0 when culled.
double splat_alpha(const ProjectedSplat& s, double px, double py,
                   const RenderOptions& opts);

RenderedFrame render(const GaussianScene& scene, const CameraFrame& cam,
                     const RenderOptions& opts = {});

std::vector<WeightRecord> render_weights(const GaussianScene& scene,
                                         const CameraFrame& cam,
                                         const std::vector<std::pair<int, int>>& pixels,
                                         const RenderOptions& opts = {});

/// Weight records for every pixel, row-major. Used as a per-view cache by
/// the segmenter; weights are score-independent.
std::vector<WeightRecord> render_all_weights(const GaussianScene& scene,
                                             const CameraFrame& cam,
                                             const RenderOptions& opts = {});

/// Per-pixel sum of w_i * scores[i].
ImageF render_soft_mask(const GaussianScene& scene, const std::vector<double>& scores,
                        const CameraFrame& cam, const RenderOptions& opts = {});

/// Standalone silhouette: soft mask of the subset with all scores 1.
ImageF render_silhouette(const GaussianScene& subset, const CameraFrame& cam,
                         const RenderOptions& opts = {});

/// Silhouette of the primitives where selected[i] != 0, occluded by the full
/// scene's compositing.
ImageF render_silhouette_in_context(const GaussianScene& scene,
                                    const std::vector<uint8_t>& selected,
                                    const CameraFrame& cam,
                                    const RenderOptions& opts = {});

}  // namespace worldact
