#pragma once

#include <map>
#include <vector>

#include "worldact/image.hpp"
#include "worldact/renderer.hpp"
#include "worldact/scene.hpp"

namespace worldact {

/// Per-object multi-view binary masks. Frames absent from `masks` are not in
/// the object's view set; all-empty masks are not stored.
struct MaskStack {
  int object_id = 0;
  std::map<int, Mask> masks;  // frame_index -> H x W binary mask

  std::vector<int> view_set() const;
  void validate(const Trajectory& cams) const;
};

/// Soft membership scores for one object, one scalar in [0,1] per primitive.
struct AssignmentField {
  int object_id = 0;
  std::vector<double> scores;
};

struct SegmentationConfig {
  double lambda = 1.0;       // background suppression weight
  double tau = 0.5;          // binarization threshold, strict
  double step_size = 0.05;   // per-iteration score step along the descent direction
  int max_iters = 200;
  int ray_sample_count = 4096;  // rays per view per iteration; 0 = all rays
  uint64_t seed = 0;

  void validate() const;
};

/// Cached per-view compositing weights; they do not depend on scores, so one
/// cache serves every object's optimization.
struct WeightCache {
  std::map<int, std::vector<WeightRecord>> per_view;  // frame_index -> records

  static WeightCache build(const GaussianScene& scene, const Trajectory& cams,
                           const std::vector<int>& frame_indices,
                           const RenderOptions& opts = {});
};

/// Mask inverse-rendering loss over the full per-view ray sets:
/// sum_t sum_r [ -M * Mhat + lambda * (1-M) * Mhat ].
double seg_loss(const GaussianScene& scene, const AssignmentField& scores,
                const MaskStack& masks, const Trajectory& cams,
                const SegmentationConfig& cfg, const WeightCache* cache = nullptr);

/// Analytic gradient of seg_loss with respect to the scores. Linear in s, so
/// the gradient is score-independent given fixed weights.
std::vector<double> seg_loss_gradient(const GaussianScene& scene,
                                      const MaskStack& masks, const Trajectory& cams,
                                      const SegmentationConfig& cfg,
                                      const WeightCache* cache = nullptr);

AssignmentField optimize_assignment(const GaussianScene& scene, const MaskStack& masks,
                                    const Trajectory& cams, const SegmentationConfig& cfg,
                                    const WeightCache* cache = nullptr);

/// z_i = 1 iff s_i > tau (strict).
std::vector<uint8_t> binarize(const AssignmentField& scores, double tau);

/// Assign each primitive the object id of its highest super-threshold score,
/// else 0. Guarantees a disjoint partition by construction.
GaussianScene assign_objects(const GaussianScene& scene,
                             const std::vector<AssignmentField>& fields,
                             const SegmentationConfig& cfg);

}  // namespace worldact
