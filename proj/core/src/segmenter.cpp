#include "worldact/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "worldact/errors.hpp"

namespace worldact {

std::vector<int> MaskStack::view_set() const {
  std::vector<int> v;
  v.reserve(masks.size());
  for (const auto& [t, m] : masks) v.push_back(t);
  return v;
}

void MaskStack::validate(const Trajectory& cams) const {
  for (const auto& [t, m] : masks) {
    const CameraFrame* cam = cams.find(t);
    if (!cam) throw ArgumentError("mask stack: frame " + std::to_string(t) + " not in trajectory");
    if (m.height() != cam->height || m.width() != cam->width)
      throw ArgumentError("mask stack: mask dimensions mismatch at frame " + std::to_string(t));
    for (size_t i = 0; i < m.size(); ++i)
      if (m.data()[i] > 1)
        throw ArgumentError("mask stack: non-binary mask value at frame " + std::to_string(t));
  }
}

void SegmentationConfig::validate() const {
  if (lambda < 0) throw ArgumentError("segmentation: lambda must be >= 0");
  if (!(tau > 0 && tau < 1)) throw ArgumentError("segmentation: tau must be in (0,1)");
  if (step_size <= 0 || max_iters <= 0)
    throw ArgumentError("segmentation: step_size and max_iters must be positive");
}

WeightCache WeightCache::build(const GaussianScene& scene, const Trajectory& cams,
                               const std::vector<int>& frame_indices,
                               const RenderOptions& opts) {
  WeightCache cache;
  for (int t : frame_indices) {
    const CameraFrame* cam = cams.find(t);
    if (!cam) throw ArgumentError("weight cache: frame " + std::to_string(t) + " not in trajectory");
    cache.per_view[t] = render_all_weights(scene, *cam, opts);
  }
  return cache;
}

namespace {

// Visits every (weight record, mask value) pair of the stack's view set.
template <typename Fn>
void for_each_ray(const GaussianScene& scene, const MaskStack& masks,
                  const Trajectory& cams, const WeightCache* cache, Fn&& fn) {
  for (const auto& [t, mask] : masks.masks) {
    const CameraFrame* cam = cams.find(t);
    if (!cam) throw ArgumentError("seg_loss: frame " + std::to_string(t) + " not in trajectory");
    const std::vector<WeightRecord>* records = nullptr;
    std::vector<WeightRecord> local;
    if (cache) {
      auto it = cache->per_view.find(t);
      if (it == cache->per_view.end())
        throw ArgumentError("seg_loss: frame " + std::to_string(t) + " missing from weight cache");
      records = &it->second;
    } else {
      local = render_all_weights(scene, *cam);
      records = &local;
    }
    for (const WeightRecord& rec : *records)
      fn(rec, static_cast<double>(mask.at(rec.row, rec.col)));
  }
}

}  // namespace

double seg_loss(const GaussianScene& scene, const AssignmentField& scores,
                const MaskStack& masks, const Trajectory& cams,
                const SegmentationConfig& cfg, const WeightCache* cache) {
  cfg.validate();
  if (masks.masks.empty()) throw ArgumentError("seg_loss: empty view set");
  if (scores.scores.size() != scene.size())
    throw ArgumentError("seg_loss: scores length mismatch");
  double loss = 0;
  for_each_ray(scene, masks, cams, cache, [&](const WeightRecord& rec, double m) {
    double mhat = 0;
    for (const WeightEntry& e : rec.entries) mhat += e.weight * scores.scores[e.gaussian];
    loss += -m * mhat + cfg.lambda * (1.0 - m) * mhat;
  });
  return loss;
}

std::vector<double> seg_loss_gradient(const GaussianScene& scene,
                                      const MaskStack& masks, const Trajectory& cams,
                                      const SegmentationConfig& cfg,
                                      const WeightCache* cache) {
  cfg.validate();
  if (masks.masks.empty()) throw ArgumentError("seg_loss_gradient: empty view set");
  std::vector<double> grad(scene.size(), 0.0);
  for_each_ray(scene, masks, cams, cache, [&](const WeightRecord& rec, double m) {
    double coeff = -m + cfg.lambda * (1.0 - m);
    for (const WeightEntry& e : rec.entries) grad[e.gaussian] += e.weight * coeff;
  });
  return grad;
}

AssignmentField optimize_assignment(const GaussianScene& scene, const MaskStack& masks,
                                    const Trajectory& cams, const SegmentationConfig& cfg,
                                    const WeightCache* cache) {
  cfg.validate();
  if (masks.masks.empty()) throw ArgumentError("optimize_assignment: empty view set");
  bool any_nonempty = false;
  for (const auto& [t, m] : masks.masks) any_nonempty |= mask_area(m) > 0;
  if (!any_nonempty) throw DataError("optimize_assignment: all masks empty for object " +
                                     std::to_string(masks.object_id));

  // Build (or reuse) the per-view weight cache; weights stay fixed throughout.
  WeightCache local_cache;
  if (!cache) {
    local_cache = WeightCache::build(scene, cams, masks.view_set());
    cache = &local_cache;
  }

  AssignmentField field;
  field.object_id = masks.object_id;
  field.scores.assign(scene.size(), 0.5);

  std::mt19937_64 rng(cfg.seed);
  std::vector<double> grad(scene.size());
  std::vector<const WeightRecord*> pool;
  std::vector<double> pool_mask;

  // Flatten the ray pool once; subsampling draws from it per iteration.
  for (const auto& [t, mask] : masks.masks) {
    const auto& records = cache->per_view.at(t);
    for (const WeightRecord& rec : records) {
      pool.push_back(&rec);
      pool_mask.push_back(mask.at(rec.row, rec.col));
    }
  }
  size_t per_view = cfg.ray_sample_count > 0 ? static_cast<size_t>(cfg.ray_sample_count) : 0;
  size_t sample_total = per_view > 0 ? per_view * masks.masks.size() : pool.size();
  sample_total = std::min(sample_total, pool.size());

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    if (sample_total == pool.size()) {
      for (size_t k = 0; k < pool.size(); ++k) {
        double coeff = -pool_mask[k] + cfg.lambda * (1.0 - pool_mask[k]);
        for (const WeightEntry& e : pool[k]->entries) grad[e.gaussian] += e.weight * coeff;
      }
    } else {
      std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
      for (size_t n = 0; n < sample_total; ++n) {
        size_t k = pick(rng);
        double coeff = -pool_mask[k] + cfg.lambda * (1.0 - pool_mask[k]);
        for (const WeightEntry& e : pool[k]->entries) grad[e.gaussian] += e.weight * coeff;
      }
    }
    // The objective is linear in s, so the L-inf steepest descent direction
    // is the per-component gradient sign; a fixed step cannot increase the
    // loss on the exact gradient.
    bool moved = false;
    for (size_t i = 0; i < grad.size(); ++i) {
      if (grad[i] == 0.0) continue;
      double next = std::clamp(field.scores[i] - cfg.step_size * (grad[i] > 0 ? 1.0 : -1.0), 0.0, 1.0);
      if (next != field.scores[i]) {
        field.scores[i] = next;
        moved = true;
      }
    }
    if (!moved && sample_total == pool.size()) break;
  }
  return field;
}

std::vector<uint8_t> binarize(const AssignmentField& scores, double tau) {
  if (!(tau > 0 && tau < 1)) throw ArgumentError("binarize: tau must be in (0,1)");
  std::vector<uint8_t> z(scores.scores.size());
  for (size_t i = 0; i < z.size(); ++i) z[i] = scores.scores[i] > tau ? 1 : 0;
  return z;
}

GaussianScene assign_objects(const GaussianScene& scene,
                             const std::vector<AssignmentField>& fields,
                             const SegmentationConfig& cfg) {
  cfg.validate();
  std::vector<int> seen;
  for (const auto& f : fields) {
    if (f.scores.size() != scene.size())
      throw ArgumentError("assign_objects: field length mismatch for object " +
                          std::to_string(f.object_id));
    if (std::find(seen.begin(), seen.end(), f.object_id) != seen.end())
      throw ArgumentError("assign_objects: duplicate object id " + std::to_string(f.object_id));
    seen.push_back(f.object_id);
  }
  GaussianScene out = scene;
  out.labels.assign(scene.size(), 0);
  for (size_t i = 0; i < scene.size(); ++i) {
    double best = cfg.tau;
    int label = 0;
    for (const auto& f : fields) {
      if (f.scores[i] > best) {
        best = f.scores[i];
        label = f.object_id;
      }
    }
    out.labels[i] = label;
  }
  return out;
}

}  // namespace worldact
