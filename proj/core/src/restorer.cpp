#include "worldact/restorer.hpp"

#include <algorithm>
#include <cmath>

#include "worldact/backends.hpp"
#include "worldact/errors.hpp"
#include "worldact/segmenter.hpp"

namespace worldact {

CompleteMaskSet fuse_masks(const GaussianScene& scene_with_labels, const Trajectory& cams,
                           int radius) {
  if (scene_with_labels.labels.size() != scene_with_labels.size())
    throw ArgumentError("fuse_masks: labels not assigned");
  std::vector<uint8_t> selected(scene_with_labels.size(), 0);
  bool any = false;
  for (size_t i = 0; i < scene_with_labels.size(); ++i) {
    if (scene_with_labels.labels[i] > 0) {
      selected[i] = 1;
      any = true;
    }
  }
  if (!any) throw ArgumentError("fuse_masks: no labeled objects");

  GaussianScene unioned;
  for (size_t i = 0; i < scene_with_labels.size(); ++i)
    if (selected[i]) {
      unioned.primitives.push_back(scene_with_labels.primitives[i]);
      unioned.labels.push_back(scene_with_labels.labels[i]);
    }

  CompleteMaskSet out;
  out.dilation_radius = radius;
  for (const auto& cam : cams.frames) {
    ImageF soft = render_silhouette(unioned, cam);
    out.masks[cam.frame_index] = dilate(threshold_mask(soft, 0.5), radius);
  }
  return out;
}

InpaintResult inpaint_background(const std::map<int, ImageU8>& frames,
                                 const CompleteMaskSet& complete_masks,
                                 const Trajectory& cams, InpaintClient& inpainter,
                                 DepthClient& depth, const RestoreConfig& cfg) {
  InpaintResult out;
  for (const auto& [t, frame] : frames) {
    auto it = complete_masks.masks.find(t);
    if (it == complete_masks.masks.end())
      throw ArgumentError("inpaint_background: no mask for frame " + std::to_string(t));
    const Mask& mask = it->second;
    if (mask_area(mask) == 0) {
      out.frames[t] = frame;
      continue;
    }
    ImageU8 painted;
    try {
      painted = inpainter.inpaint(frame, mask);
    } catch (const TransportError& e) {
      throw TransportError("inpaint_background: frame " + std::to_string(t) + ": " + e.what());
    }
    if (painted.height() != frame.height() || painted.width() != frame.width() ||
        painted.channels() != frame.channels())
      throw DataError("inpaint_background: backend changed frame shape at frame " +
                      std::to_string(t));
    // Outside-mask identity is ours to guarantee, not the backend's.
    for (int r = 0; r < frame.height(); ++r)
      for (int c = 0; c < frame.width(); ++c)
        if (!mask.at(r, c))
          for (int ch = 0; ch < frame.channels(); ++ch)
            painted.at(r, c, ch) = frame.at(r, c, ch);
    out.frames[t] = std::move(painted);
  }

  int stride = std::max(1, cfg.keyframe_stride);
  std::vector<int> keys;
  for (const auto& [t, _] : frames) keys.push_back(t);
  for (size_t i = 0; i < keys.size(); i += static_cast<size_t>(stride))
    out.keyframes.push_back(keys[i]);

  for (int t : out.keyframes) {
    const CameraFrame* cam = cams.find(t);
    if (!cam) throw ArgumentError("inpaint_background: frame " + std::to_string(t) +
                                  " missing from trajectory");
    try {
      out.keyframe_depths[t] = depth.estimate(out.frames.at(t), *cam);
    } catch (const TransportError& e) {
      throw TransportError("inpaint_background: depth at frame " + std::to_string(t) + ": " +
                           e.what());
    }
  }
  return out;
}

GaussianScene reinit_gaussians(const InpaintResult& inpaint, const CompleteMaskSet& masks,
                               const Trajectory& cams, const GaussianScene& background,
                               const RestoreConfig& cfg) {
  GaussianScene out = background;
  if (out.labels.size() != out.size()) out.labels.assign(out.size(), 0);
  size_t first_new = out.size();

  size_t masked_total = 0, valid_total = 0;
  for (int t : inpaint.keyframes) {
    const CameraFrame* cam = cams.find(t);
    if (!cam) throw ArgumentError("reinit_gaussians: keyframe " + std::to_string(t) +
                                  " missing from trajectory");
    auto dit = inpaint.keyframe_depths.find(t);
    if (dit == inpaint.keyframe_depths.end())
      throw ArgumentError("reinit_gaussians: no depth for keyframe " + std::to_string(t));
    const ImageF& depth = dit->second;
    const ImageU8& frame = inpaint.frames.at(t);
    const Mask& mask = masks.masks.at(t);
    for (int r = 0; r < mask.height(); ++r) {
      for (int c = 0; c < mask.width(); ++c) {
        if (!mask.at(r, c)) continue;
        ++masked_total;
        double d = depth.at(r, c);
        if (!std::isfinite(d) || d <= 0) continue;
        ++valid_total;
        Vec3 world = cam->camera_to_world(cam->unproject(r, c, d));
        Vec3 color(frame.at(r, c, 0) / 255.0, frame.at(r, c, 1) / 255.0,
                   frame.at(r, c, 2) / 255.0);
        double scale = d / cam->fx;  // roughly one pixel of screen coverage
        out.primitives.push_back(GaussianPrimitive::make(
            world, Vec3::Constant(scale), Eigen::Quaterniond::Identity(), 0.95, color));
        out.labels.push_back(0);
      }
    }
  }
  if (masked_total > 0 && valid_total == 0)
    throw DataError("reinit_gaussians: no valid depths under the masks");
  if (valid_total == 0) return out;

  // Color refinement of the new Gaussians against the inpainted keyframes,
  // masked pixels only; geometry and opacities stay fixed so the compositing
  // weights are constant across iterations.
  struct PixTarget {
    Vec3 target;
    std::vector<WeightEntry> entries;  // restricted to new gaussians
    Vec3 base;                         // contribution of old gaussians + background
  };
  std::vector<PixTarget> pix;
  RenderOptions ropts = cfg.render;
  for (int t : inpaint.keyframes) {
    const CameraFrame& cam = *cams.find(t);
    const Mask& mask = masks.masks.at(t);
    const ImageU8& frame = inpaint.frames.at(t);
    std::vector<std::pair<int, int>> wanted;
    for (int r = 0; r < mask.height(); ++r)
      for (int c = 0; c < mask.width(); ++c)
        if (mask.at(r, c)) wanted.emplace_back(r, c);
    if (wanted.empty()) continue;
    auto records = render_weights(out, cam, wanted, ropts);
    for (const auto& rec : records) {
      PixTarget p;
      p.target = Vec3(frame.at(rec.row, rec.col, 0) / 255.0,
                      frame.at(rec.row, rec.col, 1) / 255.0,
                      frame.at(rec.row, rec.col, 2) / 255.0);
      double wsum = 0;
      p.base = Vec3::Zero();
      for (const auto& e : rec.entries) {
        wsum += e.weight;
        if (static_cast<size_t>(e.gaussian) >= first_new)
          p.entries.push_back(e);
        else
          p.base += e.weight * out.primitives[e.gaussian].color();
      }
      p.base += (1.0 - wsum) * ropts.background;
      if (!p.entries.empty()) pix.push_back(std::move(p));
    }
  }

  std::vector<Vec3> colors(out.size() - first_new);
  for (size_t i = first_new; i < out.size(); ++i) colors[i - first_new] = out.primitives[i].color();

  for (int iter = 0; iter < cfg.refine_iters; ++iter) {
    std::vector<Vec3> grad(colors.size(), Vec3::Zero());
    std::vector<double> wsum(colors.size(), 0.0);
    for (const auto& p : pix) {
      Vec3 pred = p.base;
      for (const auto& e : p.entries)
        pred += e.weight * colors[static_cast<size_t>(e.gaussian) - first_new];
      Vec3 err = pred - p.target;
      for (const auto& e : p.entries) {
        size_t k = static_cast<size_t>(e.gaussian) - first_new;
        grad[k] += e.weight * err;
        wsum[k] += e.weight;
      }
    }
    bool moved = false;
    for (size_t k = 0; k < colors.size(); ++k) {
      if (wsum[k] <= 1e-12) continue;
      Vec3 step = grad[k] / wsum[k];
      if (step.norm() > 1e-9) moved = true;
      colors[k] -= step;
      for (int ch = 0; ch < 3; ++ch) colors[k][ch] = std::clamp(colors[k][ch], 0.0, 1.0);
    }
    if (!moved) break;
  }

  constexpr double kShC0 = 0.28209479177387814;
  for (size_t k = 0; k < colors.size(); ++k) {
    auto& g = out.primitives[first_new + k];
    for (int ch = 0; ch < 3; ++ch)
      g.f_dc[ch] = static_cast<float>((colors[k][ch] - 0.5) / kShC0);
  }
  return out;
}

}  // namespace worldact
