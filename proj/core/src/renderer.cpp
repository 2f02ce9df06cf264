#include "worldact/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "worldact/errors.hpp"

namespace worldact {

std::vector<ProjectedSplat> project_scene(const GaussianScene& scene,
                                          const CameraFrame& cam,
                                          const RenderOptions& opts) {
  std::vector<ProjectedSplat> splats;
  splats.reserve(scene.size());
  for (size_t i = 0; i < scene.size(); ++i) {
    const GaussianPrimitive& g = scene.primitives[i];
    Vec3 t = cam.world_to_camera(g.center());
    if (t.z() < opts.near_plane || t.z() > opts.far_plane) continue;
    double opacity = g.opacity();
    if (opacity < opts.opacity_floor) continue;

    double inv_z = 1.0 / t.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << cam.fx * inv_z, 0, -cam.fx * t.x() * inv_z * inv_z,
           0, cam.fy * inv_z, -cam.fy * t.y() * inv_z * inv_z;
    Eigen::Matrix2d cov2d =
        jac * cam.rotation * g.covariance() * cam.rotation.transpose() * jac.transpose();
    cov2d.diagonal().array() += 1e-9;  // guard against projective degeneracy

    double det = cov2d.determinant();
    if (det <= 0 || !std::isfinite(det)) continue;

    ProjectedSplat s;
    s.index = static_cast<int>(i);
    s.depth = t.z();
    s.mean = Eigen::Vector2d(cam.fx * t.x() * inv_z + cam.cx,
                             cam.fy * t.y() * inv_z + cam.cy);
    s.cov_inv = cov2d.inverse();
    s.alpha_base = opacity;
    double max_eig = 0.5 * (cov2d.trace() +
        std::sqrt(std::max(0.0, cov2d.trace() * cov2d.trace() - 4.0 * det)));
    s.radius = 3.0 * std::sqrt(std::max(max_eig, 0.0)) + 1.0;
    s.color = g.color();
    splats.push_back(s);
  }
  std::sort(splats.begin(), splats.end(), [](const ProjectedSplat& a, const ProjectedSplat& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.index < b.index;
  });
  return splats;
}

double splat_alpha(const ProjectedSplat& s, double px, double py,
                   const RenderOptions& opts) {
  Eigen::Vector2d d(px - s.mean.x(), py - s.mean.y());
  double q = d.dot(s.cov_inv * d);
  if (q > opts.falloff_cutoff_sq || q < 0) return 0.0;
  double a = s.alpha_base * std::exp(-0.5 * q);
  if (a < opts.opacity_floor) return 0.0;
  return std::min(a, opts.alpha_clamp);
}

namespace {

// Splat indices per tile, kept in global depth order by construction.
struct TileGrid {
  int tiles_x, tiles_y, tile;
  std::vector<std::vector<int>> bins;  // indices into the sorted splat list

  TileGrid(int width, int height, int tile_size)
      : tiles_x((width + tile_size - 1) / tile_size),
        tiles_y((height + tile_size - 1) / tile_size),
        tile(tile_size),
        bins(static_cast<size_t>(tiles_x) * tiles_y) {}

  void insert(const std::vector<ProjectedSplat>& splats, int width, int height) {
    for (size_t k = 0; k < splats.size(); ++k) {
      const auto& s = splats[k];
      int x0 = std::max(0, static_cast<int>(std::floor((s.mean.x() - s.radius) / tile)));
      int x1 = std::min(tiles_x - 1, static_cast<int>(std::floor((s.mean.x() + s.radius) / tile)));
      int y0 = std::max(0, static_cast<int>(std::floor((s.mean.y() - s.radius) / tile)));
      int y1 = std::min(tiles_y - 1, static_cast<int>(std::floor((s.mean.y() + s.radius) / tile)));
      if (s.mean.x() + s.radius < 0 || s.mean.x() - s.radius > width ||
          s.mean.y() + s.radius < 0 || s.mean.y() - s.radius > height)
        continue;
      for (int ty = y0; ty <= y1; ++ty)
        for (int tx = x0; tx <= x1; ++tx)
          bins[static_cast<size_t>(ty) * tiles_x + tx].push_back(static_cast<int>(k));
    }
  }

  const std::vector<int>& bin_for_pixel(int row, int col) const {
    return bins[static_cast<size_t>(row / tile) * tiles_x + col / tile];
  }
};

}  // namespace

RenderedFrame render(const GaussianScene& scene, const CameraFrame& cam,
                     const RenderOptions& opts) {
  cam.validate();
  auto splats = project_scene(scene, cam, opts);
  TileGrid grid(cam.width, cam.height, opts.tile_size);
  grid.insert(splats, cam.width, cam.height);

  RenderedFrame out;
  out.color = ImageF(cam.height, cam.width, 3);
  out.depth = ImageF(cam.height, cam.width, 1);
  out.alpha = ImageF(cam.height, cam.width, 1);

  for (int r = 0; r < cam.height; ++r) {
    double py = r + 0.5;
    for (int c = 0; c < cam.width; ++c) {
      double px = c + 0.5;
      Vec3 color = Vec3::Zero();
      double depth = 0, alpha = 0, trans = 1.0;
      for (int k : grid.bin_for_pixel(r, c)) {
        const ProjectedSplat& s = splats[k];
        double a = splat_alpha(s, px, py, opts);
        if (a == 0.0) continue;
        double w = a * trans;
        color += w * s.color;
        depth += w * s.depth;
        alpha += w;
        trans *= 1.0 - a;
        if (trans < opts.min_transmittance) break;
      }
      color += (1.0 - alpha) * opts.background;
      for (int ch = 0; ch < 3; ++ch) out.color.at(r, c, ch) = color[ch];
      out.depth.at(r, c) = depth;
      out.alpha.at(r, c) = alpha;
    }
  }
  return out;
}

std::vector<WeightRecord> render_weights(const GaussianScene& scene,
                                         const CameraFrame& cam,
                                         const std::vector<std::pair<int, int>>& pixels,
                                         const RenderOptions& opts) {
  cam.validate();
  for (auto [r, c] : pixels)
    if (r < 0 || r >= cam.height || c < 0 || c >= cam.width)
      throw ArgumentError("render_weights: pixel out of bounds (" +
                          std::to_string(r) + "," + std::to_string(c) + ")");
  auto splats = project_scene(scene, cam, opts);
  TileGrid grid(cam.width, cam.height, opts.tile_size);
  grid.insert(splats, cam.width, cam.height);

  std::vector<WeightRecord> records;
  records.reserve(pixels.size());
  for (auto [r, c] : pixels) {
    WeightRecord rec;
    rec.row = r;
    rec.col = c;
    double trans = 1.0;
    for (int k : grid.bin_for_pixel(r, c)) {
      const ProjectedSplat& s = splats[k];
      double a = splat_alpha(s, c + 0.5, r + 0.5, opts);
      if (a == 0.0) continue;
      rec.entries.push_back({s.index, a * trans});
      trans *= 1.0 - a;
      if (trans < opts.min_transmittance) break;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<WeightRecord> render_all_weights(const GaussianScene& scene,
                                             const CameraFrame& cam,
                                             const RenderOptions& opts) {
  std::vector<std::pair<int, int>> pixels;
  pixels.reserve(static_cast<size_t>(cam.width) * cam.height);
  for (int r = 0; r < cam.height; ++r)
    for (int c = 0; c < cam.width; ++c) pixels.emplace_back(r, c);
  return render_weights(scene, cam, pixels, opts);
}

ImageF render_soft_mask(const GaussianScene& scene, const std::vector<double>& scores,
                        const CameraFrame& cam, const RenderOptions& opts) {
  if (scores.size() != scene.size())
    throw ArgumentError("render_soft_mask: scores length does not match primitive count");
  cam.validate();
  auto splats = project_scene(scene, cam, opts);
  TileGrid grid(cam.width, cam.height, opts.tile_size);
  grid.insert(splats, cam.width, cam.height);

  ImageF out(cam.height, cam.width, 1);
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      double value = 0, trans = 1.0;
      for (int k : grid.bin_for_pixel(r, c)) {
        const ProjectedSplat& s = splats[k];
        double a = splat_alpha(s, c + 0.5, r + 0.5, opts);
        if (a == 0.0) continue;
        value += a * trans * scores[s.index];
        trans *= 1.0 - a;
        if (trans < opts.min_transmittance) break;
      }
      out.at(r, c) = value;
    }
  }
  return out;
}

ImageF render_silhouette(const GaussianScene& subset, const CameraFrame& cam,
                         const RenderOptions& opts) {
  return render_soft_mask(subset, std::vector<double>(subset.size(), 1.0), cam, opts);
}

ImageF render_silhouette_in_context(const GaussianScene& scene,
                                    const std::vector<uint8_t>& selected,
                                    const CameraFrame& cam,
                                    const RenderOptions& opts) {
  if (selected.size() != scene.size())
    throw ArgumentError("render_silhouette_in_context: selection length mismatch");
  std::vector<double> scores(scene.size());
  for (size_t i = 0; i < scene.size(); ++i) scores[i] = selected[i] ? 1.0 : 0.0;
  return render_soft_mask(scene, scores, cam, opts);
}

}  // namespace worldact
