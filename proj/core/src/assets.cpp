#include "worldact/assets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "worldact/backends.hpp"
#include "worldact/errors.hpp"

namespace worldact {

std::vector<ViewScore> score_views(int object_id, const MaskStack& masks,
                                   const std::map<int, ImageU8>& frames, VlmClient& vlm) {
  if (masks.masks.empty()) throw ArgumentError("score_views: empty mask stack");
  std::vector<ViewScore> out;
  for (const auto& [t, mask] : masks.masks) {
    auto fit = frames.find(t);
    if (fit == frames.end())
      throw ArgumentError("score_views: no frame image for view " + std::to_string(t));
    ViewScore vs;
    vs.object_id = object_id;
    vs.frame_index = t;
    vs.score = vlm.score_view(fit->second, mask);
    out.push_back(std::move(vs));
  }
  return out;
}

int select_best_view(const std::vector<ViewScore>& scores) {
  if (scores.empty()) throw ArgumentError("select_best_view: no scores");
  const ViewScore* best = &scores.front();
  for (const auto& s : scores) {
    if (s.score > best->score || (s.score == best->score && s.frame_index < best->frame_index))
      best = &s;
  }
  return best->frame_index;
}

ObjectAsset generate_asset(const ImageU8& rgb, const Mask& mask, const ImageF& depth,
                           const CameraFrame& cam, AssetClient& backend) {
  if (mask_area(mask) == 0) throw ArgumentError("generate_asset: empty mask");
  ObjectAsset asset = backend.generate(rgb, mask, depth, cam);
  asset.source_view = cam.frame_index;
  if (asset.provenance.empty()) asset.provenance = backend.name();
  canonicalize_asset(asset);
  return asset;
}

ObjectAsset visual_hull_asset(const ImageU8& rgb, const Mask& mask, const ImageF& depth,
                              const CameraFrame& cam, const AssetConfig& cfg) {
  if (mask_area(mask) == 0) throw ArgumentError("visual_hull_asset: empty mask");
  if (rgb.height() != mask.height() || rgb.width() != mask.width() ||
      depth.height() != mask.height() || depth.width() != mask.width())
    throw ArgumentError("visual_hull_asset: input shape mismatch");

  int h = mask.height(), w = mask.width();
  auto masked = [&](int r, int c) {
    return r >= 0 && r < h && c >= 0 && c < w && mask.at(r, c) != 0;
  };

  // Per-pixel depth with a median fallback for invalid readings.
  std::vector<double> valid;
  int rmin = h, rmax = -1, cmin = w, cmax = -1;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!mask.at(r, c)) continue;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
      double d = depth.at(r, c);
      if (std::isfinite(d) && d > 0) valid.push_back(d);
    }
  if (valid.empty()) throw DataError("visual_hull_asset: no valid depth under the mask");
  std::nth_element(valid.begin(), valid.begin() + valid.size() / 2, valid.end());
  double d_med = valid[valid.size() / 2];
  auto pix_depth = [&](int r, int c) {
    double d = depth.at(r, c);
    return (std::isfinite(d) && d > 0) ? d : d_med;
  };

  double extent_w = (cmax - cmin + 1) / cam.fx * d_med;
  double extent_h = (rmax - rmin + 1) / cam.fy * d_med;
  double thickness = cfg.hull_thickness_frac * std::min(extent_w, extent_h);
  if (thickness <= 0) throw GeometryError("visual_hull_asset: degenerate mask extent");

  // Pixel-corner lattice; a corner exists when it touches a masked pixel.
  // Front depth per corner = mean of adjacent masked pixel depths.
  std::map<std::pair<int, int>, int> corner_id;  // (corner_r, corner_c) -> vertex pair base
  ObjectAsset asset;
  CollisionMesh& mesh = asset.mesh;
  auto corner = [&](int cr, int cc) {
    auto it = corner_id.find({cr, cc});
    if (it != corner_id.end()) return it->second;
    double dsum = 0, n = 0;
    Vec3 col = Vec3::Zero();
    for (int pr : {cr - 1, cr})
      for (int pc : {cc - 1, cc})
        if (masked(pr, pc)) {
          dsum += pix_depth(pr, pc);
          col += Vec3(rgb.at(pr, pc, 0), rgb.at(pr, pc, 1),
                      rgb.channels() == 3 ? rgb.at(pr, pc, 2) : rgb.at(pr, pc, 0)) /
                 255.0;
          n += 1;
        }
    double df = dsum / n;
    col /= n;
    // Corner rays pass through integer pixel-grid coordinates.
    Vec3 dir((cc - cam.cx) / cam.fx, (cr - cam.cy) / cam.fy, 1.0);
    int base = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(cam.camera_to_world(dir * df));                // front
    mesh.vertices.push_back(cam.camera_to_world(dir * df + Vec3(0, 0, thickness)));  // back
    mesh.vertex_colors.push_back(col);
    mesh.vertex_colors.push_back(col);
    corner_id[{cr, cc}] = base;
    return base;
  };
  auto front = [&](int cr, int cc) { return corner(cr, cc); };
  auto back = [&](int cr, int cc) { return corner(cr, cc) + 1; };

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.at(r, c)) continue;
      int fa = front(r, c), fb = front(r, c + 1), fc = front(r + 1, c + 1), fd = front(r + 1, c);
      int ba = back(r, c), bb = back(r, c + 1), bc = back(r + 1, c + 1), bd = back(r + 1, c);
      // Front shell faces the camera, back shell faces away.
      mesh.faces.emplace_back(fa, fd, fc);
      mesh.faces.emplace_back(fa, fc, fb);
      mesh.faces.emplace_back(ba, bb, bc);
      mesh.faces.emplace_back(ba, bc, bd);
      // Side walls on mask-boundary edges, wound outward.
      auto wall = [&](int pr0, int pc0, int pr1, int pc1) {
        int fp = front(pr0, pc0), fq = front(pr1, pc1);
        int bp = back(pr0, pc0), bq = back(pr1, pc1);
        mesh.faces.emplace_back(fp, fq, bq);
        mesh.faces.emplace_back(fp, bq, bp);
      };
      if (!masked(r - 1, c)) wall(r, c, r, c + 1);          // top
      if (!masked(r + 1, c)) wall(r + 1, c + 1, r + 1, c);  // bottom
      if (!masked(r, c - 1)) wall(r + 1, c, r, c);          // left
      if (!masked(r, c + 1)) wall(r, c + 1, r + 1, c + 1);  // right
    }
  }

  // One Gaussian per masked pixel on each shell.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.at(r, c)) continue;
      double d = pix_depth(r, c);
      Vec3 color(rgb.at(r, c, 0), rgb.at(r, c, 1),
                 rgb.channels() == 3 ? rgb.at(r, c, 2) : rgb.at(r, c, 0));
      color /= 255.0;
      double footprint = std::max(d / cam.fx, thickness / 8.0);
      for (double off : {0.0, thickness}) {
        Vec3 p = cam.camera_to_world(cam.unproject(r, c, d) + Vec3(0, 0, off));
        asset.gaussians.primitives.push_back(GaussianPrimitive::make(
            p, Vec3::Constant(footprint), Eigen::Quaterniond::Identity(), 0.95, color));
        asset.gaussians.labels.push_back(0);
      }
    }
  }

  asset.source_view = cam.frame_index;
  asset.provenance = "visual-hull";
  return asset;
}

void canonicalize_asset(ObjectAsset& asset) {
  if (asset.mesh.vertices.empty()) throw GeometryError("canonicalize_asset: empty mesh");
  Vec3 centroid = Vec3::Zero();
  for (const auto& v : asset.mesh.vertices) centroid += v;
  centroid /= static_cast<double>(asset.mesh.vertices.size());
  Eigen::AlignedBox3d box = asset.mesh.bbox();
  double s0 = box.sizes().maxCoeff();
  if (s0 <= 0) throw GeometryError("canonicalize_asset: degenerate bbox");

  for (auto& v : asset.mesh.vertices) v = (v - centroid) / s0;
  float log_s0 = static_cast<float>(std::log(s0));
  for (auto& g : asset.gaussians.primitives) {
    Vec3 c = (g.center() - centroid) / s0;
    g.center_raw = c.cast<float>();
    g.log_scale_raw.array() -= log_s0;
  }
  for (auto& pl : asset.mesh.planes) pl.offset = (pl.offset - pl.normal.dot(centroid)) / s0;
  asset.canonical_scale *= s0;
}

void save_asset(const ObjectAsset& asset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_scene(asset.gaussians, dir / "gaussians.ply");
  save_mesh_obj(asset.mesh, dir / "mesh.obj");
  nlohmann::json j = {{"object_id", asset.object_id},
                      {"source_view", asset.source_view},
                      {"provenance", asset.provenance},
                      {"canonical_scale", asset.canonical_scale}};
  std::ofstream out(dir / "asset.json");
  if (!out) throw DataError("save_asset: cannot open " + (dir / "asset.json").string());
  out << j.dump(2) << "\n";
}

ObjectAsset load_asset(const std::filesystem::path& dir) {
  ObjectAsset asset;
  asset.gaussians = load_scene(dir / "gaussians.ply");
  asset.mesh = load_mesh_obj(dir / "mesh.obj");
  std::ifstream in(dir / "asset.json");
  if (!in) throw DataError("load_asset: cannot open " + (dir / "asset.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("load_asset: bad asset.json: " + std::string(e.what()));
  }
  asset.object_id = j.value("object_id", 0);
  asset.source_view = j.value("source_view", -1);
  asset.provenance = j.value("provenance", std::string());
  asset.canonical_scale = j.value("canonical_scale", 1.0);
  return asset;
}

}  // namespace worldact
