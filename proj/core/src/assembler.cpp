#include "worldact/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "worldact/backends.hpp"
#include "worldact/errors.hpp"
#include "worldact/renderer.hpp"

namespace worldact {

GaussianScene transform_gaussians(const GaussianScene& scene, const PlacementPose& pose,
                                  int label) {
  Mat3 r = pose.rotation();
  Eigen::Quaterniond qr(r);
  float log_s = static_cast<float>(std::log(pose.scale));
  GaussianScene out = scene;
  for (auto& g : out.primitives) {
    Vec3 c = pose.apply(g.center());
    g.center_raw = c.cast<float>();
    g.log_scale_raw.array() += log_s;
    Eigen::Quaterniond q = qr * g.rotation();
    g.rot_raw = Eigen::Vector4f(static_cast<float>(q.w()), static_cast<float>(q.x()),
                                static_cast<float>(q.y()), static_cast<float>(q.z()));
  }
  if (label >= 0) out.labels.assign(out.primitives.size(), label);
  return out;
}

PlacementPose select_pose(const std::vector<IcpCandidate>& candidates,
                          const ObjectAsset& asset, const CameraFrame& view,
                          const ImageU8& reference, EmbedClient& embedder) {
  if (candidates.empty()) throw ArgumentError("select_pose: no candidates");
  Eigen::VectorXd ref = embedder.embed(reference);

  const IcpCandidate* best = nullptr;
  double best_sim = -2;
  for (const auto& cand : candidates) {
    GaussianScene placed = transform_gaussians(asset.gaussians, cand.pose);
    RenderedFrame frame = render(placed, view);
    Eigen::VectorXd emb = embedder.embed(quantize_to_u8(frame.color));
    double sim = emb.size() == ref.size() ? emb.dot(ref) : -1;
    if (!best || sim > best_sim + 1e-12 ||
        (std::abs(sim - best_sim) <= 1e-12 && cand.residual < best->residual)) {
      best = &cand;
      best_sim = sim;
    }
  }
  return best->pose;
}

namespace {

std::vector<Vec3> pose_surface_samples(const PlacementPose& pose, const ObjectAsset& asset,
                                       const AlignConfig& cfg) {
  std::vector<Vec3> pts =
      asset.mesh.sample_surface(static_cast<size_t>(cfg.penetration_samples), cfg.seed);
  for (auto& p : pts) p = pose.apply(p);
  return pts;
}

}  // namespace

double align_loss(const PlacementPose& pose, const ObjectAsset& asset, MeshSdf& background,
                  const std::optional<PlaneParam>& floor, const MaskStack& target_masks,
                  const Trajectory& cams, const AlignConfig& cfg,
                  AlignComponents* components) {
  AlignComponents comp;

  // Silhouette agreement: mean (1 - soft IoU) across the target views.
  GaussianScene placed = transform_gaussians(asset.gaussians, pose);
  double mask_sum = 0;
  int views = 0;
  for (const auto& [t, mask] : target_masks.masks) {
    const CameraFrame* cam = cams.find(t);
    if (!cam) throw ArgumentError("align_loss: view " + std::to_string(t) +
                                  " missing from trajectory");
    ImageF soft = render_silhouette(placed, *cam);
    double inter = 0, a = 0, b = 0;
    for (int r = 0; r < soft.height(); ++r)
      for (int c = 0; c < soft.width(); ++c) {
        double s = soft.at(r, c), m = mask.at(r, c) ? 1.0 : 0.0;
        inter += s * m;
        a += s;
        b += m;
      }
    double uni = a + b - inter;
    mask_sum += uni <= 0 ? 1.0 : 1.0 - inter / uni;
    ++views;
  }
  comp.mask = views ? mask_sum / views : 0.0;

  std::vector<Vec3> samples = pose_surface_samples(pose, asset, cfg);

  // Support: squared gap from the lowest-percentile points to the floor plane.
  if (floor) {
    std::vector<double> heights(samples.size());
    Vec3 up = cfg.up.normalized();
    for (size_t i = 0; i < samples.size(); ++i) heights[i] = up.dot(samples[i]);
    size_t k = std::max<size_t>(1, static_cast<size_t>(
        std::llround(cfg.contact_percentile * static_cast<double>(samples.size()))));
    std::vector<size_t> order(samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::nth_element(order.begin(), order.begin() + static_cast<long>(k - 1), order.end(),
                     [&](size_t a, size_t b) { return heights[a] < heights[b]; });
    double sum = 0;
    for (size_t i = 0; i < k; ++i) {
      double d = floor->normal.dot(samples[order[i]]) - floor->offset;
      sum += d * d;
    }
    comp.contact = sum / static_cast<double>(k);
  } else {
    comp.contact_skipped = true;
  }

  // Penetration: squared hinge on the background SDF (negative = inside).
  double pen = 0;
  for (const auto& p : samples) {
    double sd = background.signed_distance(p);
    if (sd < 0) pen += sd * sd;
  }
  comp.penetration = pen / static_cast<double>(samples.size());

  if (components) *components = comp;
  return comp.total(cfg);
}

namespace {

Eigen::Matrix<double, 10, 1> pack_pose(const PlacementPose& pose) {
  Eigen::Matrix<double, 10, 1> x;
  x.head<3>() = pose.translation;
  x.segment<6>(3) = pose.r6;
  x[9] = pose.scale;
  return x;
}

PlacementPose unpack_pose(const Eigen::Matrix<double, 10, 1>& x) {
  PlacementPose pose;
  pose.translation = x.head<3>();
  pose.r6 = x.segment<6>(3);
  pose.scale = x[9];
  return pose;
}

}  // namespace

Eigen::Matrix<double, 10, 1> align_loss_gradient(const PlacementPose& pose,
                                                 const ObjectAsset& asset, MeshSdf& background,
                                                 const std::optional<PlaneParam>& floor,
                                                 const MaskStack& target_masks,
                                                 const Trajectory& cams, const AlignConfig& cfg,
                                                 double step) {
  Eigen::Matrix<double, 10, 1> x = pack_pose(pose);
  Eigen::Matrix<double, 10, 1> grad;
  double diag = asset.mesh.bbox().diagonal().norm() * pose.scale;
  for (int i = 0; i < 10; ++i) {
    double h = step;
    if (i < 3) h = step * std::max(diag, 1e-6);       // translations scale with the object
    if (i == 9) h = step * std::max(pose.scale, 1e-6);
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double lp = align_loss(unpack_pose(xp), asset, background, floor, target_masks, cams, cfg);
    double lm = align_loss(unpack_pose(xm), asset, background, floor, target_masks, cams, cfg);
    grad[i] = (lp - lm) / (2 * h);
  }
  return grad;
}

PlacementPose refine_pose(const PlacementPose& init, const ObjectAsset& asset,
                          MeshSdf& background, const std::optional<PlaneParam>& floor,
                          const MaskStack& target_masks, const Trajectory& cams,
                          const AlignConfig& cfg, AlignComponents* final_components,
                          std::vector<double>* loss_trace) {
  PlacementPose pose = init;
  // Optimizing over every target view is wasteful; an evenly spaced subset
  // pins down the pose just as well and each loss evaluation is FD-amplified.
  MaskStack views = target_masks;
  if (cfg.refine_view_cap > 0 &&
      target_masks.masks.size() > static_cast<size_t>(cfg.refine_view_cap)) {
    std::vector<int> keys;
    for (const auto& [t, _] : target_masks.masks) keys.push_back(t);
    views.masks.clear();
    size_t n = keys.size(), k = static_cast<size_t>(cfg.refine_view_cap);
    for (size_t i = 0; i < k; ++i) {
      int t = keys[i * (n - 1) / (k - 1 > 0 ? k - 1 : 1)];
      views.masks[t] = target_masks.masks.at(t);
    }
  }
  AlignComponents comp;
  double loss = align_loss(pose, asset, background, floor, views, cams, cfg, &comp);
  if (loss_trace) loss_trace->push_back(loss);
  double diag = std::max(asset.mesh.bbox().diagonal().norm() * init.scale, 1e-9);

  for (int iter = 0; iter < cfg.refine_max_iters; ++iter) {
    Eigen::Matrix<double, 10, 1> g = align_loss_gradient(pose, asset, background, floor,
                                                         views, cams, cfg, 1e-5);
    // Per-block scaling keeps the step size meaningful across units.
    Eigen::Matrix<double, 10, 1> dir = -g;
    dir.head<3>() *= diag * diag;
    dir[9] *= pose.scale * pose.scale;
    double dnorm = dir.norm();
    if (dnorm < 1e-15) break;

    Eigen::Matrix<double, 10, 1> x = pack_pose(pose);
    double alpha = 1.0;
    // Cap the first trial so no parameter moves more than ~2% of its scale.
    double max_move = std::max({dir.head<3>().norm() / diag, dir.segment<6>(3).norm(),
                                std::abs(dir[9]) / pose.scale});
    if (max_move > 0.02) alpha = 0.02 / max_move;

    bool accepted = false;
    double gdotd = g.dot(dir);
    for (int bt = 0; bt < 30; ++bt) {
      PlacementPose trial = unpack_pose(x + alpha * dir);
      if (trial.scale < cfg.scale_min || trial.scale > cfg.scale_max) {
        trial.scale = std::clamp(trial.scale, cfg.scale_min, cfg.scale_max);
        comp.scale_clamped = true;
      }
      AlignComponents tc;
      double tl;
      try {
        tl = align_loss(trial, asset, background, floor, views, cams, cfg, &tc);
      } catch (const ArgumentError&) {
        alpha *= 0.5;
        continue;
      }
      if (tl <= loss + 1e-4 * alpha * gdotd && tl <= loss) {
        double rel = (loss - tl) / std::max(std::abs(loss), 1e-12);
        bool clamped = tc.scale_clamped || comp.scale_clamped;
        pose = trial;
        loss = tl;
        comp = tc;
        comp.scale_clamped = clamped;
        if (loss_trace) loss_trace->push_back(loss);
        accepted = true;
        if (rel < cfg.refine_tol) iter = cfg.refine_max_iters;  // converged
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  if (final_components) *final_components = comp;
  return pose;
}

GaussianScene compose_scene(const AssembledScene& assembly) {
  GaussianScene out = assembly.background;
  if (out.labels.size() != out.size()) out.labels.assign(out.size(), 0);
  for (const auto& obj : assembly.objects) {
    GaussianScene placed = transform_gaussians(obj.asset.gaussians, obj.pose, obj.object_id);
    out.primitives.insert(out.primitives.end(), placed.primitives.begin(),
                          placed.primitives.end());
    out.labels.insert(out.labels.end(), placed.labels.begin(), placed.labels.end());
  }
  return out;
}

void save_assembly(const AssembledScene& assembly, const std::filesystem::path& dir,
                   const std::string& settings_json) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_scene(assembly.background, dir / "background.ply");
  save_mesh_obj(assembly.collision, dir / "collision.obj");

  nlohmann::json manifest;
  manifest["background"] = "background.ply";
  manifest["collision"] = "collision.obj";
  try {
    manifest["settings"] = nlohmann::json::parse(settings_json);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("save_assembly: settings_json is not valid JSON: " +
                        std::string(e.what()));
  }
  manifest["objects"] = nlohmann::json::array();
  char buf[32];
  for (const auto& obj : assembly.objects) {
    std::snprintf(buf, sizeof(buf), "assets/obj_%03d", obj.object_id);
    save_asset(obj.asset, dir / buf);
    Mat3 r = obj.pose.rotation();
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double v;
        if (i < 3 && j < 3) v = r(i, j);
        else if (i < 3) v = obj.pose.translation[i];
        else v = j == 3 ? 1.0 : 0.0;
        m.push_back(v);
      }
    manifest["objects"].push_back({{"id", obj.object_id},
                                   {"path", buf},
                                   {"pose", m},
                                   {"scale", obj.pose.scale}});
  }
  std::ofstream out(dir / "scene.manifest.json");
  if (!out) throw DataError("save_assembly: cannot open scene.manifest.json");
  out << manifest.dump(2) << "\n";
}

AssembledScene load_assembly(const std::filesystem::path& dir) {
  std::ifstream in(dir / "scene.manifest.json");
  if (!in) throw DataError("load_assembly: cannot open " +
                           (dir / "scene.manifest.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("load_assembly: bad manifest: " + std::string(e.what()));
  }

  AssembledScene out;
  out.background = load_scene(dir / manifest.at("background").get<std::string>());
  out.collision = load_mesh_obj(dir / manifest.at("collision").get<std::string>());
  for (const auto& jo : manifest.value("objects", nlohmann::json::array())) {
    PlacedObject obj;
    obj.object_id = jo.at("id");
    obj.asset = load_asset(dir / jo.at("path").get<std::string>());
    const auto& m = jo.at("pose");
    if (m.size() != 16) throw FormatError("load_assembly: pose must have 16 entries");
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) r(i, j) = m[i * 4 + j];
      obj.pose.translation[i] = m[i * 4 + 3];
    }
    obj.pose.r6 = rotation_to_r6(r);
    obj.pose.scale = jo.at("scale");
    out.objects.push_back(std::move(obj));
  }
  return out;
}

}  // namespace worldact
