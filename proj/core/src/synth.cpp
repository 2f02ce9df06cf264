#include "worldact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "worldact/errors.hpp"

namespace worldact {

namespace {
constexpr double kPi = std::numbers::pi;
}

ShapeKind shape_from_name(const std::string& name) {
  if (name == "box") return ShapeKind::Box;
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "cylinder") return ShapeKind::Cylinder;
  throw ConfigError("unknown shape '" + name + "'");
}

const char* shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Box: return "box";
    case ShapeKind::Sphere: return "sphere";
    default: return "cylinder";
  }
}

SynthSpec default_room_spec() {
  SynthSpec spec;
  spec.room = Vec3(4, 3, 4);
  spec.wall_density = 90;
  spec.seed = 1;

  SynthObjectSpec jar;
  jar.name = "jar";
  jar.aliases = {"container"};
  jar.shape = ShapeKind::Cylinder;
  jar.dims = Vec3(0.34, 0.44, 0.34);
  jar.position = Vec3(0.65, 0.22, 0.35);
  jar.color = Vec3(0.75, 0.35, 0.15);
  spec.objects.push_back(jar);

  SynthObjectSpec pillow;
  pillow.name = "pillow";
  pillow.shape = ShapeKind::Box;
  pillow.dims = Vec3(0.6, 0.18, 0.42);
  pillow.position = Vec3(-0.7, 0.09, -0.45);
  pillow.yaw = 0.5;
  pillow.color = Vec3(0.2, 0.45, 0.8);
  spec.objects.push_back(pillow);

  SynthObjectSpec ball;
  ball.name = "ball";
  ball.shape = ShapeKind::Sphere;
  ball.dims = Vec3(0.36, 0.36, 0.36);
  ball.position = Vec3(-0.15, 0.18, 0.85);
  ball.color = Vec3(0.25, 0.75, 0.3);
  spec.objects.push_back(ball);

  SynthObjectSpec table;
  table.name = "table";
  table.shape = ShapeKind::Box;
  table.dims = Vec3(1.0, 0.55, 0.7);
  table.position = Vec3(1.1, 0.275, -0.9);
  table.color = Vec3(0.5, 0.36, 0.22);
  table.portable = false;
  spec.objects.push_back(table);
  return spec;
}

namespace {

Mat3 yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix();
}

// Deterministic surface sampling of the primitive shapes (object frame,
// centered at the origin, up = +Y).
std::vector<Vec3> sample_shape_surface(const SynthObjectSpec& obj, double spacing,
                                       std::mt19937_64& rng, double jitter_frac) {
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  auto jit = [&] { return jitter_frac * spacing * uni(rng); };
  std::vector<Vec3> pts;

  auto sample_rect = [&](const Vec3& origin, const Vec3& du, const Vec3& dv) {
    // Rectangle origin + s*du + t*dv, s,t in [0,1].
    int nu = std::max(1, static_cast<int>(std::round(du.norm() / spacing)));
    int nv = std::max(1, static_cast<int>(std::round(dv.norm() / spacing)));
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        double s = (i + 0.5) / nu + jit() / std::max(du.norm(), 1e-9);
        double t = (j + 0.5) / nv + jit() / std::max(dv.norm(), 1e-9);
        pts.push_back(origin + std::clamp(s, 0.0, 1.0) * du + std::clamp(t, 0.0, 1.0) * dv);
      }
  };

  if (obj.shape == ShapeKind::Box) {
    Vec3 h = obj.dims / 2.0;
    // +/-X, +/-Y, +/-Z faces
    sample_rect(Vec3(h.x(), -h.y(), -h.z()), Vec3(0, 2 * h.y(), 0), Vec3(0, 0, 2 * h.z()));
    sample_rect(Vec3(-h.x(), -h.y(), -h.z()), Vec3(0, 2 * h.y(), 0), Vec3(0, 0, 2 * h.z()));
    sample_rect(Vec3(-h.x(), h.y(), -h.z()), Vec3(2 * h.x(), 0, 0), Vec3(0, 0, 2 * h.z()));
    sample_rect(Vec3(-h.x(), -h.y(), -h.z()), Vec3(2 * h.x(), 0, 0), Vec3(0, 0, 2 * h.z()));
    sample_rect(Vec3(-h.x(), -h.y(), h.z()), Vec3(2 * h.x(), 0, 0), Vec3(0, 2 * h.y(), 0));
    sample_rect(Vec3(-h.x(), -h.y(), -h.z()), Vec3(2 * h.x(), 0, 0), Vec3(0, 2 * h.y(), 0));
  } else if (obj.shape == ShapeKind::Sphere) {
    double r = obj.dims.x() / 2.0;
    int n = std::max(8, static_cast<int>(std::round(4.0 * kPi * r * r / (spacing * spacing))));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      double y = 1.0 - 2.0 * (i + 0.5) / n;
      double rad = std::sqrt(std::max(0.0, 1.0 - y * y));
      double phi = golden * i;
      pts.push_back(r * Vec3(rad * std::cos(phi), y, rad * std::sin(phi)));
    }
  } else {  // cylinder, axis +Y
    double r = obj.dims.x() / 2.0, h = obj.dims.y();
    int na = std::max(8, static_cast<int>(std::round(2.0 * kPi * r / spacing)));
    int nh = std::max(2, static_cast<int>(std::round(h / spacing)));
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nh; ++j) {
        double a = 2.0 * kPi * (i + 0.5) / na + jit() / std::max(r, 1e-9);
        double y = -h / 2 + (j + 0.5) / nh * h + jit();
        pts.push_back(Vec3(r * std::cos(a), std::clamp(y, -h / 2, h / 2), r * std::sin(a)));
      }
    // caps: concentric rings
    int nr = std::max(1, static_cast<int>(std::round(r / spacing)));
    for (int sgn : {-1, 1}) {
      pts.push_back(Vec3(0, sgn * h / 2, 0));
      for (int k = 1; k <= nr; ++k) {
        double rr = r * k / nr;
        int nc = std::max(6, static_cast<int>(std::round(2.0 * kPi * rr / spacing)));
        for (int i = 0; i < nc; ++i) {
          double a = 2.0 * kPi * (i + 0.5) / nc;
          pts.push_back(Vec3(rr * std::cos(a), sgn * h / 2, rr * std::sin(a)));
        }
      }
    }
  }
  return pts;
}

// World-space ray vs analytic shape; returns nearest positive hit distance.
std::optional<double> ray_shape(const SynthObjectSpec& obj, const Vec3& ro_w,
                                const Vec3& rd_w) {
  Mat3 r_inv = yaw_rotation(-obj.yaw);
  Vec3 ro = r_inv * (ro_w - obj.position);
  Vec3 rd = r_inv * rd_w;

  if (obj.shape == ShapeKind::Box) {
    Vec3 h = obj.dims / 2.0;
    double t0 = 0, t1 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      if (std::abs(rd[k]) < 1e-12) {
        if (std::abs(ro[k]) > h[k]) return std::nullopt;
        continue;
      }
      double ta = (-h[k] - ro[k]) / rd[k];
      double tb = (h[k] - ro[k]) / rd[k];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return std::nullopt;
    }
    return t0 > 1e-9 ? std::optional<double>(t0) : std::nullopt;
  }

  if (obj.shape == ShapeKind::Sphere) {
    double r = obj.dims.x() / 2.0;
    double b = ro.dot(rd), c = ro.squaredNorm() - r * r;
    double a = rd.squaredNorm();
    double disc = b * b - a * c;
    if (disc < 0) return std::nullopt;
    double t = (-b - std::sqrt(disc)) / a;
    return t > 1e-9 ? std::optional<double>(t) : std::nullopt;
  }

  // cylinder
  double r = obj.dims.x() / 2.0, hh = obj.dims.y() / 2.0;
  double best = std::numeric_limits<double>::infinity();
  double a = rd.x() * rd.x() + rd.z() * rd.z();
  if (a > 1e-14) {
    double b = ro.x() * rd.x() + ro.z() * rd.z();
    double c = ro.x() * ro.x() + ro.z() * ro.z() - r * r;
    double disc = b * b - a * c;
    if (disc >= 0) {
      for (double t : {(-b - std::sqrt(disc)) / a, (-b + std::sqrt(disc)) / a}) {
        if (t > 1e-9 && t < best && std::abs(ro.y() + t * rd.y()) <= hh) best = t;
      }
    }
  }
  if (std::abs(rd.y()) > 1e-12) {
    for (double cap : {-hh, hh}) {
      double t = (cap - ro.y()) / rd.y();
      if (t > 1e-9 && t < best) {
        Vec3 p = ro + t * rd;
        if (p.x() * p.x() + p.z() * p.z() <= r * r) best = t;
      }
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

CameraFrame look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                    int width, int height, double fov_deg, int frame_index) {
  Vec3 forward = (target - eye).normalized();
  Vec3 x_c = forward.cross(up).normalized();
  Vec3 y_c = forward.cross(x_c).normalized();
  CameraFrame cam;
  cam.rotation.row(0) = x_c;
  cam.rotation.row(1) = y_c;
  cam.rotation.row(2) = forward;
  if (cam.rotation.determinant() < 0) cam.rotation.row(1) = -y_c;
  cam.translation = -cam.rotation * eye;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = (width / 2.0) / std::tan(fov_deg * kPi / 360.0);
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.frame_index = frame_index;
  return cam;
}

Eigen::AlignedBox3d object_aabb(const SynthObjectSpec& obj) {
  Mat3 r = yaw_rotation(obj.yaw);
  Eigen::AlignedBox3d box;
  Vec3 h = obj.dims / 2.0;
  for (int c = 0; c < 8; ++c) {
    Vec3 corner(((c & 1) ? h.x() : -h.x()), ((c & 2) ? h.y() : -h.y()),
                ((c & 4) ? h.z() : -h.z()));
    box.extend(obj.position + r * corner);
  }
  return box;
}

}  // namespace

const SynthObjectTruth* SynthResult::find_object(const std::string& prompt) const {
  for (const auto& o : objects) {
    if (o.spec.name == prompt) return &o;
    for (const auto& a : o.spec.aliases)
      if (a == prompt) return &o;
  }
  return nullptr;
}

SynthResult generate(const SynthSpec& spec) {
  if ((spec.up - Vec3::UnitY()).norm() > 1e-9)
    throw ConfigError("synth: generator supports +Y up only");
  if ((spec.room.array() <= 0).any()) throw ConfigError("synth: non-positive room dims");

  // Validate object placement: inside the room and pairwise disjoint.
  for (size_t i = 0; i < spec.objects.size(); ++i) {
    Eigen::AlignedBox3d bi = object_aabb(spec.objects[i]);
    Eigen::AlignedBox3d room(Vec3(-spec.room.x() / 2, -1e-9, -spec.room.z() / 2),
                             Vec3(spec.room.x() / 2, spec.room.y() + 1e-9, spec.room.z() / 2));
    if (!room.contains(bi))
      throw ConfigError("synth: object '" + spec.objects[i].name + "' outside the room");
    for (size_t j = i + 1; j < spec.objects.size(); ++j)
      if (bi.intersects(object_aabb(spec.objects[j])))
        throw ConfigError("synth: objects '" + spec.objects[i].name + "' and '" +
                          spec.objects[j].name + "' overlap");
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);

  SynthResult out;
  out.spec = spec;

  double wx = spec.room.x() / 2, wh = spec.room.y(), wz = spec.room.z() / 2;
  double spacing = 1.0 / std::sqrt(spec.wall_density);
  double sigma = 0.5 * spacing;

  struct Wall {
    Vec3 origin, du, dv, normal;  // normal points into the room
    Vec3 color;
    FaceClass cls;
  };
  std::vector<Wall> walls = {
      {{-wx, 0, -wz}, {2 * wx, 0, 0}, {0, 0, 2 * wz}, {0, 1, 0}, {0.55, 0.5, 0.45}, FaceClass::Floor},
      {{-wx, wh, -wz}, {2 * wx, 0, 0}, {0, 0, 2 * wz}, {0, -1, 0}, {0.85, 0.85, 0.82}, FaceClass::Ceiling},
      {{-wx, 0, -wz}, {0, wh, 0}, {0, 0, 2 * wz}, {1, 0, 0}, {0.72, 0.68, 0.6}, FaceClass::Wall},
      {{wx, 0, -wz}, {0, wh, 0}, {0, 0, 2 * wz}, {-1, 0, 0}, {0.6, 0.68, 0.72}, FaceClass::Wall},
      {{-wx, 0, -wz}, {2 * wx, 0, 0}, {0, wh, 0}, {0, 0, 1}, {0.68, 0.72, 0.62}, FaceClass::Wall},
      {{-wx, 0, wz}, {2 * wx, 0, 0}, {0, wh, 0}, {0, 0, -1}, {0.7, 0.62, 0.68}, FaceClass::Wall}};

  auto add_gaussian = [&](const Vec3& p, const Vec3& color, int label) {
    GaussianPrimitive g = GaussianPrimitive::make(
        p, Vec3::Constant(sigma), Eigen::Quaterniond::Identity(), spec.opacity, color);
    out.scene.primitives.push_back(g);
    out.scene.labels.push_back(label);
  };

  for (const auto& w : walls) {
    int nu = std::max(1, static_cast<int>(std::round(w.du.norm() / spacing)));
    int nv = std::max(1, static_cast<int>(std::round(w.dv.norm() / spacing)));
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) {
        double s = (i + 0.5) / nu + spec.noise * spacing * uni(rng) / w.du.norm();
        double t = (j + 0.5) / nv + spec.noise * spacing * uni(rng) / w.dv.norm();
        Vec3 p = w.origin + std::clamp(s, 0.0, 1.0) * w.du + std::clamp(t, 0.0, 1.0) * w.dv;
        add_gaussian(p, w.color, 0);
      }
    }
    out.planes.push_back({w.normal, w.normal.dot(w.origin), w.cls});
  }

  int next_label = 1;
  for (const auto& obj : spec.objects) {
    double obj_spacing = 1.0 / std::sqrt(obj.density);
    auto pts = sample_shape_surface(obj, obj_spacing, rng, spec.noise);
    Mat3 r = yaw_rotation(obj.yaw);
    SynthObjectTruth truth;
    truth.label = next_label++;
    truth.spec = obj;
    double obj_sigma = 0.5 * obj_spacing;
    for (const Vec3& p : pts) {
      truth.member_indices.push_back(static_cast<int>(out.scene.size()));
      GaussianPrimitive g = GaussianPrimitive::make(
          obj.position + r * p, Vec3::Constant(obj_sigma),
          Eigen::Quaterniond::Identity(), spec.opacity, obj.color);
      out.scene.primitives.push_back(g);
      out.scene.labels.push_back(truth.label);
    }
    out.objects.push_back(std::move(truth));
  }

  const auto& ts = spec.trajectory;
  double orbit_r = ts.orbit_radius_frac * std::min(spec.room.x(), spec.room.z());
  Vec3 target(0, ts.target_height_frac * wh, 0);
  for (int k = 0; k < ts.frame_count; ++k) {
    double a = 2.0 * kPi * k / ts.frame_count;
    Vec3 eye(orbit_r * std::cos(a), ts.camera_height_frac * wh, orbit_r * std::sin(a));
    out.trajectory.frames.push_back(
        look_at(eye, target, Vec3::UnitY(), ts.width, ts.height, ts.fov_deg, k));
  }
  out.trajectory.validate();
  out.scene.validate();

  for (const auto& truth : out.objects) {
    MaskStack stack;
    stack.object_id = truth.label;
    for (const auto& cam : out.trajectory.frames) {
      Mask m = analytic_silhouette(out, truth.label, cam, true);
      if (mask_area(m) > 0) stack.masks[cam.frame_index] = std::move(m);
    }
    out.masks[truth.label] = std::move(stack);
  }
  return out;
}

Mask analytic_silhouette(const SynthResult& truth, int label, const CameraFrame& cam,
                         bool occlusion) {
  const SynthObjectTruth* target = nullptr;
  for (const auto& o : truth.objects)
    if (o.label == label) target = &o;
  if (!target) throw ArgumentError("analytic_silhouette: unknown label " + std::to_string(label));

  Vec3 origin = cam.camera_origin();
  Mask m(cam.height, cam.width, 1);
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      Vec3 dir_cam((c + 0.5 - cam.cx) / cam.fx, (r + 0.5 - cam.cy) / cam.fy, 1.0);
      Vec3 dir = (cam.rotation.transpose() * dir_cam).normalized();
      auto t_hit = ray_shape(target->spec, origin, dir);
      if (!t_hit) continue;
      bool visible = true;
      if (occlusion) {
        for (const auto& o : truth.objects) {
          if (o.label == label) continue;
          auto t_other = ray_shape(o.spec, origin, dir);
          if (t_other && *t_other < *t_hit) { visible = false; break; }
        }
      }
      m.at(r, c) = visible ? 1 : 0;
    }
  }
  return m;
}

RenderedFrame oracle_brute_render(const GaussianScene& scene, const CameraFrame& cam,
                                  const RenderOptions& opts) {
  // Independent reference: its own projection math, per-pixel loop over all
  // Gaussians in exact depth order, no tiles or bins.
  struct Flat {
    double depth;
    int index;
    double mx, my;        // projected mean
    double ia, ib, ic;    // inverse 2x2 covariance (a b; b c)
    double opacity;
    Vec3 color;
  };
  std::vector<Flat> flats;
  for (size_t i = 0; i < scene.size(); ++i) {
    const auto& g = scene.primitives[i];
    Vec3 t = cam.rotation * g.center() + cam.translation;
    if (t.z() < opts.near_plane || t.z() > opts.far_plane) continue;
    double op = g.opacity();
    if (op < opts.opacity_floor) continue;
    Mat3 cov = g.covariance();
    Mat3 cov_cam = cam.rotation * cov * cam.rotation.transpose();
    double z = t.z();
    double j00 = cam.fx / z, j02 = -cam.fx * t.x() / (z * z);
    double j11 = cam.fy / z, j12 = -cam.fy * t.y() / (z * z);
    // 2x2 = J C J^T, expanded by hand
    double a = j00 * (j00 * cov_cam(0, 0) + j02 * cov_cam(2, 0)) +
               j02 * (j00 * cov_cam(0, 2) + j02 * cov_cam(2, 2)) + 1e-9;
    double b = j00 * (j11 * cov_cam(0, 1) + j12 * cov_cam(0, 2)) +
               j02 * (j11 * cov_cam(2, 1) + j12 * cov_cam(2, 2));
    double c = j11 * (j11 * cov_cam(1, 1) + j12 * cov_cam(2, 1)) +
               j12 * (j11 * cov_cam(1, 2) + j12 * cov_cam(2, 2)) + 1e-9;
    double det = a * c - b * b;
    if (det <= 0 || !std::isfinite(det)) continue;
    Flat f;
    f.depth = z;
    f.index = static_cast<int>(i);
    f.mx = cam.fx * t.x() / z + cam.cx;
    f.my = cam.fy * t.y() / z + cam.cy;
    f.ia = c / det;
    f.ib = -b / det;
    f.ic = a / det;
    f.opacity = op;
    f.color = g.color();
    flats.push_back(f);
  }
  std::sort(flats.begin(), flats.end(), [](const Flat& a, const Flat& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.index < b.index;
  });

  RenderedFrame out;
  out.color = ImageF(cam.height, cam.width, 3);
  out.depth = ImageF(cam.height, cam.width, 1);
  out.alpha = ImageF(cam.height, cam.width, 1);
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      double px = c + 0.5, py = r + 0.5;
      Vec3 color = Vec3::Zero();
      double depth = 0, alpha = 0, trans = 1.0;
      for (const Flat& f : flats) {
        double dx = px - f.mx, dy = py - f.my;
        double q = f.ia * dx * dx + 2.0 * f.ib * dx * dy + f.ic * dy * dy;
        if (q > opts.falloff_cutoff_sq || q < 0) continue;
        double a = f.opacity * std::exp(-0.5 * q);
        if (a < opts.opacity_floor) continue;
        a = std::min(a, opts.alpha_clamp);
        double w = a * trans;
        color += w * f.color;
        depth += w * f.depth;
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

namespace {

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 json_vec3(const nlohmann::json& j) { return Vec3(j[0], j[1], j[2]); }

}  // namespace

void save_synth_spec(const SynthSpec& spec, const std::filesystem::path& path) {
  nlohmann::json j;
  j["room"] = vec3_json(spec.room);
  j["up"] = vec3_json(spec.up);
  j["wall_density"] = spec.wall_density;
  j["noise"] = spec.noise;
  j["seed"] = spec.seed;
  j["opacity"] = spec.opacity;
  j["trajectory"] = {{"frame_count", spec.trajectory.frame_count},
                     {"width", spec.trajectory.width},
                     {"height", spec.trajectory.height},
                     {"fov_deg", spec.trajectory.fov_deg},
                     {"orbit_radius_frac", spec.trajectory.orbit_radius_frac},
                     {"camera_height_frac", spec.trajectory.camera_height_frac},
                     {"target_height_frac", spec.trajectory.target_height_frac}};
  j["objects"] = nlohmann::json::array();
  for (const auto& o : spec.objects) {
    j["objects"].push_back({{"name", o.name},
                            {"aliases", o.aliases},
                            {"shape", shape_name(o.shape)},
                            {"dims", vec3_json(o.dims)},
                            {"position", vec3_json(o.position)},
                            {"yaw", o.yaw},
                            {"color", vec3_json(o.color)},
                            {"portable", o.portable},
                            {"recognizability", o.recognizability},
                            {"discoverable", o.discoverable},
                            {"density", o.density}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("save_synth_spec: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_synth_spec: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("load_synth_spec: bad JSON: " + std::string(e.what()));
  }
  SynthSpec spec;
  if (j.contains("room")) spec.room = json_vec3(j["room"]);
  if (j.contains("up")) spec.up = json_vec3(j["up"]);
  spec.wall_density = j.value("wall_density", spec.wall_density);
  spec.noise = j.value("noise", spec.noise);
  spec.seed = j.value("seed", spec.seed);
  spec.opacity = j.value("opacity", spec.opacity);
  if (j.contains("trajectory")) {
    const auto& t = j["trajectory"];
    spec.trajectory.frame_count = t.value("frame_count", spec.trajectory.frame_count);
    spec.trajectory.width = t.value("width", spec.trajectory.width);
    spec.trajectory.height = t.value("height", spec.trajectory.height);
    spec.trajectory.fov_deg = t.value("fov_deg", spec.trajectory.fov_deg);
    spec.trajectory.orbit_radius_frac =
        t.value("orbit_radius_frac", spec.trajectory.orbit_radius_frac);
    spec.trajectory.camera_height_frac =
        t.value("camera_height_frac", spec.trajectory.camera_height_frac);
    spec.trajectory.target_height_frac =
        t.value("target_height_frac", spec.trajectory.target_height_frac);
  }
  for (const auto& jo : j.value("objects", nlohmann::json::array())) {
    SynthObjectSpec o;
    o.name = jo.at("name");
    o.aliases = jo.value("aliases", std::vector<std::string>{});
    o.shape = shape_from_name(jo.value("shape", "box"));
    if (jo.contains("dims")) o.dims = json_vec3(jo["dims"]);
    if (jo.contains("position")) o.position = json_vec3(jo["position"]);
    o.yaw = jo.value("yaw", 0.0);
    if (jo.contains("color")) o.color = json_vec3(jo["color"]);
    o.portable = jo.value("portable", true);
    o.recognizability = jo.value("recognizability", std::string("precise"));
    o.discoverable = jo.value("discoverable", true);
    o.density = jo.value("density", o.density);
    spec.objects.push_back(o);
  }
  return spec;
}

void export_synth(const SynthResult& truth, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  save_scene(truth.scene, out_dir / "scene.ply");
  save_trajectory(truth.trajectory, out_dir / "trajectory.json");
  save_synth_spec(truth.spec, out_dir / "spec.json");

  char buf[64];
  for (const auto& [label, stack] : truth.masks) {
    std::snprintf(buf, sizeof(buf), "obj_%03d", label);
    fs::path dir = out_dir / "masks" / buf;
    fs::create_directories(dir);
    for (const auto& [t, mask] : stack.masks) {
      std::snprintf(buf, sizeof(buf), "frame_%05d.png", t);
      write_mask_png(dir / buf, mask);
    }
  }

  nlohmann::json j;
  j["labels"] = truth.scene.labels;
  j["planes"] = nlohmann::json::array();
  for (const auto& p : truth.planes)
    j["planes"].push_back({{"normal", vec3_json(p.normal)},
                           {"offset", p.offset},
                           {"class", face_class_name(p.cls)}});
  j["objects"] = nlohmann::json::array();
  for (const auto& o : truth.objects)
    j["objects"].push_back({{"label", o.label},
                            {"name", o.spec.name},
                            {"portable", o.spec.portable},
                            {"shape", shape_name(o.spec.shape)},
                            {"dims", vec3_json(o.spec.dims)},
                            {"position", vec3_json(o.spec.position)},
                            {"yaw", o.spec.yaw},
                            {"member_count", o.member_indices.size()}});
  std::ofstream out(out_dir / "truth.json");
  if (!out) throw DataError("export_synth: cannot open truth.json");
  out << j.dump(2) << "\n";
}

}  // namespace worldact
