#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "worldact/collision.hpp"
#include "worldact/errors.hpp"

namespace worldact {

namespace {

struct FitResult {
  Vec3 normal;
  double offset;
};

// Least-squares plane through a subset of points (PCA refit).
FitResult refit_plane(const std::vector<Vec3>& points, const std::vector<int>& idx) {
  Vec3 mean = Vec3::Zero();
  for (int i : idx) mean += points[i];
  mean /= static_cast<double>(idx.size());
  Mat3 cov = Mat3::Zero();
  for (int i : idx) {
    Vec3 d = points[i] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Vec3 n = eig.eigenvectors().col(0).normalized();
  return {n, n.dot(mean)};
}

FaceClass classify_normal(const Vec3& normal, const Vec3& up, double offset,
                          double centroid_height) {
  double a = std::abs(normal.dot(up));
  constexpr double kDeg = std::numbers::pi / 180.0;
  if (a >= std::cos(15.0 * kDeg)) {
    // Horizontal: floor below the scene centroid, ceiling above.
    double plane_height = normal.dot(up) >= 0 ? offset : -offset;
    return plane_height < centroid_height ? FaceClass::Floor : FaceClass::Ceiling;
  }
  if (a <= std::cos(75.0 * kDeg)) return FaceClass::Wall;
  return FaceClass::Free;
}

}  // namespace

std::vector<PlaneHypothesis> detect_planes(const std::vector<Vec3>& points,
                                           const RansacConfig& cfg) {
  if (points.size() < 3) throw GeometryError("detect_planes: need at least 3 points");

  Eigen::AlignedBox3d box;
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) {
    box.extend(p);
    centroid += p;
  }
  centroid /= static_cast<double>(points.size());
  double thresh = cfg.distance_threshold > 0 ? cfg.distance_threshold
                                             : 0.005 * box.diagonal().norm();
  Vec3 up = cfg.up.normalized();
  double centroid_height = up.dot(centroid);

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> active(points.size());
  for (size_t i = 0; i < points.size(); ++i) active[i] = static_cast<int>(i);

  std::vector<PlaneHypothesis> planes;
  size_t total = points.size();
  while (static_cast<int>(planes.size()) < cfg.max_planes && active.size() >= 3) {
    std::uniform_int_distribution<size_t> pick(0, active.size() - 1);
    size_t best_count = 0;
    Vec3 best_n;
    double best_d = 0;
    for (int it = 0; it < cfg.iterations_per_plane; ++it) {
      int a = active[pick(rng)], b = active[pick(rng)], c = active[pick(rng)];
      Vec3 n = (points[b] - points[a]).cross(points[c] - points[a]);
      double len = n.norm();
      if (len < 1e-12) continue;
      n /= len;
      double d = n.dot(points[a]);
      size_t count = 0;
      for (int i : active)
        if (std::abs(n.dot(points[i]) - d) <= thresh) ++count;
      if (count > best_count) {
        best_count = count;
        best_n = n;
        best_d = d;
      }
    }
    if (best_count < 3 ||
        static_cast<double>(best_count) / total < cfg.min_inlier_fraction)
      break;

    PlaneHypothesis hyp;
    for (int i : active)
      if (std::abs(best_n.dot(points[i]) - best_d) <= thresh) hyp.inliers.push_back(i);
    // PCA refit on the consensus set, then re-collect inliers once.
    FitResult fit = refit_plane(points, hyp.inliers);
    hyp.inliers.clear();
    std::vector<int> remaining;
    for (int i : active) {
      if (std::abs(fit.normal.dot(points[i]) - fit.offset) <= thresh)
        hyp.inliers.push_back(i);
      else
        remaining.push_back(i);
    }
    if (hyp.inliers.size() < 3 ||
        static_cast<double>(hyp.inliers.size()) / total < cfg.min_inlier_fraction)
      break;
    hyp.normal = fit.normal;
    hyp.offset = fit.offset;
    hyp.cls = classify_normal(hyp.normal, up, hyp.offset, centroid_height);
    planes.push_back(std::move(hyp));
    active = std::move(remaining);
  }
  return planes;
}

CollisionMesh planarize(const CollisionMesh& mesh,
                        const std::vector<PlaneHypothesis>& planes,
                        const PlanarizeConfig& cfg, PlanarizeStats* stats) {
  CollisionMesh out = mesh;
  double snap = cfg.snap_distance > 0
                    ? cfg.snap_distance
                    : 2.0 * 0.005 * mesh.bbox().diagonal().norm();
  PlanarizeStats local{};

  for (auto& v : out.vertices) {
    double best = snap;
    const PlaneHypothesis* best_plane = nullptr;
    for (const auto& pl : planes) {
      double d = pl.distance(v);
      if (d <= best) {
        best = d;
        best_plane = &pl;
      }
    }
    if (best_plane) {
      v -= (best_plane->normal.dot(v) - best_plane->offset) * best_plane->normal;
      ++local.snapped_vertices;
    }
  }

  // Tag faces whose three vertices all landed on the same plane.
  out.face_class.assign(out.faces.size(), FaceClass::Free);
  constexpr double kOnPlane = 1e-9;
  for (size_t f = 0; f < out.faces.size(); ++f) {
    const auto& t = out.faces[f];
    for (const auto& pl : planes) {
      bool all_on = true;
      for (int k = 0; k < 3 && all_on; ++k)
        all_on = pl.distance(out.vertices[t[k]]) <= kOnPlane * (1.0 + std::abs(pl.offset));
      if (all_on) {
        out.face_class[f] = pl.cls;
        break;
      }
    }
    Vec3 e1 = out.vertices[t[1]] - out.vertices[t[0]];
    Vec3 e2 = out.vertices[t[2]] - out.vertices[t[0]];
    if (e1.cross(e2).norm() < 1e-18) ++local.degenerate_faces;
  }
  out.planes.clear();
  for (const auto& pl : planes) out.planes.push_back(pl.param());
  if (stats) *stats = local;
  return out;
}

}  // namespace worldact
