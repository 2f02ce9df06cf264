#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "worldact/assembler.hpp"
#include "worldact/errors.hpp"

namespace worldact {

Mat3 r6_to_rotation(const Vec6& r6) {
  Vec3 a = r6.head<3>();
  if (a.norm() < 1e-12) throw ArgumentError("r6_to_rotation: zero first vector");
  a.normalize();
  Vec3 b = r6.tail<3>() - a.dot(r6.tail<3>()) * a;
  if (b.norm() < 1e-12) throw ArgumentError("r6_to_rotation: degenerate second vector");
  b.normalize();
  Mat3 r;
  r.col(0) = a;
  r.col(1) = b;
  r.col(2) = a.cross(b);
  return r;
}

Vec6 rotation_to_r6(const Mat3& r) {
  Vec6 v;
  v.head<3>() = r.col(0);
  v.tail<3>() = r.col(1);
  return v;
}

Mat3 PlacementPose::rotation() const { return r6_to_rotation(r6); }

namespace {

// Uniform hash grid for nearest-neighbor queries on the anchor cloud.
class NnGrid {
 public:
  explicit NnGrid(const std::vector<Vec3>& pts) : pts_(pts) {
    Eigen::AlignedBox3d box;
    for (const auto& p : pts) box.extend(p);
    double diag = std::max(box.diagonal().norm(), 1e-9);
    cell_ = diag / std::max(4.0, std::cbrt(static_cast<double>(pts.size())));
    origin_ = box.min();
    extent_ = coords(box.max()).array().max(1).maxCoeff();
    for (size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(static_cast<int>(i));
  }

  int nearest(const Vec3& q) const {
    // Queries far outside the occupied cells (or non-finite, e.g. from a
    // diverged iterate) skip the ring walk entirely.
    if (!q.allFinite()) return brute(q);
    Eigen::Vector3i c = coords(q);
    if (c.array().abs().maxCoeff() > 2 * extent_) return brute(q);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    int max_ring = 2 * extent_ + 1;
    for (int ring = 0; ring <= max_ring; ++ring) {
      for (int dx = -ring; dx <= ring; ++dx)
        for (int dy = -ring; dy <= ring; ++dy) {
          // Only the shell of the cube: interior z values are skipped in O(1).
          int step = (std::max(std::abs(dx), std::abs(dy)) == ring) ? 1 : 2 * ring;
          if (step == 0) step = 1;
          for (int dz = -ring; dz <= ring; dz += step) {
            auto it = cells_.find(pack(c.x() + dx, c.y() + dy, c.z() + dz));
            if (it == cells_.end()) continue;
            for (int i : it->second) {
              double d2 = (pts_[i] - q).squaredNorm();
              if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
              }
            }
          }
        }
      if (best >= 0) {
        // Anything closer than best must live within this many rings.
        max_ring = std::min(max_ring, static_cast<int>(std::sqrt(best_d2) / cell_) + 1);
      }
    }
    if (best < 0) return brute(q);
    return best;
  }

 private:
  int brute(const Vec3& q) const {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pts_.size(); ++i) {
      double d2 = (pts_[i] - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  Eigen::Vector3i coords(const Vec3& p) const {
    return Eigen::Vector3i(static_cast<int>(std::floor((p.x() - origin_.x()) / cell_)),
                           static_cast<int>(std::floor((p.y() - origin_.y()) / cell_)),
                           static_cast<int>(std::floor((p.z() - origin_.z()) / cell_)));
  }
  int64_t key(const Vec3& p) const {
    Eigen::Vector3i c = coords(p);
    return pack(c.x(), c.y(), c.z());
  }
  static int64_t pack(int x, int y, int z) {
    return (static_cast<int64_t>(x) << 42) ^ (static_cast<int64_t>(y) << 21) ^
           static_cast<int64_t>(z);
  }

  const std::vector<Vec3>& pts_;
  Vec3 origin_;
  double cell_ = 1;
  int extent_ = 1;
  std::unordered_map<int64_t, std::vector<int>> cells_;
};

struct Similarity {
  Mat3 r = Mat3::Identity();
  double s = 1;
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return s * (r * p) + t; }
};

}  // namespace

std::vector<IcpCandidate> icp_candidates(const std::vector<Vec3>& asset_points,
                                         const std::vector<Vec3>& anchor_points,
                                         const AlignConfig& cfg) {
  if (asset_points.size() < 3 || anchor_points.size() < 3)
    throw GeometryError("icp_candidates: need at least 3 points per cloud");

  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  Eigen::AlignedBox3d ba, bb;
  for (const auto& p : asset_points) {
    ca += p;
    ba.extend(p);
  }
  for (const auto& p : anchor_points) {
    cb += p;
    bb.extend(p);
  }
  ca /= static_cast<double>(asset_points.size());
  cb /= static_cast<double>(anchor_points.size());
  double diag_a = ba.diagonal().norm(), diag_b = bb.diagonal().norm();
  if (diag_a < 1e-12 || diag_b < 1e-12)
    throw GeometryError("icp_candidates: degenerate point cloud");
  double s0 = diag_b / diag_a;

  NnGrid grid(anchor_points);
  Vec3 up = cfg.up.normalized();
  // A horizontal axis for the upside-down flip.
  Vec3 side = std::abs(up.x()) < 0.9 ? up.cross(Vec3::UnitX()).normalized()
                                     : up.cross(Vec3::UnitY()).normalized();

  std::vector<IcpCandidate> out;
  int flips = cfg.try_flip ? 2 : 1;
  for (int k = 0; k < cfg.candidate_yaws; ++k) {
    double yaw = 2.0 * std::numbers::pi * k / cfg.candidate_yaws;
    for (int f = 0; f < flips; ++f) {
      Similarity cur;
      cur.r = Eigen::AngleAxisd(yaw, up).toRotationMatrix();
      if (f) cur.r = cur.r * Eigen::AngleAxisd(std::numbers::pi, side).toRotationMatrix();
      cur.s = s0;
      cur.t = cb - cur.s * (cur.r * ca);

      double prev_rms = std::numeric_limits<double>::infinity();
      double rms = prev_rms;
      for (int it = 0; it < cfg.icp_max_iters; ++it) {
        Eigen::Matrix3Xd src(3, asset_points.size()), dst(3, asset_points.size());
        double sq = 0;
        for (size_t i = 0; i < asset_points.size(); ++i) {
          Vec3 moved = cur.apply(asset_points[i]);
          const Vec3& nn = anchor_points[grid.nearest(moved)];
          src.col(static_cast<Eigen::Index>(i)) = asset_points[i];
          dst.col(static_cast<Eigen::Index>(i)) = nn;
          sq += (moved - nn).squaredNorm();
        }
        rms = std::sqrt(sq / static_cast<double>(asset_points.size()));
        if (prev_rms - rms < cfg.icp_tol * std::max(prev_rms, 1e-12) && it > 0) break;
        prev_rms = rms;
        Eigen::Matrix4d m = Eigen::umeyama(src, dst, true);
        double s = m.block<3, 3>(0, 0).col(0).norm();
        // Point-to-point scale ICP can collapse the source onto a cluster of
        // anchors; refuse updates that shrink the cloud into degeneracy.
        if (!std::isfinite(s) || s < 0.05 * s0 || s > 20.0 * s0 ||
            !m.allFinite()) break;
        cur.s = s;
        cur.r = m.block<3, 3>(0, 0) / s;
        cur.t = m.block<3, 1>(0, 3);
      }
      if (!cur.r.allFinite() || !cur.t.allFinite() || !std::isfinite(cur.s)) continue;

      // Symmetric residual: a collapsed fit leaves most anchors far from the
      // moved cloud, so the reverse term pushes it to the back of the list.
      std::vector<Vec3> moved(asset_points.size());
      for (size_t i = 0; i < asset_points.size(); ++i) moved[i] = cur.apply(asset_points[i]);
      NnGrid moved_grid(moved);
      double rev_sq = 0;
      for (const auto& q : anchor_points) rev_sq += (moved[moved_grid.nearest(q)] - q).squaredNorm();
      double rev_rms = std::sqrt(rev_sq / static_cast<double>(anchor_points.size()));

      IcpCandidate cand;
      cand.pose.translation = cur.t;
      cand.pose.r6 = rotation_to_r6(cur.r);
      cand.pose.scale = cur.s;
      cand.residual = std::max(rms, rev_rms);
      out.push_back(std::move(cand));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const IcpCandidate& a, const IcpCandidate& b) { return a.residual < b.residual; });
  return out;
}

}  // namespace worldact
