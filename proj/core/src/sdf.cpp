#include <algorithm>
#include <cmath>
#include <numbers>

#include "worldact/collision.hpp"
#include "worldact/errors.hpp"

namespace worldact {

namespace {

double aabb_distance_sq(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  double d2 = 0;
  for (int i = 0; i < 3; ++i) {
    double d = std::max({lo[i] - p[i], 0.0, p[i] - hi[i]});
    d2 += d * d;
  }
  return d2;
}

bool ray_hits_aabb(const Vec3& o, const Vec3& inv_d, const Vec3& lo, const Vec3& hi) {
  double tmin = 0, tmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double t0 = (lo[i] - o[i]) * inv_d[i];
    double t1 = (hi[i] - o[i]) * inv_d[i];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  return true;
}

// Moller-Trumbore; returns 1 for a clean forward crossing, 0 for a miss and
// -1 when the hit is too close to an edge or the triangle plane is nearly
// parallel (caller retries with a different ray).
int ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  constexpr double kEps = 1e-10;
  Vec3 e1 = b - a, e2 = c - a;
  Vec3 h = d.cross(e2);
  double det = e1.dot(h);
  double scale = std::max({e1.norm() * e2.norm(), 1e-300});
  if (std::abs(det) < kEps * scale) return 0;  // parallel: no crossing
  double inv = 1.0 / det;
  Vec3 s = o - a;
  double u = s.dot(h) * inv;
  Vec3 q = s.cross(e1);
  double v = d.dot(q) * inv;
  double t = e2.dot(q) * inv;
  if (u < -1e-9 || v < -1e-9 || u + v > 1 + 1e-9 || t < -1e-9) return 0;
  if (u < 1e-9 || v < 1e-9 || u + v > 1 - 1e-9 || t < 1e-9) return -1;  // grazing
  return 1;
}

}  // namespace

MeshSdf::MeshSdf(const CollisionMesh& mesh) : mesh_(mesh) {
  if (mesh.faces.empty()) throw GeometryError("MeshSdf: empty mesh");
  order_.resize(mesh.faces.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  nodes_.reserve(2 * mesh.faces.size() / 4 + 2);
  root_ = build(0, static_cast<int>(order_.size()));
}

int MeshSdf::build(int begin, int end) {
  Node node;
  node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (int k = begin; k < end; ++k) {
    const auto& t = mesh_.faces[order_[k]];
    for (int j = 0; j < 3; ++j) {
      node.lo = node.lo.cwiseMin(mesh_.vertices[t[j]]);
      node.hi = node.hi.cwiseMax(mesh_.vertices[t[j]]);
    }
  }
  int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 8) {
    nodes_[idx].begin = begin;
    nodes_[idx].end = end;
    return idx;
  }
  int axis;
  (node.hi - node.lo).maxCoeff(&axis);
  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     return mesh_.face_centroid(a)[axis] < mesh_.face_centroid(b)[axis];
                   });
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[idx].left = left;
  nodes_[idx].right = right;
  return idx;
}

double MeshSdf::unsigned_distance(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  // Branch-and-bound over the tree, nearest child first.
  int stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    int ni = stack[--top];
    const Node& n = nodes_[ni];
    if (aabb_distance_sq(p, n.lo, n.hi) >= best * best) continue;
    if (n.left < 0) {
      for (int k = n.begin; k < n.end; ++k) {
        const auto& t = mesh_.faces[order_[k]];
        double d = point_triangle_distance(p, mesh_.vertices[t[0]], mesh_.vertices[t[1]],
                                           mesh_.vertices[t[2]]);
        if (d < best) best = d;
      }
      continue;
    }
    double dl = aabb_distance_sq(p, nodes_[n.left].lo, nodes_[n.left].hi);
    double dr = aabb_distance_sq(p, nodes_[n.right].lo, nodes_[n.right].hi);
    // Push the farther child first so the nearer one is processed next.
    if (dl <= dr) {
      stack[top++] = n.right;
      stack[top++] = n.left;
    } else {
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }
  return best;
}

double MeshSdf::winding_number(const Vec3& p) const {
  // Generalized winding number: sum of signed solid angles / 4pi
  // (van Oosterom & Strackee for the per-triangle solid angle).
  double total = 0;
  for (const auto& t : mesh_.faces) {
    Vec3 a = mesh_.vertices[t[0]] - p;
    Vec3 b = mesh_.vertices[t[1]] - p;
    Vec3 c = mesh_.vertices[t[2]] - p;
    double la = a.norm(), lb = b.norm(), lc = c.norm();
    double num = a.dot(b.cross(c));
    double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi);
}

bool MeshSdf::inside(const Vec3& p) const {
  // Parity of ray crossings, equivalent to |winding| > 1/2 on a watertight
  // mesh. A few fixed irrational-ish directions dodge edge/vertex grazing.
  static const Vec3 dirs[] = {
      Vec3(0.2871403, 0.8342387, 0.4707351).normalized(),
      Vec3(-0.6147923, 0.3981427, 0.6804213).normalized(),
      Vec3(0.7412361, -0.1189427, 0.6606103).normalized(),
      Vec3(-0.3317721, -0.7412809, 0.5833761).normalized(),
  };
  for (const Vec3& d : dirs) {
    Vec3 inv_d(1.0 / d.x(), 1.0 / d.y(), 1.0 / d.z());
    int crossings = 0;
    bool grazed = false;
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0 && !grazed) {
      const Node& n = nodes_[stack[--top]];
      if (!ray_hits_aabb(p, inv_d, n.lo, n.hi)) continue;
      if (n.left < 0) {
        for (int k = n.begin; k < n.end; ++k) {
          const auto& t = mesh_.faces[order_[k]];
          int r = ray_triangle(p, d, mesh_.vertices[t[0]], mesh_.vertices[t[1]],
                               mesh_.vertices[t[2]]);
          if (r < 0) {
            grazed = true;
            break;
          }
          crossings += r;
        }
        continue;
      }
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
    if (!grazed) return (crossings & 1) != 0;
  }
  // Every probe grazed an edge; fall back to the exact winding number.
  return std::abs(winding_number(p)) > 0.5;
}

double MeshSdf::signed_distance(const Vec3& p) const {
  double d = unsigned_distance(p);
  return inside(p) ? -d : d;
}

}  // namespace worldact
