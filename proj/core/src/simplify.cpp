#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <set>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "worldact/collision.hpp"
#include "worldact/errors.hpp"

namespace worldact {

namespace {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

Mat4 face_quadric(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = (b - a).cross(c - a);
  double area = 0.5 * n.norm();
  if (area < 1e-18) return Mat4::Zero();
  n.normalize();
  Vec4 p;
  p << n, -n.dot(a);
  return area * (p * p.transpose());
}

double quadric_cost(const Mat4& q, const Vec3& v) {
  Vec4 h;
  h << v, 1.0;
  return h.dot(q * h);
}

struct Candidate {
  double cost;
  int u, v;          // collapse u into merged position, v removed
  Vec3 position;
  uint64_t stamp_u, stamp_v;
  bool operator>(const Candidate& o) const { return cost > o.cost; }
};

}  // namespace

CollisionMesh simplify(const CollisionMesh& mesh, size_t target_faces,
                       const SimplifyConfig& cfg) {
  if (target_faces < 4) throw ArgumentError("simplify: target below minimal closed mesh");
  if (mesh.face_count() <= target_faces) return mesh;

  size_t nv = mesh.vertices.size();
  std::vector<Vec3> verts = mesh.vertices;
  std::vector<Eigen::Vector3i> faces = mesh.faces;
  std::vector<FaceClass> face_class = mesh.face_class;
  bool has_class = face_class.size() == faces.size();
  std::vector<bool> face_alive(faces.size(), true);
  std::vector<bool> vert_alive(nv, true);
  std::vector<uint64_t> stamp(nv, 0);

  // Plane membership per vertex: which regularization planes it lies on.
  double diag = mesh.bbox().diagonal().norm();
  double on_plane_tol = 1e-7 * std::max(diag, 1.0);
  std::vector<std::set<int>> vplanes(nv);
  for (size_t i = 0; i < nv; ++i)
    for (size_t p = 0; p < mesh.planes.size(); ++p)
      if (std::abs(mesh.planes[p].normal.dot(verts[i]) - mesh.planes[p].offset) <= on_plane_tol)
        vplanes[i].insert(static_cast<int>(p));

  std::vector<std::set<int>> vfaces(nv);
  for (size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) vfaces[faces[f][k]].insert(static_cast<int>(f));

  std::vector<Mat4> quadric(nv, Mat4::Zero());
  for (size_t f = 0; f < faces.size(); ++f) {
    Mat4 q = face_quadric(verts[faces[f][0]], verts[faces[f][1]], verts[faces[f][2]]);
    for (int k = 0; k < 3; ++k) quadric[faces[f][k]] += q;
  }

  auto neighbors = [&](int v) {
    std::set<int> out;
    for (int f : vfaces[v])
      for (int k = 0; k < 3; ++k)
        if (faces[f][k] != v) out.insert(faces[f][k]);
    return out;
  };

  auto make_candidate = [&](int u, int v) -> std::optional<Candidate> {
    // Plane constraints: only a vertex whose plane set is a subset of the
    // other's may be absorbed; this keeps every classified face on its plane.
    const std::set<int>&pu = vplanes[u], &pv = vplanes[v];
    bool u_sub = std::includes(pv.begin(), pv.end(), pu.begin(), pu.end());
    bool v_sub = std::includes(pu.begin(), pu.end(), pv.begin(), pv.end());
    if (!u_sub && !v_sub) return std::nullopt;

    Candidate c;
    c.u = u;
    c.v = v;
    Mat4 q = quadric[u] + quadric[v];
    if (pu == pv && pu.empty()) {
      // Unconstrained: quadric-optimal position when well-conditioned.
      Mat4 a = q;
      a.row(3) << 0, 0, 0, 1;
      Eigen::FullPivLU<Mat4> lu(a);
      if (lu.isInvertible()) {
        Vec4 x = lu.solve(Vec4(0, 0, 0, 1));
        c.position = x.head<3>();
      } else {
        c.position = 0.5 * (verts[u] + verts[v]);
      }
      double alt_u = quadric_cost(q, verts[u]);
      double alt_v = quadric_cost(q, verts[v]);
      double alt_p = quadric_cost(q, c.position);
      if (alt_u <= alt_v && alt_u <= alt_p) c.position = verts[u];
      else if (alt_v <= alt_p) c.position = verts[v];
    } else if (pu == pv) {
      // Same plane set: midpoint stays on the common planes.
      c.position = 0.5 * (verts[u] + verts[v]);
    } else if (u_sub) {
      c.position = verts[v];  // absorb u into the more constrained vertex
    } else {
      c.position = verts[u];
    }
    c.cost = quadric_cost(q, c.position);
    c.stamp_u = stamp[u];
    c.stamp_v = stamp[v];
    return c;
  };

  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  {
    std::set<std::pair<int, int>> edges;
    for (size_t f = 0; f < faces.size(); ++f)
      for (int k = 0; k < 3; ++k) {
        int a = faces[f][k], b = faces[f][(k + 1) % 3];
        edges.insert({std::min(a, b), std::max(a, b)});
      }
    for (auto [a, b] : edges)
      if (auto c = make_candidate(a, b)) heap.push(*c);
  }

  size_t alive_faces = faces.size();
  double tol_sq = cfg.simplify_tol > 0 ? cfg.simplify_tol * cfg.simplify_tol
                                       : std::numeric_limits<double>::infinity();

  while (alive_faces > target_faces && !heap.empty()) {
    Candidate c = heap.top();
    heap.pop();
    int u = c.u, v = c.v;
    if (!vert_alive[u] || !vert_alive[v]) continue;
    if (c.stamp_u != stamp[u] || c.stamp_v != stamp[v]) continue;
    if (c.cost > tol_sq) break;

    // Link condition: collapsing is manifold-safe iff the endpoints share
    // exactly the two vertices opposite the collapsed edge.
    std::set<int> nu = neighbors(u), nv2 = neighbors(v);
    if (!nu.count(v)) continue;  // stale, no longer an edge
    std::vector<int> common;
    std::set_intersection(nu.begin(), nu.end(), nv2.begin(), nv2.end(),
                          std::back_inserter(common));
    if (common.size() != 2) continue;

    // Forbid collapses that mix face classes across the merged fan.
    if (has_class) {
      std::set<int> shared;
      std::set_intersection(vfaces[u].begin(), vfaces[u].end(),
                            vfaces[v].begin(), vfaces[v].end(),
                            std::inserter(shared, shared.begin()));
      bool cross = false;
      for (int f : shared) {
        // Faces removed by the collapse: their class must survive in the
        // neighborhood, which holds when both endpoints touch that class.
        FaceClass fc = face_class[f];
        auto touches = [&](int vert) {
          for (int g : vfaces[vert])
            if (g != f && face_class[g] == fc) return true;
          return false;
        };
        if (!touches(u) || !touches(v)) { cross = true; break; }
      }
      if (cross) continue;
    }

    // Normal-flip guard on surviving faces.
    bool flips = false;
    for (int who : {u, v}) {
      for (int f : vfaces[who]) {
        const auto& t = faces[f];
        if ((t[0] == u || t[1] == u || t[2] == u) &&
            (t[0] == v || t[1] == v || t[2] == v))
          continue;  // face will be removed
        Vec3 p[3], pnew[3];
        for (int k = 0; k < 3; ++k) {
          p[k] = verts[t[k]];
          pnew[k] = (t[k] == u || t[k] == v) ? c.position : verts[t[k]];
        }
        Vec3 n_old = (p[1] - p[0]).cross(p[2] - p[0]);
        Vec3 n_new = (pnew[1] - pnew[0]).cross(pnew[2] - pnew[0]);
        if (n_old.dot(n_new) <= 0) { flips = true; break; }
      }
      if (flips) break;
    }
    if (flips) continue;

    // Perform the collapse: v merges into u at c.position.
    verts[u] = c.position;
    quadric[u] += quadric[v];
    std::set<int> merged_planes;
    std::set_union(vplanes[u].begin(), vplanes[u].end(), vplanes[v].begin(),
                   vplanes[v].end(), std::inserter(merged_planes, merged_planes.begin()));
    vplanes[u] = std::move(merged_planes);

    for (int f : std::vector<int>(vfaces[v].begin(), vfaces[v].end())) {
      auto& t = faces[f];
      bool has_u = t[0] == u || t[1] == u || t[2] == u;
      if (has_u) {
        face_alive[f] = false;
        --alive_faces;
        for (int k = 0; k < 3; ++k)
          if (t[k] != v) vfaces[t[k]].erase(f);
        vfaces[v].erase(f);
      } else {
        for (int k = 0; k < 3; ++k)
          if (t[k] == v) t[k] = u;
        vfaces[u].insert(f);
      }
    }
    vert_alive[v] = false;
    ++stamp[u];
    ++stamp[v];

    for (int w : neighbors(u))
      if (auto cand = make_candidate(u, w)) heap.push(*cand);
  }

  // Compact.
  CollisionMesh out;
  std::vector<int> remap(nv, -1);
  for (size_t i = 0; i < nv; ++i) {
    if (vert_alive[i]) {
      remap[i] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(verts[i]);
      if (mesh.vertex_colors.size() == nv) out.vertex_colors.push_back(mesh.vertex_colors[i]);
    }
  }
  for (size_t f = 0; f < faces.size(); ++f) {
    if (!face_alive[f]) continue;
    out.faces.emplace_back(remap[faces[f][0]], remap[faces[f][1]], remap[faces[f][2]]);
    if (has_class) out.face_class.push_back(face_class[f]);
  }
  out.planes = mesh.planes;
  return out;
}

}  // namespace worldact
