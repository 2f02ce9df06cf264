#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include <Eigen/Dense>

#include "worldact/collision.hpp"
#include "worldact/errors.hpp"

namespace worldact {

namespace {

/// Uniform-grid nearest-neighbor index over a fixed point set.
class PointGrid {
 public:
  PointGrid(const std::vector<Vec3>& points, double cell)
      : points_(points), cell_(cell) {
    for (size_t i = 0; i < points.size(); ++i)
      cells_[key(points[i])].push_back(static_cast<int>(i));
  }

  int nearest(const Vec3& q, double* dist_out = nullptr) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    auto center = coords(q);
    for (int ring = 0;; ++ring) {
      bool any_cell = false;
      for (int dz = -ring; dz <= ring; ++dz) {
        for (int dy = -ring; dy <= ring; ++dy) {
          for (int dx = -ring; dx <= ring; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            auto it = cells_.find(pack(center[0] + dx, center[1] + dy, center[2] + dz));
            if (it == cells_.end()) continue;
            any_cell = true;
            for (int i : it->second) {
              double d2 = (points_[i] - q).squaredNorm();
              if (d2 < best_d2) { best_d2 = d2; best = i; }
            }
          }
        }
      }
      // One extra ring after the first hit: a closer point can live one ring out.
      if (best >= 0 && ring >= 1 &&
          static_cast<double>(ring - 1) * cell_ >= std::sqrt(best_d2))
        break;
      if (!any_cell && best >= 0) break;
      if (ring > 2 && best >= 0 && ring * cell_ > 2.0 * std::sqrt(best_d2)) break;
      if (ring > 1000) break;  // pathological fallback
    }
    if (dist_out) *dist_out = std::sqrt(best_d2);
    return best;
  }

  std::vector<int> k_nearest(const Vec3& q, int k) const {
    std::vector<std::pair<double, int>> found;
    auto center = coords(q);
    for (int ring = 0; ring <= 64; ++ring) {
      for (int dz = -ring; dz <= ring; ++dz) {
        for (int dy = -ring; dy <= ring; ++dy) {
          for (int dx = -ring; dx <= ring; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            auto it = cells_.find(pack(center[0] + dx, center[1] + dy, center[2] + dz));
            if (it == cells_.end()) continue;
            for (int i : it->second)
              found.emplace_back((points_[i] - q).squaredNorm(), i);
          }
        }
      }
      if (static_cast<int>(found.size()) >= k && ring >= 1) break;
    }
    std::sort(found.begin(), found.end());
    if (static_cast<int>(found.size()) > k) found.resize(k);
    std::vector<int> out;
    out.reserve(found.size());
    for (auto& [d, i] : found) out.push_back(i);
    return out;
  }

 private:
  std::array<int64_t, 3> coords(const Vec3& p) const {
    return {static_cast<int64_t>(std::floor(p.x() / cell_)),
            static_cast<int64_t>(std::floor(p.y() / cell_)),
            static_cast<int64_t>(std::floor(p.z() / cell_))};
  }
  static int64_t pack(int64_t x, int64_t y, int64_t z) {
    return ((x & 0x1FFFFF) << 42) | ((y & 0x1FFFFF) << 21) | (z & 0x1FFFFF);
  }
  int64_t key(const Vec3& p) const {
    auto c = coords(p);
    return pack(c[0], c[1], c[2]);
  }

  const std::vector<Vec3>& points_;
  double cell_;
  std::unordered_map<int64_t, std::vector<int>> cells_;
};

}  // namespace

PointCloud sample_points(const GaussianScene& scene, size_t n, const SampleConfig& cfg) {
  if (scene.empty()) throw ArgumentError("sample_points: empty scene");
  if (n == 0) throw ArgumentError("sample_points: n must be positive");

  std::vector<double> cum(scene.size());
  double total = 0;
  for (size_t i = 0; i < scene.size(); ++i) {
    total += scene.primitives[i].opacity();
    cum[i] = total;
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Vec3> positions;
  positions.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    size_t i = std::lower_bound(cum.begin(), cum.end(), uni(rng) * total) - cum.begin();
    i = std::min(i, scene.size() - 1);
    const GaussianPrimitive& g = scene.primitives[i];
    Vec3 p = g.center();
    if (!cfg.mode_only) {
      Vec3 xi(gauss(rng), gauss(rng), gauss(rng));
      p += g.rotation().toRotationMatrix() * g.scale().cwiseProduct(xi);
    }
    positions.push_back(p);
  }

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : positions) centroid += p;
  centroid /= static_cast<double>(positions.size());

  Eigen::AlignedBox3d box;
  for (const auto& p : positions) box.extend(p);
  double cell = std::max(box.diagonal().norm(), 1e-9) /
                std::max(4.0, std::cbrt(static_cast<double>(n)));
  PointGrid grid(positions, cell);

  PointCloud cloud(positions.size());
  int k = std::max(cfg.normal_neighbors, 3);
  for (size_t i = 0; i < positions.size(); ++i) {
    cloud[i].position = positions[i];
    auto nbrs = grid.k_nearest(positions[i], k);
    Vec3 mean = Vec3::Zero();
    for (int j : nbrs) mean += positions[j];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (int j : nbrs) {
      Vec3 d = positions[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 normal = eig.eigenvectors().col(0);  // smallest eigenvalue
    if (normal.dot(centroid - positions[i]) < 0) normal = -normal;
    cloud[i].normal = normal.normalized();
  }
  return cloud;
}

namespace {

// Kuhn tetrahedral decomposition of a unit cube, corners indexed by bit
// pattern x + 2y + 4z. All six tets share the main diagonal 0-7 and the
// decomposition matches across neighboring cubes.
constexpr int kTets[6][4] = {
    {0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
    {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

struct GridShape {
  Vec3 origin;
  double voxel;
  int nx, ny, nz;  // node counts

  size_t node_id(int x, int y, int z) const {
    return (static_cast<size_t>(z) * ny + y) * nx + x;
  }
  Vec3 node_pos(int x, int y, int z) const {
    return origin + voxel * Vec3(x, y, z);
  }
};

}  // namespace

CollisionMesh reconstruct_surface(const PointCloud& points, const SurfaceConfig& cfg) {
  if (points.size() < 4) throw GeometryError("reconstruct_surface: need at least 4 points");
  {
    // Reject (near-)coplanar degenerate input.
    Vec3 mean = Vec3::Zero();
    for (const auto& p : points) mean += p.position;
    mean /= static_cast<double>(points.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : points) {
      Vec3 d = p.position - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    if (eig.eigenvalues()(0) <= 1e-12 * std::max(eig.eigenvalues()(2), 1e-300))
      throw GeometryError("reconstruct_surface: degenerate (coplanar) point set");
  }

  Eigen::AlignedBox3d box;
  std::vector<Vec3> positions(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    positions[i] = points[i].position;
    box.extend(points[i].position);
  }

  double longest = box.diagonal().maxCoeff();
  double voxel = longest / cfg.grid_resolution;
  Vec3 origin = box.min() - cfg.padding_voxels * voxel * Vec3::Ones();
  Vec3 extent = box.diagonal() + 2.0 * cfg.padding_voxels * voxel * Vec3::Ones();

  GridShape grid;
  grid.origin = origin;
  grid.voxel = voxel;
  grid.nx = static_cast<int>(std::ceil(extent.x() / voxel)) + 1;
  grid.ny = static_cast<int>(std::ceil(extent.y() / voxel)) + 1;
  grid.nz = static_cast<int>(std::ceil(extent.z() / voxel)) + 1;

  double trunc = 3.0 * voxel;
  PointGrid nn(positions, std::max(voxel, 1e-9));

  std::vector<double> field(static_cast<size_t>(grid.nx) * grid.ny * grid.nz);
  for (int z = 0; z < grid.nz; ++z) {
    for (int y = 0; y < grid.ny; ++y) {
      for (int x = 0; x < grid.nx; ++x) {
        Vec3 p = grid.node_pos(x, y, z);
        int i = nn.nearest(p);
        double f = points[i].normal.dot(p - points[i].position);
        field[grid.node_id(x, y, z)] = std::clamp(f, -trunc, trunc);
      }
    }
  }

  auto force_boundary = [&] {
    for (int z = 0; z < grid.nz; ++z)
      for (int y = 0; y < grid.ny; ++y)
        for (int x = 0; x < grid.nx; ++x)
          if (x == 0 || y == 0 || z == 0 || x == grid.nx - 1 || y == grid.ny - 1 ||
              z == grid.nz - 1)
            field[grid.node_id(x, y, z)] = trunc;
  };
  force_boundary();

  // Normal-driven smoothing of the indicator grid.
  std::vector<double> next(field.size());
  for (int pass = 0; pass < cfg.smoothing_passes; ++pass) {
    for (int z = 1; z < grid.nz - 1; ++z) {
      for (int y = 1; y < grid.ny - 1; ++y) {
        for (int x = 1; x < grid.nx - 1; ++x) {
          double sum = field[grid.node_id(x - 1, y, z)] + field[grid.node_id(x + 1, y, z)] +
                       field[grid.node_id(x, y - 1, z)] + field[grid.node_id(x, y + 1, z)] +
                       field[grid.node_id(x, y, z - 1)] + field[grid.node_id(x, y, z + 1)];
          next[grid.node_id(x, y, z)] = 0.5 * field[grid.node_id(x, y, z)] + 0.5 * sum / 6.0;
        }
      }
    }
    std::swap(field, next);
    force_boundary();
  }
  for (double& f : field)
    if (f == 0.0) f = 1e-12 * voxel;  // keep crossings strictly inside edges

  // Marching tetrahedra. Crossing vertices dedup by global grid-edge key.
  CollisionMesh mesh;
  std::map<std::pair<size_t, size_t>, int> edge_vertex;
  auto crossing = [&](size_t na, size_t nb, const Vec3& pa, const Vec3& pb) {
    auto key = na < nb ? std::make_pair(na, nb) : std::make_pair(nb, na);
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    double fa = field[na], fb = field[nb];
    double t = fa / (fa - fb);
    Vec3 v = pa + t * (pb - pa);
    int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(v);
    edge_vertex[key] = id;
    return id;
  };
  // Triangle winding comes from the tet's combinatorics (vertex parity and
  // the tet's orientation sign), never from computed normals: sliver
  // triangles would otherwise get arbitrary flips and break closure.

  for (int z = 0; z < grid.nz - 1; ++z) {
    for (int y = 0; y < grid.ny - 1; ++y) {
      for (int x = 0; x < grid.nx - 1; ++x) {
        size_t nid[8];
        Vec3 pos[8];
        for (int c = 0; c < 8; ++c) {
          int cx = x + (c & 1), cy = y + ((c >> 1) & 1), cz = z + ((c >> 2) & 1);
          nid[c] = grid.node_id(cx, cy, cz);
          pos[c] = grid.node_pos(cx, cy, cz);
        }
        for (const auto& tet : kTets) {
          size_t tn[4];
          Vec3 tp[4];
          bool pos_sign[4];
          int npos = 0;
          for (int k = 0; k < 4; ++k) {
            tn[k] = nid[tet[k]];
            tp[k] = pos[tet[k]];
            pos_sign[k] = field[tn[k]] > 0;
            npos += pos_sign[k];
          }
          if (npos == 0 || npos == 4) continue;
          bool tet_pos = (tp[1] - tp[0]).cross(tp[2] - tp[0]).dot(tp[3] - tp[0]) > 0;
          if (npos == 1 || npos == 3) {
            bool lone_positive = npos == 1;
            int lone = 0;
            for (int k = 0; k < 4; ++k)
              if (pos_sign[k] == lone_positive) lone = k;
            int others[3], m = 0;
            for (int k = 0; k < 4; ++k)
              if (k != lone) others[m++] = k;
            int a = crossing(tn[lone], tn[others[0]], tp[lone], tp[others[0]]);
            int b = crossing(tn[lone], tn[others[1]], tp[lone], tp[others[1]]);
            int c = crossing(tn[lone], tn[others[2]], tp[lone], tp[others[2]]);
            // (a, b, c) faces the lone vertex iff its tet index is odd in a
            // positively oriented tet; the free side is the positive side.
            bool toward_lone = (lone % 2 == 1) == tet_pos;
            if (toward_lone != lone_positive) std::swap(b, c);
            mesh.faces.emplace_back(a, b, c);
          } else {
            int posv[2], negv[2], np = 0, nn2 = 0;
            for (int k = 0; k < 4; ++k)
              (pos_sign[k] ? posv[np++] : negv[nn2++]) = k;
            int v00 = crossing(tn[posv[0]], tn[negv[0]], tp[posv[0]], tp[negv[0]]);
            int v01 = crossing(tn[posv[0]], tn[negv[1]], tp[posv[0]], tp[negv[1]]);
            int v10 = crossing(tn[posv[1]], tn[negv[0]], tp[posv[1]], tp[negv[0]]);
            int v11 = crossing(tn[posv[1]], tn[negv[1]], tp[posv[1]], tp[negv[1]]);
            // One flip decision for the whole quad (shared diagonal v00-v11
            // keeps opposite directions); the side follows from the parity of
            // the (pos, pos, neg, neg) vertex permutation and the tet sign.
            int perm[4] = {posv[0], posv[1], negv[0], negv[1]};
            int inversions = 0;
            for (int i = 0; i < 4; ++i)
              for (int j = i + 1; j < 4; ++j) inversions += perm[i] > perm[j];
            if ((inversions % 2 == 0) == tet_pos) {
              mesh.faces.emplace_back(v00, v11, v01);
              mesh.faces.emplace_back(v00, v10, v11);
            } else {
              mesh.faces.emplace_back(v00, v01, v11);
              mesh.faces.emplace_back(v00, v11, v10);
            }
          }
        }
      }
    }
  }

  if (mesh.faces.empty())
    throw GeometryError("reconstruct_surface: no surface crossed the grid");
  return mesh;
}

}  // namespace worldact
