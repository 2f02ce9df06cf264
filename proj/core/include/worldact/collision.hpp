#pragma once

#include <cstdint>
#include <vector>

#include "worldact/mesh.hpp"
#include "worldact/scene.hpp"

namespace worldact {

struct OrientedPoint {
  Vec3 position;
  Vec3 normal;  // unit, oriented toward free space
};

using PointCloud = std::vector<OrientedPoint>;

struct SampleConfig {
  uint64_t seed = 0;
  int normal_neighbors = 16;
  bool mode_only = false;  // sample at the Gaussian centers, no in-splat jitter
};

/// Opacity-weighted surface samples from a Gaussian scene, with normals from
/// local neighborhood covariance, oriented toward the scene centroid side.
PointCloud sample_points(const GaussianScene& scene, size_t n,
                         const SampleConfig& cfg = {});

struct SurfaceConfig {
  int grid_resolution = 64;  // cells along the longest bbox axis
  double padding_voxels = 3.0;
  int smoothing_passes = 2;
  double surface_tol = 0.05;  // informational: expected one-sided error bound
};

/// Oriented points -> closed watertight triangle mesh whose zero level set
/// follows the points' local tangent planes. Marching tetrahedra over a
/// smoothed signed indicator grid; boundary nodes forced to free space so the
/// output is closed.
CollisionMesh reconstruct_surface(const PointCloud& points, const SurfaceConfig& cfg = {});

struct RansacConfig {
  double distance_threshold = 0;  // 0 = auto: 0.5% of bbox diagonal
  int iterations_per_plane = 1000;
  double min_inlier_fraction = 0.15;
  int max_planes = 12;
  Vec3 up = Vec3::UnitY();
  uint64_t seed = 0;
};

struct PlaneHypothesis {
  Vec3 normal = Vec3::UnitY();  // unit length
  double offset = 0;            // n . x = offset
  std::vector<int> inliers;     // indices into the input point set
  FaceClass cls = FaceClass::Free;

  double distance(const Vec3& p) const { return std::abs(normal.dot(p) - offset); }

  PlaneParam param() const { return {normal, offset, cls}; }
};

/// Greedy iterative RANSAC: fit, remove inliers, repeat. Inlier sets are
/// disjoint across iterations; deterministic under a fixed seed.
/// Classification: |n.up| >= cos(15deg) -> floor/ceiling by offset relative
/// to the centroid; |n.up| <= cos(75deg) -> wall; otherwise free.
std::vector<PlaneHypothesis> detect_planes(const std::vector<Vec3>& points,
                                           const RansacConfig& cfg = {});

inline std::vector<PlaneHypothesis> detect_planes(const PointCloud& points,
                                                  const RansacConfig& cfg = {}) {
  std::vector<Vec3> p;
  p.reserve(points.size());
  for (const auto& q : points) p.push_back(q.position);
  return detect_planes(p, cfg);
}

struct PlanarizeConfig {
  double snap_distance = 0;  // 0 = auto: 2x RANSAC default threshold for the mesh bbox
};

struct PlanarizeStats {
  int snapped_vertices = 0;
  int degenerate_faces = 0;  // zero-area faces after snapping
};

/// Project vertices within snap_distance of a detected plane onto it.
/// Topology is never changed; the move is orthogonal so no vertex travels
/// more than snap_distance. Also tags faces with the class of the plane they
/// land on.
CollisionMesh planarize(const CollisionMesh& mesh,
                        const std::vector<PlaneHypothesis>& planes,
                        const PlanarizeConfig& cfg = {}, PlanarizeStats* stats = nullptr);

struct SimplifyConfig {
  double simplify_tol = 0;  // 0 = no Hausdorff enforcement; informational bound
};

/// Quadric-error edge-collapse decimation to at most target_faces.
/// Collapses that break the link condition or cross a face-class boundary
/// are rejected, so watertightness and classes are preserved.
CollisionMesh simplify(const CollisionMesh& mesh, size_t target_faces,
                       const SimplifyConfig& cfg = {});

/// Signed distance to a watertight mesh: closest-triangle distance with the
/// sign from the generalized winding number (negative inside the solid).
class MeshSdf {
 public:
  explicit MeshSdf(const CollisionMesh& mesh);

  /// Negative inside the solid (inside = generalized winding |w| > 1/2; for
  /// the watertight meshes this class requires, ray-crossing parity gives the
  /// same sign and is what signed_distance uses internally).
  double signed_distance(const Vec3& p) const;
  double unsigned_distance(const Vec3& p) const;
  double winding_number(const Vec3& p) const;  // exact, O(faces)

 private:
  bool inside(const Vec3& p) const;

  struct Node {
    Vec3 lo, hi;
    int left = -1, right = -1;  // children, or -1 at leaves
    int begin = 0, end = 0;     // triangle range at leaves
  };
  int build(int begin, int end);

  const CollisionMesh& mesh_;
  std::vector<int> order_;     // triangle indices, partitioned by the tree
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace worldact
