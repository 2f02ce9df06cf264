#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "worldact/scene.hpp"

namespace worldact {

enum class FaceClass : uint8_t { Free = 0, Floor = 1, Wall = 2, Ceiling = 3 };

const char* face_class_name(FaceClass c);
FaceClass face_class_from_name(const std::string& name);

struct PlaneParam {
  Vec3 normal = Vec3::UnitY();  // unit length
  double offset = 0;            // n . x = offset
  FaceClass cls = FaceClass::Free;
};

/// Triangle mesh with optional per-face plane classification. Vertices may
/// carry per-vertex colors (empty when untextured).
struct CollisionMesh {
  std::vector<Vec3> vertices;
  std::vector<Eigen::Vector3i> faces;
  std::vector<FaceClass> face_class;  // empty or faces.size()
  std::vector<PlaneParam> planes;
  std::vector<Vec3> vertex_colors;    // empty or vertices.size()

  size_t face_count() const { return faces.size(); }
  double surface_area() const;
  Eigen::AlignedBox3d bbox() const;
  Vec3 face_normal(size_t f) const;
  Vec3 face_centroid(size_t f) const;

  /// Edge-manifold closure: every undirected edge is shared by exactly two
  /// faces with opposite orientation.
  bool is_watertight() const;

  /// Uniform area-weighted surface samples, deterministic under seed.
  std::vector<Vec3> sample_surface(size_t n, uint64_t seed) const;
};

/// One-sided Hausdorff distance from sampled points of `from` to the surface
/// of `to`.
double one_sided_hausdorff(const CollisionMesh& from, const CollisionMesh& to,
                           size_t samples, uint64_t seed);

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c, Vec3* closest = nullptr);

/// OBJ plus a sidecar JSON (`<stem>.meta.json`) carrying plane parameters and
/// face-class runs.
void save_mesh_obj(const CollisionMesh& mesh, const std::filesystem::path& path);
CollisionMesh load_mesh_obj(const std::filesystem::path& path);

}  // namespace worldact
