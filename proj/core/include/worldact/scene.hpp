#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace worldact {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// One anisotropic Gaussian primitive. Fields are kept exactly as stored in
/// the PLY (log-scales, opacity logit, raw quaternion) so round trips are
/// bit-exact; activated values come from the accessors.
struct GaussianPrimitive {
  Eigen::Vector3f center_raw = Eigen::Vector3f::Zero();
  Eigen::Vector3f log_scale_raw = Eigen::Vector3f::Zero();
  Eigen::Vector4f rot_raw = Eigen::Vector4f(1, 0, 0, 0);  // w, x, y, z
  float opacity_logit = 0.0f;
  Eigen::Vector3f f_dc = Eigen::Vector3f::Zero();  // SH degree-0 coefficients
  std::vector<float> sh_rest;                      // carried opaquely, may be empty

  Vec3 center() const { return center_raw.cast<double>(); }
  Vec3 scale() const {
    return Vec3(std::exp(static_cast<double>(log_scale_raw[0])),
                std::exp(static_cast<double>(log_scale_raw[1])),
                std::exp(static_cast<double>(log_scale_raw[2])));
  }
  Eigen::Quaterniond rotation() const {
    Eigen::Quaterniond q(rot_raw[0], rot_raw[1], rot_raw[2], rot_raw[3]);
    return q.normalized();
  }
  double opacity() const { return sigmoid(opacity_logit); }

  /// Base color in [0,1]: SH degree-0 evaluated view-independently.
  Vec3 color() const;

  /// Sigma = R S S^T R^T.
  Mat3 covariance() const;

  static GaussianPrimitive make(const Vec3& center, const Vec3& scale,
                                const Eigen::Quaterniond& rot, double opacity,
                                const Vec3& rgb);
};

struct GaussianScene {
  std::vector<GaussianPrimitive> primitives;
  /// Entity id per primitive: 0 = background, m >= 1 = object m.
  std::vector<int> labels;

  size_t size() const { return primitives.size(); }
  bool empty() const { return primitives.empty(); }

  void validate() const;  // throws DataError on invariant violation

  Eigen::AlignedBox3d bbox() const;
  double bbox_diagonal() const;
};

/// Background (label 0) plus one subscene per distinct object label, ordered
/// by ascending label. Primitive counts sum to the input count.
struct ScenePartition {
  GaussianScene background;
  std::vector<int> object_ids;
  std::vector<GaussianScene> objects;
};

ScenePartition split_by_labels(const GaussianScene& scene);

/// Subset of a scene by label; primitives keep scene order.
GaussianScene subset_by_label(const GaussianScene& scene, int label);

struct CameraFrame {
  Mat3 rotation = Mat3::Identity();  // world-to-camera
  Vec3 translation = Vec3::Zero();
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  int frame_index = 0;

  void validate() const;

  Vec3 world_to_camera(const Vec3& p) const { return rotation * p + translation; }
  Vec3 camera_to_world(const Vec3& p) const { return rotation.transpose() * (p - translation); }
  Vec3 camera_origin() const { return -rotation.transpose() * translation; }

  /// Camera-space point for pixel (r, c) at depth z (pixel-center convention).
  Vec3 unproject(double row, double col, double z) const {
    return Vec3((col + 0.5 - cx) / fx * z, (row + 0.5 - cy) / fy * z, z);
  }
};

struct Trajectory {
  std::vector<CameraFrame> frames;

  void validate() const;  // frame_index strictly increasing
  const CameraFrame* find(int frame_index) const;
};

// JSON (de)serialization for camera trajectories.
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

// Gaussian-splat PLY I/O, standard INRIA field layout, binary little-endian.
GaussianScene load_scene(const std::filesystem::path& path);
void save_scene(const GaussianScene& scene, const std::filesystem::path& path);

}  // namespace worldact
