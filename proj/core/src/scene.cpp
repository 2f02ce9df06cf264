#include "worldact/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "worldact/errors.hpp"

namespace worldact {

namespace {
constexpr double kShC0 = 0.28209479177387814;  // Y_0^0
}

Vec3 GaussianPrimitive::color() const {
  Vec3 c = 0.5 + kShC0 * f_dc.cast<double>().array();
  return c.cwiseMax(0.0).cwiseMin(1.0);
}

Mat3 GaussianPrimitive::covariance() const {
  Mat3 r = rotation().toRotationMatrix();
  Vec3 s = scale();
  return r * s.cwiseProduct(s).asDiagonal() * r.transpose();
}

GaussianPrimitive GaussianPrimitive::make(const Vec3& center, const Vec3& scale,
                                          const Eigen::Quaterniond& rot, double opacity,
                                          const Vec3& rgb) {
  GaussianPrimitive g;
  g.center_raw = center.cast<float>();
  g.log_scale_raw = scale.array().log().cast<float>();
  Eigen::Quaterniond qn = rot.normalized();
  g.rot_raw = Eigen::Vector4f(static_cast<float>(qn.w()), static_cast<float>(qn.x()),
                              static_cast<float>(qn.y()), static_cast<float>(qn.z()));
  g.opacity_logit = static_cast<float>(logit(std::clamp(opacity, 1e-6, 1.0 - 1e-6)));
  g.f_dc = ((rgb.array() - 0.5) / kShC0).cast<float>();
  return g;
}

void GaussianScene::validate() const {
  if (labels.size() != primitives.size())
    throw DataError("scene: labels length does not match primitive count");
  for (size_t i = 0; i < primitives.size(); ++i) {
    const auto& g = primitives[i];
    if (!g.center_raw.allFinite() || !g.log_scale_raw.allFinite() ||
        !g.rot_raw.allFinite() || !std::isfinite(g.opacity_logit) || !g.f_dc.allFinite())
      throw DataError("scene: non-finite value at primitive " + std::to_string(i));
    double n = g.rot_raw.cast<double>().norm();
    if (std::abs(n - 1.0) > 1e-6)
      throw DataError("scene: quaternion not unit at primitive " + std::to_string(i));
    Vec3 s = g.scale();
    if (!(s.array() > 0).all() || !s.allFinite())
      throw DataError("scene: non-positive scale at primitive " + std::to_string(i));
  }
}

Eigen::AlignedBox3d GaussianScene::bbox() const {
  Eigen::AlignedBox3d box;
  for (const auto& g : primitives) box.extend(g.center());
  return box;
}

double GaussianScene::bbox_diagonal() const {
  return empty() ? 0.0 : bbox().diagonal().norm();
}

ScenePartition split_by_labels(const GaussianScene& scene) {
  if (scene.labels.size() != scene.size())
    throw ArgumentError("split_by_labels: labels not populated");
  ScenePartition out;
  std::map<int, GaussianScene> by_label;
  for (size_t i = 0; i < scene.size(); ++i) {
    int l = scene.labels[i];
    GaussianScene& dst = l == 0 ? out.background : by_label[l];
    dst.primitives.push_back(scene.primitives[i]);
    dst.labels.push_back(l);
  }
  for (auto& [id, sub] : by_label) {
    out.object_ids.push_back(id);
    out.objects.push_back(std::move(sub));
  }
  return out;
}

GaussianScene subset_by_label(const GaussianScene& scene, int label) {
  GaussianScene out;
  for (size_t i = 0; i < scene.size(); ++i) {
    if (scene.labels[i] == label) {
      out.primitives.push_back(scene.primitives[i]);
      out.labels.push_back(label);
    }
  }
  return out;
}

void CameraFrame::validate() const {
  if (width <= 0 || height <= 0)
    throw DataError("camera: non-positive image dimensions");
  if (fx <= 0 || fy <= 0)
    throw DataError("camera: non-positive focal length");
  Mat3 should_be_identity = rotation * rotation.transpose();
  if ((should_be_identity - Mat3::Identity()).norm() > 1e-6 ||
      std::abs(rotation.determinant() - 1.0) > 1e-6)
    throw DataError("camera: rotation not orthonormal with det +1");
}

void Trajectory::validate() const {
  for (size_t i = 0; i < frames.size(); ++i) {
    frames[i].validate();
    if (i > 0 && frames[i].frame_index <= frames[i - 1].frame_index)
      throw DataError("trajectory: frame_index not strictly increasing");
  }
}

const CameraFrame* Trajectory::find(int frame_index) const {
  for (const auto& f : frames)
    if (f.frame_index == frame_index) return &f;
  return nullptr;
}

}  // namespace worldact
