#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "worldact/scene.hpp"

namespace testutil {

using worldact::CameraFrame;
using worldact::GaussianPrimitive;
using worldact::GaussianScene;
using worldact::Vec3;

// Identity camera at the origin looking down +z.
inline CameraFrame simple_camera(int width = 64, int height = 64, int frame_index = 0) {
  CameraFrame cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.8 * width;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.frame_index = frame_index;
  return cam;
}

// Random splats in front of the identity camera, z in [2, 4].
inline GaussianScene random_scene(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  GaussianScene scene;
  for (int i = 0; i < n; ++i) {
    Vec3 center(u(rng) * 2 - 1, u(rng) * 2 - 1, 2 + 2 * u(rng));
    Vec3 scale(0.02 + 0.2 * u(rng), 0.02 + 0.2 * u(rng), 0.02 + 0.2 * u(rng));
    Eigen::Quaterniond q(u(rng) * 2 - 1, u(rng) * 2 - 1, u(rng) * 2 - 1, u(rng) * 2 - 1);
    if (q.norm() < 1e-6) q = Eigen::Quaterniond::Identity();
    q.normalize();
    double opacity = 0.15 + 0.8 * u(rng);
    Vec3 rgb(u(rng), u(rng), u(rng));
    scene.primitives.push_back(GaussianPrimitive::make(center, scale, q, opacity, rgb));
    scene.labels.push_back(0);
  }
  return scene;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("worldact_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testutil
