#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "worldact/errors.hpp"
#include "worldact/scene.hpp"

namespace worldact {

namespace {

const char* kRequired[] = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2",
                           "opacity", "scale_0", "scale_1", "scale_2",
                           "rot_0", "rot_1", "rot_2", "rot_3"};

}  // namespace

GaussianScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_scene: cannot open " + path.string());

  std::string line;
  std::getline(in, line);
  if (line != "ply") throw FormatError("load_scene: not a PLY file: " + path.string());

  size_t vertex_count = 0;
  std::vector<std::string> props;
  bool binary_le = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (tok == "element") {
      std::string name;
      ss >> name >> vertex_count;
      if (name != "vertex")
        throw FormatError("load_scene: unexpected element '" + name + "'");
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      if (type != "float")
        throw FormatError("load_scene: non-float property '" + name + "'");
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!binary_le)
    throw FormatError("load_scene: expected binary_little_endian format");

  std::map<std::string, int> index;
  for (size_t i = 0; i < props.size(); ++i) index[props[i]] = static_cast<int>(i);
  for (const char* f : kRequired)
    if (!index.count(f))
      throw FormatError(std::string("load_scene: missing field '") + f + "'");

  int rest_count = 0;
  while (index.count("f_rest_" + std::to_string(rest_count))) ++rest_count;

  GaussianScene scene;
  scene.primitives.resize(vertex_count);
  scene.labels.assign(vertex_count, 0);

  std::vector<float> row(props.size());
  for (size_t i = 0; i < vertex_count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (!in) throw FormatError("load_scene: truncated vertex data at primitive " + std::to_string(i));
    for (float v : row)
      if (!std::isfinite(v))
        throw DataError("load_scene: non-finite value at primitive " + std::to_string(i));

    GaussianPrimitive& g = scene.primitives[i];
    g.center_raw = {row[index["x"]], row[index["y"]], row[index["z"]]};
    g.f_dc = {row[index["f_dc_0"]], row[index["f_dc_1"]], row[index["f_dc_2"]]};
    g.opacity_logit = row[index["opacity"]];
    g.log_scale_raw = {row[index["scale_0"]], row[index["scale_1"]], row[index["scale_2"]]};
    g.rot_raw = {row[index["rot_0"]], row[index["rot_1"]],
                 row[index["rot_2"]], row[index["rot_3"]]};
    // Renormalize only when out of tolerance, so clean files round-trip bit-exactly.
    double n = g.rot_raw.cast<double>().norm();
    if (n <= 0)
      throw DataError("load_scene: zero quaternion at primitive " + std::to_string(i));
    if (std::abs(n - 1.0) > 1e-6)
      g.rot_raw = (g.rot_raw.cast<double>() / n).cast<float>();
    if (rest_count > 0) {
      g.sh_rest.resize(rest_count);
      for (int k = 0; k < rest_count; ++k)
        g.sh_rest[k] = row[index["f_rest_" + std::to_string(k)]];
    }
  }
  scene.validate();
  return scene;
}

void save_scene(const GaussianScene& scene, const std::filesystem::path& path) {
  if (scene.empty()) throw ArgumentError("save_scene: empty scene");
  size_t rest_count = scene.primitives.front().sh_rest.size();
  for (const auto& g : scene.primitives)
    if (g.sh_rest.size() != rest_count)
      throw DataError("save_scene: inconsistent sh_rest sizes");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_scene: cannot open " + path.string());

  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << scene.size() << "\n";
  for (const char* n : {"x", "y", "z", "nx", "ny", "nz"})
    out << "property float " << n << "\n";
  for (int k = 0; k < 3; ++k) out << "property float f_dc_" << k << "\n";
  for (size_t k = 0; k < rest_count; ++k) out << "property float f_rest_" << k << "\n";
  out << "property float opacity\n";
  for (int k = 0; k < 3; ++k) out << "property float scale_" << k << "\n";
  for (int k = 0; k < 4; ++k) out << "property float rot_" << k << "\n";
  out << "end_header\n";

  std::vector<float> row;
  for (const auto& g : scene.primitives) {
    row.clear();
    for (int k = 0; k < 3; ++k) row.push_back(g.center_raw[k]);
    for (int k = 0; k < 3; ++k) row.push_back(0.0f);  // normals, unused
    for (int k = 0; k < 3; ++k) row.push_back(g.f_dc[k]);
    for (float v : g.sh_rest) row.push_back(v);
    row.push_back(g.opacity_logit);
    for (int k = 0; k < 3; ++k) row.push_back(g.log_scale_raw[k]);
    for (int k = 0; k < 4; ++k) row.push_back(g.rot_raw[k]);
    out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
  if (!out) throw DataError("save_scene: write failure on " + path.string());
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  nlohmann::json j;
  j["frames"] = nlohmann::json::array();
  for (const auto& f : traj.frames) {
    nlohmann::json jf;
    jf["frame_index"] = f.frame_index;
    jf["width"] = f.width;
    jf["height"] = f.height;
    jf["fx"] = f.fx;
    jf["fy"] = f.fy;
    jf["cx"] = f.cx;
    jf["cy"] = f.cy;
    std::vector<double> r(9);
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(r.data()) = f.rotation;
    jf["rotation"] = r;
    jf["translation"] = {f.translation.x(), f.translation.y(), f.translation.z()};
    j["frames"].push_back(jf);
  }
  std::ofstream out(path);
  if (!out) throw DataError("save_trajectory: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_trajectory: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("load_trajectory: bad JSON in " + path.string() + ": " + e.what());
  }
  Trajectory traj;
  for (const auto& jf : j.at("frames")) {
    CameraFrame f;
    f.frame_index = jf.at("frame_index");
    f.width = jf.at("width");
    f.height = jf.at("height");
    f.fx = jf.at("fx");
    f.fy = jf.at("fy");
    f.cx = jf.at("cx");
    f.cy = jf.at("cy");
    std::vector<double> r = jf.at("rotation");
    f.rotation = Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(r.data());
    std::vector<double> t = jf.at("translation");
    f.translation = Vec3(t[0], t[1], t[2]);
    traj.frames.push_back(f);
  }
  traj.validate();
  return traj;
}

}  // namespace worldact
