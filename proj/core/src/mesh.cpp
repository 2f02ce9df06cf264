#include "worldact/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "worldact/errors.hpp"

namespace worldact {

const char* face_class_name(FaceClass c) {
  switch (c) {
    case FaceClass::Floor: return "floor";
    case FaceClass::Wall: return "wall";
    case FaceClass::Ceiling: return "ceiling";
    default: return "free";
  }
}

FaceClass face_class_from_name(const std::string& name) {
  if (name == "floor") return FaceClass::Floor;
  if (name == "wall") return FaceClass::Wall;
  if (name == "ceiling") return FaceClass::Ceiling;
  if (name == "free") return FaceClass::Free;
  throw FormatError("unknown face class '" + name + "'");
}

double CollisionMesh::surface_area() const {
  double area = 0;
  for (const auto& f : faces) {
    Vec3 e1 = vertices[f[1]] - vertices[f[0]];
    Vec3 e2 = vertices[f[2]] - vertices[f[0]];
    area += 0.5 * e1.cross(e2).norm();
  }
  return area;
}

Eigen::AlignedBox3d CollisionMesh::bbox() const {
  Eigen::AlignedBox3d box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

Vec3 CollisionMesh::face_normal(size_t f) const {
  const auto& t = faces[f];
  Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
  double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

Vec3 CollisionMesh::face_centroid(size_t f) const {
  const auto& t = faces[f];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

bool CollisionMesh::is_watertight() const {
  if (faces.empty()) return false;
  // key: undirected edge; value: (forward count, backward count)
  std::map<std::pair<int, int>, std::pair<int, int>> edges;
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      if (a == b) return false;  // degenerate face
      if (a < b)
        edges[{a, b}].first++;
      else
        edges[{b, a}].second++;
    }
  }
  for (const auto& [e, counts] : edges)
    if (counts.first != 1 || counts.second != 1) return false;
  return true;
}

std::vector<Vec3> CollisionMesh::sample_surface(size_t n, uint64_t seed) const {
  std::vector<double> cum(faces.size());
  double total = 0;
  for (size_t f = 0; f < faces.size(); ++f) {
    const auto& t = faces[f];
    Vec3 e1 = vertices[t[1]] - vertices[t[0]];
    Vec3 e2 = vertices[t[2]] - vertices[t[0]];
    total += 0.5 * e1.cross(e2).norm();
    cum[f] = total;
  }
  if (total <= 0) throw GeometryError("sample_surface: zero-area mesh");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    double x = uni(rng) * total;
    size_t f = std::lower_bound(cum.begin(), cum.end(), x) - cum.begin();
    f = std::min(f, faces.size() - 1);
    double u = uni(rng), v = uni(rng);
    if (u + v > 1) { u = 1 - u; v = 1 - v; }
    const auto& t = faces[f];
    out.push_back(vertices[t[0]] + u * (vertices[t[1]] - vertices[t[0]]) +
                  v * (vertices[t[2]] - vertices[t[0]]));
  }
  return out;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c, Vec3* closest) {
  // Ericson, Real-Time Collision Detection, closest point on triangle.
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) {
    if (closest) *closest = a;
    return (p - a).norm();
  }
  Vec3 bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) {
    if (closest) *closest = b;
    return (p - b).norm();
  }
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    double v = d1 / (d1 - d3);
    Vec3 q = a + v * ab;
    if (closest) *closest = q;
    return (p - q).norm();
  }
  Vec3 cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) {
    if (closest) *closest = c;
    return (p - c).norm();
  }
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    double w = d2 / (d2 - d6);
    Vec3 q = a + w * ac;
    if (closest) *closest = q;
    return (p - q).norm();
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    Vec3 q = b + w * (c - b);
    if (closest) *closest = q;
    return (p - q).norm();
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  Vec3 q = a + v * ab + w * ac;
  if (closest) *closest = q;
  return (p - q).norm();
}

double one_sided_hausdorff(const CollisionMesh& from, const CollisionMesh& to,
                           size_t samples, uint64_t seed) {
  auto points = from.sample_surface(samples, seed);
  double worst = 0;
  for (const Vec3& p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : to.faces) {
      double d = point_triangle_distance(p, to.vertices[t[0]], to.vertices[t[1]],
                                         to.vertices[t[2]]);
      best = std::min(best, d);
      if (best == 0) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

void save_mesh_obj(const CollisionMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("save_mesh_obj: cannot open " + path.string());
  out.precision(17);  // max_digits10: doubles survive the text round trip
  bool colored = mesh.vertex_colors.size() == mesh.vertices.size();
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out << "v " << v.x() << " " << v.y() << " " << v.z();
    if (colored) {
      const Vec3& c = mesh.vertex_colors[i];
      out << " " << c.x() << " " << c.y() << " " << c.z();
    }
    out << "\n";
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";

  nlohmann::json meta;
  meta["planes"] = nlohmann::json::array();
  for (const auto& p : mesh.planes) {
    meta["planes"].push_back({{"normal", {p.normal.x(), p.normal.y(), p.normal.z()}},
                              {"offset", p.offset},
                              {"class", face_class_name(p.cls)}});
  }
  // Face classes as runs: [start, end) -> class name.
  meta["face_class_runs"] = nlohmann::json::array();
  if (!mesh.face_class.empty()) {
    size_t start = 0;
    for (size_t f = 1; f <= mesh.face_class.size(); ++f) {
      if (f == mesh.face_class.size() || mesh.face_class[f] != mesh.face_class[start]) {
        meta["face_class_runs"].push_back(
            {{"start", start}, {"end", f}, {"class", face_class_name(mesh.face_class[start])}});
        start = f;
      }
    }
  }
  std::filesystem::path meta_path = path;
  meta_path.replace_extension(".meta.json");
  std::ofstream mout(meta_path);
  if (!mout) throw DataError("save_mesh_obj: cannot open " + meta_path.string());
  mout << meta.dump(2) << "\n";
}

CollisionMesh load_mesh_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_mesh_obj: cannot open " + path.string());
  CollisionMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      ss >> x >> y >> z;
      mesh.vertices.emplace_back(x, y, z);
      double r, g, b;
      if (ss >> r >> g >> b) mesh.vertex_colors.emplace_back(r, g, b);
    } else if (tag == "f") {
      int a, b, c;
      ss >> a >> b >> c;
      mesh.faces.emplace_back(a - 1, b - 1, c - 1);
    }
  }
  if (mesh.vertex_colors.size() != mesh.vertices.size()) mesh.vertex_colors.clear();

  std::filesystem::path meta_path = path;
  meta_path.replace_extension(".meta.json");
  if (std::filesystem::exists(meta_path)) {
    std::ifstream min(meta_path);
    nlohmann::json meta;
    min >> meta;
    for (const auto& jp : meta.value("planes", nlohmann::json::array())) {
      PlaneParam p;
      std::vector<double> n = jp.at("normal");
      p.normal = Vec3(n[0], n[1], n[2]);
      p.offset = jp.at("offset");
      p.cls = face_class_from_name(jp.at("class"));
      mesh.planes.push_back(p);
    }
    if (meta.contains("face_class_runs") && !meta["face_class_runs"].empty()) {
      mesh.face_class.assign(mesh.faces.size(), FaceClass::Free);
      for (const auto& run : meta["face_class_runs"]) {
        size_t start = run.at("start"), end = run.at("end");
        FaceClass cls = face_class_from_name(run.at("class"));
        for (size_t f = start; f < end && f < mesh.face_class.size(); ++f)
          mesh.face_class[f] = cls;
      }
    }
  }
  return mesh;
}

}  // namespace worldact
