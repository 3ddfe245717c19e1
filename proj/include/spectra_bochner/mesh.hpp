#pragma once

// Closed triangulated surfaces in R^3: icosphere generation, OFF input and
// output, and the quality gates applied before assembly.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spectra_bochner/errors.hpp"

namespace spectra_bochner {

struct SurfaceMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }

  int edge_count() const {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& f : faces)
      for (int k = 0; k < 3; ++k) edges[std::minmax(f[k], f[(k + 1) % 3])]++;
    return static_cast<int>(edges.size());
  }

  int euler_characteristic() const { return vertex_count() - edge_count() + face_count(); }

  double face_area(int f) const {
    const auto& t = faces[f];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }

  double total_area() const {
    double a = 0.0;
    for (int f = 0; f < face_count(); ++f) a += face_area(f);
    return a;
  }

  /// Longest edge length.
  double mesh_size() const {
    double h = 0.0;
    for (const auto& f : faces)
      for (int k = 0; k < 3; ++k) h = std::max(h, (vertices[f[k]] - vertices[f[(k + 1) % 3]]).norm());
    return h;
  }

  Eigen::Vector3d barycenter(int f) const {
    const auto& t = faces[f];
    return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
  }

  /// Closed, consistently oriented, min angle > 1 degree and area above
  /// 1e-12 of the mean. Throws MeshTopology or DegenerateElement.
  void validate() const {
    if (faces.empty()) fail(ErrorKind::MeshTopology, "mesh has no faces");
    std::map<std::pair<int, int>, int> directed;
    for (const auto& f : faces)
      for (int k = 0; k < 3; ++k) {
        const int a = f[k], b = f[(k + 1) % 3];
        if (a < 0 || b < 0 || a >= vertex_count() || b >= vertex_count())
          fail(ErrorKind::MeshTopology, "face references a missing vertex");
        if (a == b) fail(ErrorKind::DegenerateElement, "face with repeated vertex");
        if (++directed[{a, b}] > 1) fail(ErrorKind::MeshTopology, "mesh is not consistently oriented or is non-manifold");
      }
    for (const auto& [e, count] : directed)
      if (!directed.count({e.second, e.first})) fail(ErrorKind::MeshTopology, "mesh is not closed");
    const double mean = total_area() / face_count();
    const double min_angle = std::numbers::pi / 180.0;
    for (int f = 0; f < face_count(); ++f) {
      if (!(face_area(f) > 1e-12 * mean)) fail(ErrorKind::DegenerateElement, "triangle with (near) zero area");
      const auto& t = faces[f];
      for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3d u = vertices[t[(k + 1) % 3]] - vertices[t[k]];
        const Eigen::Vector3d v = vertices[t[(k + 2) % 3]] - vertices[t[k]];
        if (std::atan2(u.cross(v).norm(), u.dot(v)) < min_angle)
          fail(ErrorKind::DegenerateElement, "triangle angle below 1 degree");
      }
    }
  }
};

/// Icosahedron subdivided `subdiv` times with vertices on the sphere of the
/// given radius; 10 * 4^subdiv + 2 vertices. Faces are oriented outward.
inline SurfaceMesh icosphere(int subdiv, double radius = 1.0) {
  if (subdiv < 0) fail(ErrorKind::InvalidArgument, "subdivision level must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  SurfaceMesh m;
  for (auto v : {Eigen::Vector3d(-1, t, 0), Eigen::Vector3d(1, t, 0), Eigen::Vector3d(-1, -t, 0),
                 Eigen::Vector3d(1, -t, 0), Eigen::Vector3d(0, -1, t), Eigen::Vector3d(0, 1, t),
                 Eigen::Vector3d(0, -1, -t), Eigen::Vector3d(0, 1, -t), Eigen::Vector3d(t, 0, -1),
                 Eigen::Vector3d(t, 0, 1), Eigen::Vector3d(-t, 0, -1), Eigen::Vector3d(-t, 0, 1)})
    m.vertices.push_back(v.normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdiv; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const int idx = m.vertex_count() - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  for (auto& v : m.vertices) v *= radius;
  return m;
}

/// Icosphere mapped onto the ellipsoid with the given semi-axes.
inline SurfaceMesh ellipsoid_mesh(int subdiv, const Eigen::Vector3d& axes) {
  SurfaceMesh m = icosphere(subdiv, 1.0);
  for (auto& v : m.vertices) v = v.cwiseProduct(axes);
  return m;
}

inline SurfaceMesh read_off(std::istream& in) {
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  std::string line;
  if (!next_line(line)) fail(ErrorKind::Io, "empty OFF input");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") fail(ErrorKind::Io, "missing OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) {
    if (!next_line(line)) fail(ErrorKind::Io, "missing OFF counts line");
    std::istringstream counts(line);
    counts >> nv >> nf >> ne;
  } else {
    header >> nf >> ne;
  }
  if (nv < 0 || nf < 0) fail(ErrorKind::Io, "bad OFF counts line");
  SurfaceMesh m;
  m.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_line(line)) fail(ErrorKind::Io, "truncated OFF vertex list");
    std::istringstream ls(line);
    Eigen::Vector3d v;
    if (!(ls >> v.x() >> v.y() >> v.z())) fail(ErrorKind::Io, "bad OFF vertex line");
    m.vertices.push_back(v);
  }
  m.faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    if (!next_line(line)) fail(ErrorKind::Io, "truncated OFF face list");
    std::istringstream ls(line);
    int k = 0;
    std::array<int, 3> f{};
    if (!(ls >> k >> f[0] >> f[1] >> f[2])) fail(ErrorKind::Io, "bad OFF face line");
    if (k != 3) fail(ErrorKind::Io, "only triangular OFF faces are supported");
    m.faces.push_back(f);
  }
  return m;
}

inline SurfaceMesh read_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return read_off(in);
}

inline void write_off(std::ostream& out, const SurfaceMesh& m) {
  out << "OFF\n" << m.vertex_count() << ' ' << m.face_count() << ' ' << m.edge_count() << '\n';
  out.precision(17);
  for (const auto& v : m.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : m.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_off(const std::string& path, const SurfaceMesh& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  write_off(out, m);
}

}  // namespace spectra_bochner
