#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "aok/geometry.hpp"
#include "aok/simd/kernels.hpp"

namespace aok::geometry {

namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

struct SoABuffers {
  std::vector<double> c[9];

  explicit SoABuffers(const SacMesh& mesh) {
    for (auto& v : c) v.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
      for (int k = 0; k < 3; ++k) {
        const Point3& p = mesh.vertices.at(t[k]);
        c[3 * k + 0].push_back(p.x);
        c[3 * k + 1].push_back(p.y);
        c[3 * k + 2].push_back(p.z);
      }
    }
  }

  simd::TriangleSoA view() const {
    return {c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8]};
  }
};

}  // namespace

ShapeMetrics3D shape_metrics(double volume_cm3, double surface_cm2) {
  if (!(volume_cm3 > 0.0) || !(surface_cm2 > 0.0)) throw ValidationError("volume and surface must be positive");
  ShapeMetrics3D m;
  m.volume_cm3 = volume_cm3;
  m.surface_cm2 = surface_cm2;
  const double v23 = std::cbrt(volume_cm3 * volume_cm3);
  m.nsi = 1.0 - kNsiConstant * (v23 / surface_cm2);
  m.ipr = surface_cm2 / v23;
  return m;
}

bool is_closed_manifold(const SacMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  std::unordered_map<std::uint64_t, int> uses;
  uses.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      std::uint32_t a = t[k], b = t[(k + 1) % 3];
      if (a == b || a >= mesh.vertices.size() || b >= mesh.vertices.size()) return false;
      if (a > b) std::swap(a, b);
      ++uses[edge_key(a, b)];
    }
  }
  return std::all_of(uses.begin(), uses.end(), [](const auto& kv) { return kv.second == 2; });
}

bool is_consistently_oriented(const SacMesh& mesh) {
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      if (++directed[edge_key(t[k], t[(k + 1) % 3])] > 1) return false;
  for (const auto& [key, count] : directed) {
    const auto a = static_cast<std::uint32_t>(key >> 32);
    const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
    if (!directed.contains(edge_key(b, a))) return false;
  }
  return true;
}

double signed_volume_mm3(const SacMesh& mesh) {
  SoABuffers soa(mesh);
  return simd::mesh_sums(soa.view()).signed_volume;
}

void orient_outward(SacMesh& mesh) {
  if (signed_volume_mm3(mesh) < 0.0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
}

ShapeMetrics3D mesh_metrics(const SacMesh& mesh) {
  if (!is_closed_manifold(mesh)) throw ValidationError("mesh is not closed (some edge is not shared by exactly 2 triangles)");
  if (!is_consistently_oriented(mesh)) throw ValidationError("mesh triangles are not consistently oriented");
  SoABuffers soa(mesh);
  const simd::MeshSums sums = simd::mesh_sums(soa.view());
  const double volume_mm3 = std::abs(sums.signed_volume);
  return shape_metrics(volume_mm3 / 1000.0, sums.area / 100.0);
}

SacMesh icosphere(int subdivisions, double radius_mm, Point3 center) {
  if (subdivisions < 0 || !(radius_mm > 0.0)) throw ValidationError("icosphere: bad parameters");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point3> unit = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                              {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<std::uint32_t, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  auto normalize = [](Point3 p) {
    const double n = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    return Point3{p.x / n, p.y / n, p.z / n};
  };
  for (auto& p : unit) p = normalize(p);

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Point3& p = unit[a];
      const Point3& q = unit[b];
      unit.push_back(normalize({(p.x + q.x) / 2, (p.y + q.y) / 2, (p.z + q.z) / 2}));
      const auto idx = static_cast<std::uint32_t>(unit.size() - 1);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const auto ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  SacMesh mesh;
  mesh.vertices.reserve(unit.size());
  for (const auto& p : unit)
    mesh.vertices.push_back({center.x + radius_mm * p.x, center.y + radius_mm * p.y, center.z + radius_mm * p.z});
  mesh.triangles = std::move(faces);
  orient_outward(mesh);
  return mesh;
}

SacMesh box_mesh(double sx, double sy, double sz) {
  if (!(sx > 0.0 && sy > 0.0 && sz > 0.0)) throw ValidationError("box_mesh: sizes must be positive");
  SacMesh mesh;
  mesh.vertices = {{0, 0, 0}, {sx, 0, 0}, {sx, sy, 0}, {0, sy, 0},
                   {0, 0, sz}, {sx, 0, sz}, {sx, sy, sz}, {0, sy, sz}};
  mesh.triangles = {{0, 2, 1}, {0, 3, 2},   // bottom (-z)
                    {4, 5, 6}, {4, 6, 7},   // top (+z)
                    {0, 1, 5}, {0, 5, 4},   // -y
                    {2, 3, 7}, {2, 7, 6},   // +y
                    {1, 2, 6}, {1, 6, 5},   // +x
                    {0, 4, 7}, {0, 7, 3}};  // -x
  return mesh;
}

}  // namespace aok::geometry
