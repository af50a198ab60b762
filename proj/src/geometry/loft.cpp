#include <algorithm>
#include <cmath>
#include <limits>

#include "aok/geometry.hpp"

namespace aok::geometry {

std::vector<Point2> resample_closed(std::span<const Point2> pts, int n) {
  if (n < 3) throw ValidationError("resample_closed: need at least 3 samples");
  const std::size_t m = pts.size();
  if (m < 2) throw ValidationError("resample_closed: need at least 2 points");

  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % m];
    cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double perimeter = cum[m];
  if (!(perimeter > 0.0)) throw ValidationError("resample_closed: zero perimeter");

  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(n));
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double s = perimeter * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 1 < m && cum[seg + 1] <= s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    const Point2& a = pts[seg];
    const Point2& b = pts[(seg + 1) % m];
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return out;
}

namespace {

// Rotation of `ring` minimizing the summed distance to `below`.
std::size_t best_offset(const std::vector<Point2>& below, const std::vector<Point2>& ring) {
  const std::size_t n = ring.size();
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t off = 0; off < n; ++off) {
    double cost = 0.0;
    for (std::size_t i = 0; i < n && cost < best_cost; ++i) {
      const Point2& p = ring[(i + off) % n];
      cost += std::hypot(p.x - below[i].x, p.y - below[i].y);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = off;
    }
  }
  return best;
}

}  // namespace

SacMesh loft_mesh(const ContourStack3D& stack, int ring_samples) {
  if (stack.size() < 2) throw ValidationError("loft_mesh needs at least 2 slices");
  if (ring_samples < 3) throw ValidationError("loft_mesh: ring_samples must be >= 3");
  const auto n = static_cast<std::size_t>(ring_samples);
  const std::size_t rings = stack.size();

  std::vector<std::vector<Point2>> resampled;
  resampled.reserve(rings);
  for (std::size_t k = 0; k < rings; ++k) {
    std::vector<Point2> pts = stack.slices()[k].contour.points();
    const double area = signed_area(pts);
    if (std::abs(area) < 1e-9)
      throw ValidationError("degenerate contour at slice " + std::to_string(k) + " (area < 1e-9 mm^2)");
    if (area < 0.0) std::reverse(pts.begin(), pts.end());
    auto ring = resample_closed(pts, ring_samples);
    if (k > 0) {
      const std::size_t off = best_offset(resampled.back(), ring);
      std::rotate(ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(off), ring.end());
    }
    resampled.push_back(std::move(ring));
  }

  SacMesh mesh;
  mesh.vertices.reserve(rings * n + 2);
  for (std::size_t k = 0; k < rings; ++k) {
    const double z = stack.slices()[k].z_mm;
    for (const auto& p : resampled[k]) mesh.vertices.push_back({p.x, p.y, z});
  }
  auto ring_mean = [&](std::size_t k) {
    Point3 c{0.0, 0.0, stack.slices()[k].z_mm};
    for (const auto& p : resampled[k]) {
      c.x += p.x;
      c.y += p.y;
    }
    c.x /= static_cast<double>(n);
    c.y /= static_cast<double>(n);
    return c;
  };
  const auto bottom = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back(ring_mean(0));
  const auto top = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back(ring_mean(rings - 1));

  auto vid = [n](std::size_t ring, std::size_t i) { return static_cast<std::uint32_t>(ring * n + (i % n)); };
  mesh.triangles.reserve(2 * n * (rings - 1) + 2 * n);
  for (std::size_t k = 0; k + 1 < rings; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      mesh.triangles.push_back({vid(k, i), vid(k, i + 1), vid(k + 1, i + 1)});
      mesh.triangles.push_back({vid(k, i), vid(k + 1, i + 1), vid(k + 1, i)});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    mesh.triangles.push_back({bottom, vid(0, i + 1), vid(0, i)});
    mesh.triangles.push_back({top, vid(rings - 1, i), vid(rings - 1, i + 1)});
  }

  orient_outward(mesh);
  return mesh;
}

}  // namespace aok::geometry
