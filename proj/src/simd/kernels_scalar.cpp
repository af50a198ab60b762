#include <cmath>

#include "aok/simd/kernels.hpp"

namespace aok::simd::scalar {

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += data[i] != 0;
  return count;
}

std::size_t count_overlap(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (a[i] != 0) & (b[i] != 0);
  return count;
}

MeshSums mesh_sums(const TriangleSoA& t) noexcept {
  MeshSums sums;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    // v0 . (v1 x v2)
    const double cx = t.y1[i] * t.z2[i] - t.z1[i] * t.y2[i];
    const double cy = t.z1[i] * t.x2[i] - t.x1[i] * t.z2[i];
    const double cz = t.x1[i] * t.y2[i] - t.y1[i] * t.x2[i];
    sums.signed_volume += t.x0[i] * cx + t.y0[i] * cy + t.z0[i] * cz;

    const double ux = t.x1[i] - t.x0[i], uy = t.y1[i] - t.y0[i], uz = t.z1[i] - t.z0[i];
    const double vx = t.x2[i] - t.x0[i], vy = t.y2[i] - t.y0[i], vz = t.z2[i] - t.z0[i];
    const double nx = uy * vz - uz * vy;
    const double ny = uz * vx - ux * vz;
    const double nz = ux * vy - uy * vx;
    sums.area += std::sqrt(nx * nx + ny * ny + nz * nz);
  }
  sums.signed_volume /= 6.0;
  sums.area *= 0.5;
  return sums;
}

}  // namespace aok::simd::scalar
