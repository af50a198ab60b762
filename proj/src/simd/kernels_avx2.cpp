// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher.

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__) || defined(_M_IX86)

#include <immintrin.h>

#include <cmath>

#include "aok/simd/kernels.hpp"

namespace aok::simd::avx2 {

std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) noexcept {
  const __m256i zero = _mm256_setzero_si256();
  std::size_t zeros = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    const auto is_zero = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
    zeros += static_cast<std::size_t>(__builtin_popcount(is_zero));
  }
  std::size_t count = i - zeros;
  for (; i < n; ++i) count += data[i] != 0;
  return count;
}

std::size_t count_overlap(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) noexcept {
  const __m256i zero = _mm256_setzero_si256();
  std::size_t misses = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i either_zero = _mm256_or_si256(_mm256_cmpeq_epi8(va, zero), _mm256_cmpeq_epi8(vb, zero));
    misses += static_cast<std::size_t>(__builtin_popcount(static_cast<std::uint32_t>(_mm256_movemask_epi8(either_zero))));
  }
  std::size_t count = i - misses;
  for (; i < n; ++i) count += (a[i] != 0) & (b[i] != 0);
  return count;
}

MeshSums mesh_sums(const TriangleSoA& t) noexcept {
  const std::size_t n = t.size();
  __m256d vol = _mm256_setzero_pd();
  __m256d area = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(t.x0.data() + i), y0 = _mm256_loadu_pd(t.y0.data() + i),
                  z0 = _mm256_loadu_pd(t.z0.data() + i);
    const __m256d x1 = _mm256_loadu_pd(t.x1.data() + i), y1 = _mm256_loadu_pd(t.y1.data() + i),
                  z1 = _mm256_loadu_pd(t.z1.data() + i);
    const __m256d x2 = _mm256_loadu_pd(t.x2.data() + i), y2 = _mm256_loadu_pd(t.y2.data() + i),
                  z2 = _mm256_loadu_pd(t.z2.data() + i);

    const __m256d cx = _mm256_fmsub_pd(y1, z2, _mm256_mul_pd(z1, y2));
    const __m256d cy = _mm256_fmsub_pd(z1, x2, _mm256_mul_pd(x1, z2));
    const __m256d cz = _mm256_fmsub_pd(x1, y2, _mm256_mul_pd(y1, x2));
    vol = _mm256_add_pd(vol, _mm256_fmadd_pd(x0, cx, _mm256_fmadd_pd(y0, cy, _mm256_mul_pd(z0, cz))));

    const __m256d ux = _mm256_sub_pd(x1, x0), uy = _mm256_sub_pd(y1, y0), uz = _mm256_sub_pd(z1, z0);
    const __m256d vx = _mm256_sub_pd(x2, x0), vy = _mm256_sub_pd(y2, y0), vz = _mm256_sub_pd(z2, z0);
    const __m256d nx = _mm256_fmsub_pd(uy, vz, _mm256_mul_pd(uz, vy));
    const __m256d ny = _mm256_fmsub_pd(uz, vx, _mm256_mul_pd(ux, vz));
    const __m256d nz = _mm256_fmsub_pd(ux, vy, _mm256_mul_pd(uy, vx));
    const __m256d len2 = _mm256_fmadd_pd(nx, nx, _mm256_fmadd_pd(ny, ny, _mm256_mul_pd(nz, nz)));
    area = _mm256_add_pd(area, _mm256_sqrt_pd(len2));
  }

  alignas(32) double lanes_vol[4];
  alignas(32) double lanes_area[4];
  _mm256_store_pd(lanes_vol, vol);
  _mm256_store_pd(lanes_area, area);
  MeshSums sums;
  sums.signed_volume = (lanes_vol[0] + lanes_vol[1]) + (lanes_vol[2] + lanes_vol[3]);
  sums.area = (lanes_area[0] + lanes_area[1]) + (lanes_area[2] + lanes_area[3]);

  for (; i < n; ++i) {
    const double cx = t.y1[i] * t.z2[i] - t.z1[i] * t.y2[i];
    const double cy = t.z1[i] * t.x2[i] - t.x1[i] * t.z2[i];
    const double cz = t.x1[i] * t.y2[i] - t.y1[i] * t.x2[i];
    sums.signed_volume += t.x0[i] * cx + t.y0[i] * cy + t.z0[i] * cz;
    const double ux = t.x1[i] - t.x0[i], uy = t.y1[i] - t.y0[i], uz = t.z1[i] - t.z0[i];
    const double vx = t.x2[i] - t.x0[i], vy = t.y2[i] - t.y0[i], vz = t.z2[i] - t.z0[i];
    const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
    sums.area += std::sqrt(nx * nx + ny * ny + nz * nz);
  }
  sums.signed_volume /= 6.0;
  sums.area *= 0.5;
  return sums;
}

}  // namespace aok::simd::avx2

#endif
