#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "aok/simd/kernels.hpp"

namespace aok::simd {

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(AOK_HAVE_AVX2_TU)
  static const bool ok = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return ok;
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* force = std::getenv("AOK_FORCE_SCALAR");
    if (force && std::strcmp(force, "0") != 0 && *force != '\0') return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

namespace {

void require(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available()) throw std::invalid_argument("AVX2 kernels are not available");
}

}  // namespace

std::size_t count_nonzero(std::span<const std::uint8_t> data) { return count_nonzero(data, active_isa()); }

std::size_t count_nonzero(std::span<const std::uint8_t> data, Isa isa) {
  require(isa);
#if defined(AOK_HAVE_AVX2_TU)
  if (isa == Isa::Avx2) return avx2::count_nonzero(data.data(), data.size());
#endif
  return scalar::count_nonzero(data.data(), data.size());
}

std::size_t count_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  return count_overlap(a, b, active_isa());
}

std::size_t count_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, Isa isa) {
  if (a.size() != b.size()) throw std::invalid_argument("count_overlap: size mismatch");
  require(isa);
#if defined(AOK_HAVE_AVX2_TU)
  if (isa == Isa::Avx2) return avx2::count_overlap(a.data(), b.data(), a.size());
#endif
  return scalar::count_overlap(a.data(), b.data(), a.size());
}

MeshSums mesh_sums(const TriangleSoA& tris) { return mesh_sums(tris, active_isa()); }

MeshSums mesh_sums(const TriangleSoA& tris, Isa isa) {
  const std::size_t n = tris.size();
  for (auto s : {tris.y0, tris.z0, tris.x1, tris.y1, tris.z1, tris.x2, tris.y2, tris.z2})
    if (s.size() != n) throw std::invalid_argument("mesh_sums: coordinate arrays differ in length");
  require(isa);
#if defined(AOK_HAVE_AVX2_TU)
  if (isa == Isa::Avx2) return avx2::mesh_sums(tris);
#endif
  return scalar::mesh_sums(tris);
}

}  // namespace aok::simd
