#pragma once
// Data-parallel inner loops used by mask and mesh measurements.
//
// Every kernel has a scalar reference in kernels_scalar.cpp and, on x86-64,
// an AVX2 variant in kernels_avx2.cpp. The public entry points dispatch on
// the CPU at runtime; the Isa-taking overloads pin one implementation so the
// variants can be tested against each other.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace aok::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// True when the AVX2 translation unit was compiled in and the CPU runs it.
bool avx2_available();

/// Best available ISA. Setting AOK_FORCE_SCALAR=1 in the environment pins
/// the scalar path.
Isa active_isa();

/// Number of nonzero bytes.
std::size_t count_nonzero(std::span<const std::uint8_t> data);
std::size_t count_nonzero(std::span<const std::uint8_t> data, Isa isa);

/// Number of positions where both inputs are nonzero. Sizes must match.
std::size_t count_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::size_t count_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, Isa isa);

/// Triangle soup in structure-of-arrays layout: vertex k of triangle i is
/// (xk[i], yk[i], zk[i]). All nine spans have the same length.
struct TriangleSoA {
  std::span<const double> x0, y0, z0;
  std::span<const double> x1, y1, z1;
  std::span<const double> x2, y2, z2;

  std::size_t size() const noexcept { return x0.size(); }
};

struct MeshSums {
  double signed_volume = 0.0;  // sum of v0 . (v1 x v2) / 6
  double area = 0.0;           // sum of |(v1 - v0) x (v2 - v0)| / 2
};

MeshSums mesh_sums(const TriangleSoA& tris);
MeshSums mesh_sums(const TriangleSoA& tris, Isa isa);

namespace scalar {
std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) noexcept;
std::size_t count_overlap(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) noexcept;
MeshSums mesh_sums(const TriangleSoA& tris) noexcept;
}  // namespace scalar

namespace avx2 {
std::size_t count_nonzero(const std::uint8_t* data, std::size_t n) noexcept;
std::size_t count_overlap(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) noexcept;
MeshSums mesh_sums(const TriangleSoA& tris) noexcept;
}  // namespace avx2

}  // namespace aok::simd
