#include <random>
#include <vector>

#include "aok/geometry.hpp"
#include "aok/simd/kernels.hpp"
#include "doctest.h"

using namespace aok;
using namespace aok::simd;

namespace {

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n, double density) {
  std::uniform_real_distribution<double> u;
  std::uniform_int_distribution<int> b(1, 255);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = u(rng) < density ? static_cast<std::uint8_t>(b(rng)) : 0;
  return v;
}

struct Soup {
  std::vector<double> c[9];
  TriangleSoA view() const {
    return {c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8]};
  }
};

Soup random_soup(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0, 10);
  Soup s;
  for (auto& col : s.c) {
    col.resize(n);
    for (auto& x : col) x = z(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("reported ISA is consistent") {
  CHECK((to_string(Isa::Scalar) == "scalar"));
  if (!avx2_available()) CHECK(active_isa() == Isa::Scalar);
  MESSAGE("active ISA: " << to_string(active_isa()));
}

TEST_CASE("byte counters agree across ISAs for every length and offset") {
  if (!avx2_available()) return;
  std::mt19937_64 rng(1);
  for (std::size_t n : {0, 1, 7, 31, 32, 33, 63, 64, 65, 255, 256, 1000, 4097, 100003}) {
    for (double density : {0.0, 0.05, 0.5, 1.0}) {
      const auto a = random_bytes(rng, n + 3, density), b = random_bytes(rng, n + 3, density);
      for (std::size_t off = 0; off < 3; ++off) {
        std::span<const std::uint8_t> sa(a.data() + off, n), sb(b.data() + off, n);
        std::size_t want_nz = 0, want_ov = 0;
        for (std::size_t i = 0; i < n; ++i) {
          want_nz += sa[i] != 0;
          want_ov += sa[i] != 0 && sb[i] != 0;
        }
        CHECK(count_nonzero(sa, Isa::Scalar) == want_nz);
        CHECK(count_nonzero(sa, Isa::Avx2) == want_nz);
        CHECK(count_overlap(sa, sb, Isa::Scalar) == want_ov);
        CHECK(count_overlap(sa, sb, Isa::Avx2) == want_ov);
      }
    }
  }
}

TEST_CASE("mesh sums agree across ISAs") {
  std::mt19937_64 rng(2);
  for (std::size_t n : {0, 1, 3, 4, 5, 17, 1000, 12345}) {
    const auto s = random_soup(rng, n);
    const auto ref = mesh_sums(s.view(), Isa::Scalar);
    double vol = 0, area = 0;  // direct evaluation, no shared code
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = s.c[0][i], ay = s.c[1][i], az = s.c[2][i];
      const double bx = s.c[3][i], by = s.c[4][i], bz = s.c[5][i];
      const double cx = s.c[6][i], cy = s.c[7][i], cz = s.c[8][i];
      vol += (ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)) / 6.0;
      const double ux = bx - ax, uy = by - ay, uz = bz - az, vx = cx - ax, vy = cy - ay, vz = cz - az;
      area += std::sqrt(std::pow(uy * vz - uz * vy, 2) + std::pow(uz * vx - ux * vz, 2) +
                        std::pow(ux * vy - uy * vx, 2)) / 2.0;
    }
    const double scale = 1e-12 * (1 + static_cast<double>(n)) * 1e3;
    CHECK(std::abs(ref.signed_volume - vol) <= scale);
    CHECK(std::abs(ref.area - area) <= scale);
    if (avx2_available()) {
      const auto v = mesh_sums(s.view(), Isa::Avx2);
      CHECK(std::abs(v.signed_volume - ref.signed_volume) <= scale);
      CHECK(std::abs(v.area - ref.area) <= scale);
    }
  }
}

TEST_CASE("dispatched mesh metrics match both ISAs on real meshes") {
  const auto mesh = geometry::icosphere(3, 7.0);
  Soup s;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const auto& p = mesh.vertices[t[k]];
      s.c[3 * k].push_back(p.x);
      s.c[3 * k + 1].push_back(p.y);
      s.c[3 * k + 2].push_back(p.z);
    }
  const auto d = mesh_sums(s.view());
  CHECK(std::abs(d.signed_volume - geometry::signed_volume_mm3(mesh)) < 1e-9);
  const auto r = mesh_sums(s.view(), Isa::Scalar);
  CHECK(std::abs(d.area - r.area) < 1e-9);
}
