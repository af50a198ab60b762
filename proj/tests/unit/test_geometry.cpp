#include <cmath>
#include <numbers>

#include "aok/geometry.hpp"
#include "aok/synthgen.hpp"
#include "doctest.h"

using namespace aok;
using namespace aok::geometry;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

SacMesh scaled(SacMesh m, double k) {
  for (auto& v : m.vertices) v = {v.x * k, v.y * k, v.z * k};
  return m;
}

ShapeMetrics3D metrics_mm(const SacMesh& m) { return mesh_metrics(m); }

}  // namespace

TEST_CASE("polygon area, orientation and centroid") {
  const std::vector<Point2> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(signed_area(sq) == 4.0);
  const std::vector<Point2> cw{{0, 0}, {0, 2}, {2, 2}, {2, 0}};
  CHECK(signed_area(cw) == -4.0);
  const auto c = polygon_centroid(sq);
  CHECK(c.x == Approx(1.0));
  CHECK(c.y == Approx(1.0));
  CHECK(polygon_area(cw, {0.5, 0.25}) == Approx(0.5));
  const std::vector<Point2> bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(polygon_area(bow), ValidationError);

  // A 200-gon in pixel units at 0.2 mm/px approximates pi r^2.
  std::vector<Point2> circ;
  for (int i = 0; i < 200; ++i) circ.push_back({25 * std::cos(2 * kPi * i / 200), 25 * std::sin(2 * kPi * i / 200)});
  CHECK(rel(polygon_area(Contour2D(circ), {0.2, 0.2}), kPi * 25.0) < 1e-3);
}

TEST_CASE("mask area and volume") {
  Mask2D m({4, 4}, {0.5, 0.25});
  m.set({1, 1}, true);
  m.set({2, 1}, true);
  CHECK(mask_area(m) == Approx(0.25));
  CHECK_THROWS_AS(mask_area(Mask2D({4, 4}, {1, 1})), ValidationError);
  Mask3D v({3, 3, 3}, {0.5, 0.5, 2.0});
  v.set({0, 0, 0}, true);
  CHECK(mask_volume(v) == Approx(0.5));
}

TEST_CASE("vessel angles with segments directed away from the bifurcation") {
  // Parent drawn toward the bifurcation, daughters drawn away: 180 - 45 and 90 + 45.
  VesselAnnotation v;
  v.parent = {{0, -10}, {0, 0}};
  v.left = {{0, 0}, {-10, 10}};
  v.right = {{10, 0}, {0, 0}};  // drawn toward the bifurcation
  const auto a = vessel_angles(v);
  CHECK(a.left_angle_deg == Approx(135.0));
  CHECK(a.right_angle_deg == Approx(90.0));
  CHECK(a.normalized_left == Approx(0.75));
  CHECK(a.normalized_right == Approx(0.5));

  v.right = {{30, 0}, {40, 0}};
  CHECK_THROWS_AS(vessel_angles(v), ValidationError);
  v.right = {{0, 0}, {0, 0}};
  CHECK_THROWS_AS(vessel_angles(v), ValidationError);

  v = {};
  v.parent = {{0, -10}, {0, 0}};
  v.left = {{0, 0}, {-1, 1}};
  v.right = {{0, 0}, {1, 1}};
  v.parent_diam_mm = 4;
  v.left_diam_mm = 2;
  v.right_diam_mm = 3;
  const auto r = vessel_ratios(v);
  CHECK(*r.larger_daughter_mm == 3);
  CHECK(*r.left_over_parent == Approx(0.5));
  CHECK(*r.larger_over_parent == Approx(0.75));
  CHECK(*r.left_over_right == Approx(2.0 / 3.0));
  v.right_diam_mm.reset();
  const auto s = vessel_ratios(v);
  CHECK(*s.larger_daughter_mm == 2);
  CHECK_FALSE(s.right_over_parent);
  CHECK_FALSE(s.left_over_right);
}

TEST_CASE("shape metrics of a sphere are the isoperimetric minimum") {
  const double r = 1.0;
  const auto m = shape_metrics(4.0 / 3.0 * kPi * r * r * r, 4 * kPi * r * r);
  CHECK(m.ipr == Approx(kSphereIpr));
  CHECK(m.ipr == Approx(4.8360).epsilon(1e-4));
  CHECK(m.nsi == Approx(1 - kNsiConstant / kSphereIpr));
}

TEST_CASE("cube mesh is exact") {
  const auto box = box_mesh(2, 3, 4);
  CHECK(is_closed_manifold(box));
  CHECK(is_consistently_oriented(box));
  const auto m = mesh_metrics(box);
  CHECK(std::abs(m.volume_cm3 - 24e-3) < 1e-12);
  CHECK(std::abs(m.surface_cm2 - 52e-2) < 1e-12);

  const auto cube = mesh_metrics(box_mesh(10, 10, 10));
  CHECK(std::abs(cube.volume_cm3 - 1.0) < 1e-9);
  CHECK(std::abs(cube.surface_cm2 - 6.0) < 1e-9);
  CHECK(std::abs(cube.ipr - 6.0) < 1e-9);

  // Translation does not change the signed-tetrahedron volume.
  auto moved = box;
  for (auto& v : moved.vertices) v = {v.x + 100, v.y - 50, v.z + 7};
  CHECK(std::abs(signed_volume_mm3(moved) - 24.0) < 1e-9);
}

TEST_CASE("mesh orientation and closure checks") {
  auto box = box_mesh(1, 1, 1);
  for (auto& t : box.triangles) std::swap(t[1], t[2]);
  CHECK(signed_volume_mm3(box) < 0);
  orient_outward(box);
  CHECK(signed_volume_mm3(box) == Approx(1.0));

  auto flipped_one = box_mesh(1, 1, 1);
  std::swap(flipped_one.triangles[0][1], flipped_one.triangles[0][2]);
  CHECK(is_closed_manifold(flipped_one));
  CHECK_FALSE(is_consistently_oriented(flipped_one));
  CHECK_THROWS_AS(mesh_metrics(flipped_one), ValidationError);

  auto open = box_mesh(1, 1, 1);
  open.triangles.pop_back();
  CHECK_FALSE(is_closed_manifold(open));
  CHECK_THROWS_AS(mesh_metrics(open), ValidationError);
}

TEST_CASE("icosphere converges to the sphere") {
  const auto m = mesh_metrics(icosphere(4, 10.0));
  CHECK(rel(m.volume_cm3, 4.18879) < 0.01);
  CHECK(rel(m.surface_cm2, 4 * kPi) < 0.01);
}

TEST_CASE("sphere contour stack lofts to the analytic volume") {
  synthgen::ShapeParams p;
  p.size = {10, 10, 10};
  const auto g = synthgen::gen_shape(synthgen::ShapeKind::Sphere, p, synthgen::ShapeOutput::Stack,
                                     {.slices = 33, .ring_samples = 64});
  REQUIRE(g.stack);
  CHECK(g.stack->size() == 33);
  const auto m = mesh_metrics(loft_mesh(*g.stack, 64));
  CHECK(rel(m.volume_cm3, 4.18879) < 0.02);
  CHECK(rel(m.ipr, 4.8360) < 0.01);
  CHECK(std::abs(m.nsi - 0.2063) < 0.01);
}

TEST_CASE("prism stack lofts exactly") {
  synthgen::ShapeParams p;
  p.size = {4, 6, 8};
  const auto g = synthgen::gen_shape(synthgen::ShapeKind::Prism, p, synthgen::ShapeOutput::Stack,
                                     {.slices = 5, .ring_samples = 20});
  REQUIRE(g.stack);
  // Perimeter 20 mm: one sample per mm puts a sample on every corner.
  const auto mesh = loft_mesh(*g.stack, 20);
  CHECK(std::abs(signed_volume_mm3(mesh) - *g.truth.volume_mm3) < 1e-9);
  CHECK(std::abs(mesh_metrics(mesh).surface_cm2 * 100 - *g.truth.surface_mm2) < 1e-9);
}

TEST_CASE("NSI and IPR are scale invariant") {
  synthgen::ShapeParams p;
  p.size = {6, 4, 3};
  const auto g = synthgen::gen_shape(synthgen::ShapeKind::Ellipsoid, p, synthgen::ShapeOutput::Stack);
  const auto base = loft_mesh(*g.stack);
  for (const auto& mesh : {base, icosphere(2, 3.0), box_mesh(1, 2, 5)}) {
    const auto m0 = metrics_mm(mesh);
    for (double k : {0.5, 2.0, 10.0}) {
      const auto mk = metrics_mm(scaled(mesh, k));
      CHECK(std::abs(mk.nsi - m0.nsi) < 1e-9);
      CHECK(std::abs(mk.ipr - m0.ipr) < 1e-9);
      CHECK(rel(mk.volume_cm3, m0.volume_cm3 * k * k * k) < 1e-12);
    }
  }
}

TEST_CASE("ellipsoid mask to stack to mesh recovers the volume") {
  for (const auto& size : {std::array<double, 3>{8, 6, 5}, std::array<double, 3>{5, 5, 9}}) {
    synthgen::ShapeParams p;
    p.size = size;
    const auto g = synthgen::gen_shape(synthgen::ShapeKind::Ellipsoid, p, synthgen::ShapeOutput::Mask3D,
                                       {.spacing_mm = 0.5});
    REQUIRE(g.mask3d);
    const auto truth = synthgen::ellipsoid_volume(size[0], size[1], size[2]);
    CHECK(*g.truth.volume_mm3 == Approx(truth));
    const auto stack = mask_to_stack(*g.mask3d);
    const auto m = mesh_metrics(loft_mesh(stack));
    INFO("volume " << m.volume_cm3 * 1000 << " vs " << truth);
    CHECK(rel(m.volume_cm3 * 1000, truth) < 0.03);
    CHECK(rel(mask_volume(*g.mask3d), truth) < 0.03);
  }
}

TEST_CASE("Moore trace follows the outer boundary") {
  // 3x3 block with a hole in the middle: the outer ring has 8 pixels.
  std::vector<std::uint8_t> g(5 * 5, 0);
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) g[y * 5 + x] = (x == 2 && y == 2) ? 0 : 1;
  const auto t = moore_trace(g, 5, 5);
  CHECK(t.size() == 8);
  CHECK(t.front() == std::array<int, 2>{1, 1});

  std::vector<std::uint8_t> one(9, 0);
  one[4] = 1;
  CHECK(moore_trace(one, 3, 3).size() == 1);
  CHECK(moore_trace(std::vector<std::uint8_t>(9, 0), 3, 3).empty());
}

TEST_CASE("mask slices with several components are rejected unless asked") {
  Mask3D m({12, 12, 2}, {1, 1, 1});
  for (int z = 0; z < 2; ++z)
    for (int y = 2; y < 6; ++y)
      for (int x = 2; x < 6; ++x) m.set({std::size_t(x), std::size_t(y), std::size_t(z)}, true);
  m.set({10, 10, 0}, true);
  CHECK_THROWS_AS(mask_to_stack(m), ValidationError);
  const auto s = mask_to_stack(m, {.largest_component_only = true});
  CHECK(s.size() == 2);
  CHECK(polygon_area(s.slices()[0].contour) == Approx(16.0));
}

TEST_CASE("resampling and device gap") {
  const std::vector<Point2> sq{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  const auto r = resample_closed(sq, 8);
  REQUIRE(r.size() == 8);
  CHECK(r[1].x == Approx(2.0));
  CHECK(r[2].x == Approx(4.0));
  CHECK(r[2].y == Approx(0.0));
  CHECK(device_gap(0.3, 0.25) == Approx(0.05));
  CHECK(device_gap(0.2, 0.25) == Approx(-0.05));
}
