#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "aok/geometry.hpp"

namespace aok::geometry {

namespace {

double dist(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double angle_deg(const Point2& from_a, const Point2& to_a, const Point2& from_b, const Point2& to_b) {
  const double ax = to_a.x - from_a.x, ay = to_a.y - from_a.y;
  const double bx = to_b.x - from_b.x, by = to_b.y - from_b.y;
  const double cosine = std::clamp((ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by)), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

}  // namespace

AngleMeasure vessel_angles(const VesselAnnotation& vessel, double snap_radius_mm) {
  for (const Segment2* s : {&vessel.parent, &vessel.left, &vessel.right})
    if (!(s->length() > 0.0)) throw ValidationError("vessel segment has zero length");

  // Pick one endpoint per segment so the three chosen endpoints are closest
  // together; those meet at the bifurcation.
  const std::array<const Segment2*, 3> segs{&vessel.parent, &vessel.left, &vessel.right};
  auto endpoint = [](const Segment2& s, int which) { return which == 0 ? s.a : s.b; };
  double best = std::numeric_limits<double>::infinity();
  std::array<int, 3> pick{0, 0, 0};
  for (int p = 0; p < 2; ++p)
    for (int l = 0; l < 2; ++l)
      for (int r = 0; r < 2; ++r) {
        const Point2 ep = endpoint(*segs[0], p), el = endpoint(*segs[1], l), er = endpoint(*segs[2], r);
        const double spread = dist(ep, el) + dist(ep, er) + dist(el, er);
        if (spread < best) {
          best = spread;
          pick = {p, l, r};
        }
      }

  std::array<Point2, 3> near{}, far{};
  for (int i = 0; i < 3; ++i) {
    near[i] = endpoint(*segs[i], pick[i]);
    far[i] = endpoint(*segs[i], 1 - pick[i]);
  }
  const double max_gap = std::max({dist(near[0], near[1]), dist(near[0], near[2]), dist(near[1], near[2])});
  if (max_gap > snap_radius_mm)
    throw ValidationError("no bifurcation: closest vessel endpoints are " + std::to_string(max_gap) +
                          " mm apart (snap radius " + std::to_string(snap_radius_mm) + " mm)");

  AngleMeasure out;
  out.left_angle_deg = angle_deg(near[0], far[0], near[1], far[1]);
  out.right_angle_deg = angle_deg(near[0], far[0], near[2], far[2]);
  if (!(out.left_angle_deg > 0.0) || !(out.right_angle_deg > 0.0))
    throw ValidationError("daughter vessel folds back onto the parent (zero angle)");
  out.normalized_left = out.left_angle_deg / 180.0;
  out.normalized_right = out.right_angle_deg / 180.0;
  return out;
}

VesselRatios vessel_ratios(const VesselAnnotation& v) {
  auto usable = [](const std::optional<double>& d) { return d && *d > 0.0 ? d : std::nullopt; };
  const auto parent = usable(v.parent_diam_mm);
  const auto left = usable(v.left_diam_mm);
  const auto right = usable(v.right_diam_mm);
  auto ratio = [](const std::optional<double>& num, const std::optional<double>& den) -> std::optional<double> {
    if (num && den) return *num / *den;
    return std::nullopt;
  };

  VesselRatios out;
  if (left && right)
    out.larger_daughter_mm = std::max(*left, *right);
  else if (left)
    out.larger_daughter_mm = left;
  else if (right)
    out.larger_daughter_mm = right;
  out.left_over_parent = ratio(left, parent);
  out.right_over_parent = ratio(right, parent);
  out.larger_over_parent = ratio(out.larger_daughter_mm, parent);
  out.left_over_right = ratio(left, right);
  return out;
}

}  // namespace aok::geometry
