#include <cmath>

#include "aok/geometry.hpp"
#include "aok/simd/kernels.hpp"

namespace aok::geometry {

double signed_area(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  if (n < 3) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    sum += a.x * b.y - b.x * a.y;
  }
  return 0.5 * sum;
}

Point2 polygon_centroid(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  Point2 mean;
  for (const auto& p : pts) {
    mean.x += p.x;
    mean.y += p.y;
  }
  if (n == 0) return mean;
  mean.x /= static_cast<double>(n);
  mean.y /= static_cast<double>(n);

  // Relative to the mean to limit cancellation.
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = pts[i].x - mean.x, y0 = pts[i].y - mean.y;
    const double x1 = pts[(i + 1) % n].x - mean.x, y1 = pts[(i + 1) % n].y - mean.y;
    const double w = x0 * y1 - x1 * y0;
    a2 += w;
    cx += (x0 + x1) * w;
    cy += (y0 + y1) * w;
  }
  if (std::abs(a2) < 1e-300) return mean;
  return {mean.x + cx / (3.0 * a2), mean.y + cy / (3.0 * a2)};
}

double polygon_area(const Contour2D& contour, Spacing2 spacing) {
  if (!(spacing.sx > 0.0 && spacing.sy > 0.0)) throw ValidationError("spacing must be positive");
  return std::abs(signed_area(contour.points())) * spacing.sx * spacing.sy;
}

double polygon_area(std::span<const Point2> points, Spacing2 spacing) {
  return polygon_area(Contour2D(std::vector<Point2>(points.begin(), points.end())), spacing);
}

double mask_area(const Mask2D& mask) {
  const std::size_t count = simd::count_nonzero(mask.voxels());
  if (count == 0) throw ValidationError("mask has no foreground pixels");
  return static_cast<double>(count) * mask.spacing()[0] * mask.spacing()[1];
}

double mask_volume(const Mask3D& mask) {
  const std::size_t count = simd::count_nonzero(mask.voxels());
  if (count == 0) throw ValidationError("mask has no foreground voxels");
  const auto& s = mask.spacing();
  return static_cast<double>(count) * s[0] * s[1] * s[2];
}

double device_gap(double sac_volume_cm3, double device_volume_cm3) {
  if (!(sac_volume_cm3 > 0.0) || !(device_volume_cm3 > 0.0))
    throw ValidationError("device_gap: volumes must be positive");
  return sac_volume_cm3 - device_volume_cm3;
}

}  // namespace aok::geometry
