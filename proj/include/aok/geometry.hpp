#pragma once
// 2D/3D measurements of the aneurysm sac and its parent/daughter vessels.
// Inputs are in millimetres; 3D shape metrics are reported in cm^3 / cm^2.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "aok/core.hpp"

namespace aok::geometry {

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

/// Shoelace sum of the closed polygon; positive for counter-clockwise order.
double signed_area(std::span<const Point2> points);

/// Area-weighted centroid. Falls back to the vertex mean for zero area.
Point2 polygon_centroid(std::span<const Point2> points);

/// Enclosed area in mm^2 of a contour given in pixel units at `spacing`.
double polygon_area(const Contour2D& contour, Spacing2 spacing = {});

/// Same, validating the raw point list first (ValidationError when the
/// polygon has fewer than 3 points or self-intersects).
double polygon_area(std::span<const Point2> points, Spacing2 spacing = {});

/// Foreground pixel count times pixel area. Throws on an empty mask.
double mask_area(const Mask2D& mask);

/// Foreground voxel count times voxel volume, in mm^3. Throws on an empty mask.
double mask_volume(const Mask3D& mask);

struct AngleMeasure {
  double left_angle_deg = 0.0;
  double right_angle_deg = 0.0;
  double normalized_left = 0.0;   // left_angle_deg / 180
  double normalized_right = 0.0;  // right_angle_deg / 180
};

/// Angles between the parent vessel and each daughter, with every segment
/// directed away from the bifurcation. The bifurcation is where the three
/// segments have their closest endpoints; if those lie further than
/// `snap_radius_mm` apart the annotation has no bifurcation and this throws.
AngleMeasure vessel_angles(const VesselAnnotation& vessel, double snap_radius_mm = 5.0);

struct VesselRatios {
  std::optional<double> larger_daughter_mm;
  std::optional<double> left_over_parent;
  std::optional<double> right_over_parent;
  std::optional<double> larger_over_parent;
  std::optional<double> left_over_right;
};

/// Diameter ratios. A ratio is missing whenever one of its inputs is.
VesselRatios vessel_ratios(const VesselAnnotation& vessel);

// ---------------------------------------------------------------------------
// 3D
// ---------------------------------------------------------------------------

/// (36 pi)^(1/3): isoperimetric ratio S / V^(2/3) of a sphere, its minimum.
inline const double kSphereIpr = std::cbrt(36.0 * std::numbers::pi);
/// (18 pi)^(1/3), the constant of the non-sphericity index.
inline const double kNsiConstant = std::cbrt(18.0 * std::numbers::pi);

struct ShapeMetrics3D {
  double volume_cm3 = 0.0;
  double surface_cm2 = 0.0;
  double nsi = 0.0;
  double ipr = 0.0;
};

/// NSI = 1 - (18 pi)^(1/3) V^(2/3) / S and IPR = S / V^(2/3).
ShapeMetrics3D shape_metrics(double volume_cm3, double surface_cm2);

/// Every undirected edge is used by exactly two triangles.
bool is_closed_manifold(const SacMesh& mesh);

/// Every directed edge appears once and its reverse once.
bool is_consistently_oriented(const SacMesh& mesh);

/// Sum of signed tetrahedra against the origin, mm^3.
double signed_volume_mm3(const SacMesh& mesh);

/// Flips every triangle if the enclosed signed volume is negative.
void orient_outward(SacMesh& mesh);

/// Volume, surface, NSI and IPR of a closed, oriented mesh. Throws
/// ValidationError for open or inconsistently oriented meshes.
ShapeMetrics3D mesh_metrics(const SacMesh& mesh);

/// Resamples a closed polyline to `n` points evenly spaced by arc length,
/// starting at the first vertex.
std::vector<Point2> resample_closed(std::span<const Point2> points, int n);

/// Stitches consecutive contours into a closed surface. Each ring is made
/// counter-clockwise, resampled to `ring_samples` points and rotated to the
/// offset with the least summed distance to the ring below; the ends are
/// capped with fans around the ring mean.
SacMesh loft_mesh(const ContourStack3D& stack, int ring_samples = 64);

struct MaskToStackOptions {
  /// Keep only the largest 4-connected component of each slice instead of
  /// rejecting slices with several components.
  bool largest_component_only = false;
  /// Scale each traced contour about its centroid so the enclosed area equals
  /// the slice's foreground area. Contours through boundary pixel centres
  /// otherwise miss about half a pixel all around.
  bool calibrate_area = true;
};

/// Moore-neighbourhood trace of the outer boundary of the component that
/// contains the raster-first foreground pixel of `grid` (x fastest). Returns
/// pixel indices in visiting order; a lone pixel yields one point.
std::vector<std::array<int, 2>> moore_trace(std::span<const std::uint8_t> grid, int nx, int ny);

/// Per-slice boundaries of a 3D mask as a contour stack in mm; slices without
/// foreground are skipped and z = slice index * sz.
ContourStack3D mask_to_stack(const Mask3D& mask, const MaskToStackOptions& options = {});

/// Sac volume minus fully expanded device volume, cm^3. Positive means the
/// device is smaller than the sac.
double device_gap(double sac_volume_cm3, double device_volume_cm3);

// ---------------------------------------------------------------------------
// Mesh primitives
// ---------------------------------------------------------------------------

/// Subdivided icosahedron projected onto a sphere, outward oriented.
SacMesh icosphere(int subdivisions, double radius_mm, Point3 center = {});

/// Axis-aligned box with one corner at the origin.
SacMesh box_mesh(double size_x, double size_y, double size_z);

}  // namespace aok::geometry
