#pragma once
// File formats shared by every component:
//
//   cohort CSV        header row; case_id, label, then clinical columns; an
//                     empty cell is a missing value; list cells use ';'
//   annotation JSON   one document per case, every section optional
//   mask 2D           binary PGM (P5, maxval 255, nonzero = foreground) plus
//                     a JSON sidecar {"spacing_mm":[sx,sy]}
//   mask 3D           raw bytes, x fastest then y then z, plus a JSON sidecar
//                     {"dims":[nx,ny,nz],"spacing_mm":[sx,sy,sz]}
//   seg manifest      {"cases":[{"case_id","image","mask_gt","mask_pred","split"}]}
//   device catalog    {"devices":[{"model","expanded_volume_cm3"}]}
//
// Sidecars live next to their payload with the extension replaced by .json.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aok/core.hpp"

namespace aok::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

// ---------------------------------------------------------------------------
// Cohort CSV
// ---------------------------------------------------------------------------

/// Recognized cohort columns in their canonical order.
const std::vector<std::string>& cohort_columns();

struct CohortReadOptions {
  bool allow_extra_columns = false;
};

/// One record per data row. Throws ParseError (with line number) on malformed
/// CSV, unknown columns, bad values or labels, and duplicate case ids.
Cohort parse_cohort(std::string_view text, const CohortReadOptions& options = {});
Cohort read_cohort(const fs::path& path, const CohortReadOptions& options = {});

std::string format_cohort(const Cohort& cohort);
void write_cohort(const fs::path& path, const Cohort& cohort);

// ---------------------------------------------------------------------------
// Annotation JSON
// ---------------------------------------------------------------------------

/// Contour drawn on a 2D view, in pixel units, with its pixel spacing.
struct ContourAnnotation {
  Contour2D contour;
  Spacing2 spacing;

  bool operator==(const ContourAnnotation&) const = default;
};

/// Everything annotated for one case. nullopt marks "not annotated".
struct AnnotationBundle {
  std::string case_id;
  std::optional<Measurement2D> ap;
  std::optional<Measurement2D> lateral;
  std::optional<VesselAnnotation> vessel;
  std::optional<ContourAnnotation> contour_ap;
  std::optional<ContourAnnotation> contour_lateral;
  std::optional<ContourStack3D> stack;
  std::optional<std::string> device_model;

  const std::optional<Measurement2D>& measurement(View view) const { return view == View::AP ? ap : lateral; }
  const std::optional<ContourAnnotation>& contour(View view) const {
    return view == View::AP ? contour_ap : contour_lateral;
  }

  bool operator==(const AnnotationBundle&) const = default;
};

/// Throws ParseError for malformed JSON or wrong shapes, ValidationError when
/// a section violates a domain invariant (contour < 3 points, z not strictly
/// increasing, non-positive spacing...).
AnnotationBundle parse_annotation(std::string_view json_text);
AnnotationBundle read_annotation(const fs::path& path);
std::string format_annotation(const AnnotationBundle& bundle);
void write_annotation(const fs::path& path, const AnnotationBundle& bundle);

/// Every *.json in `dir`, keyed by case_id.
std::map<std::string, AnnotationBundle> read_annotation_dir(const fs::path& dir);

// ---------------------------------------------------------------------------
// Masks and grayscale images
// ---------------------------------------------------------------------------

fs::path sidecar_path(const fs::path& payload);

Mask2D read_mask2d(const fs::path& pgm);
void write_mask2d(const fs::path& pgm, const Mask2D& mask);
Mask3D read_mask3d(const fs::path& raw);
void write_mask3d(const fs::path& raw, const Mask3D& mask);

/// 8-bit intensity image in the same containers as masks, values kept as is.
template <std::size_t Rank>
struct GrayImage {
  std::array<std::size_t, Rank> dims{};
  std::array<double, Rank> spacing{};
  std::vector<std::uint8_t> pixels;

  bool operator==(const GrayImage&) const = default;
};
using GrayImage2D = GrayImage<2>;
using GrayImage3D = GrayImage<3>;

GrayImage2D read_image2d(const fs::path& pgm);
void write_image2d(const fs::path& pgm, const GrayImage2D& image);
GrayImage3D read_image3d(const fs::path& raw);
void write_image3d(const fs::path& raw, const GrayImage3D& image);

// ---------------------------------------------------------------------------
// Segmentation manifest
// ---------------------------------------------------------------------------

struct SegCase {
  std::string case_id;
  fs::path image;
  fs::path mask_gt;
  std::optional<fs::path> mask_pred;
  std::string split;  // "fold-k"

  bool operator==(const SegCase&) const = default;
};

struct SegManifest {
  /// Directory the relative paths are resolved against.
  fs::path base_dir;
  std::vector<SegCase> cases;

  fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }
};

/// Throws ConfigError when a referenced file does not exist.
SegManifest read_manifest(const fs::path& path);
/// Paths are written exactly as stored in `manifest.cases`.
void write_manifest(const fs::path& path, const SegManifest& manifest);

// ---------------------------------------------------------------------------
// Device catalog
// ---------------------------------------------------------------------------

struct DeviceCatalog {
  std::map<std::string, double> expanded_volume_cm3;

  std::optional<double> volume_of(const std::string& model) const;
};

DeviceCatalog read_device_catalog(const fs::path& path);
void write_device_catalog(const fs::path& path, const DeviceCatalog& catalog);

}  // namespace aok::io
