#pragma once
// Feature assembly: per-case geometry, view aggregation and the A-G feature
// sets. Every column name is fixed here; learners and reports key on them.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aok/core.hpp"
#include "aok/geometry.hpp"
#include "aok/io.hpp"

namespace aok::features {

/// Mean when both views exist, otherwise whichever one does.
std::optional<double> aggregate(std::optional<double> ap, std::optional<double> lat);

/// height + width + dome; missing unless all three are present.
std::optional<double> sum3(const Measurement2D& m);

// ---------------------------------------------------------------------------
// Geometry per case
// ---------------------------------------------------------------------------

/// Automatic segmentations for one case; any of them may be absent.
struct CaseMasks {
  std::optional<Mask2D> ap;
  std::optional<Mask2D> lateral;
  std::optional<Mask3D> sac;
};

/// `<case>_AP.pgm`, `<case>_Lateral.pgm`, `<case>_sac.raw` (each with sidecar).
CaseMasks load_case_masks(const std::filesystem::path& masks_dir, const std::string& case_id);

struct GeometryOptions {
  int ring_samples = 64;
  double snap_radius_mm = 5.0;
  geometry::MaskToStackOptions mask_to_stack{.largest_component_only = true, .calibrate_area = true};
};

struct CaseGeometry {
  std::string case_id;
  std::optional<double> area_ap_mm2;  // manual contour
  std::optional<double> area_lat_mm2;
  std::optional<double> area_ap_auto_mm2;  // from masks
  std::optional<double> area_lat_auto_mm2;
  std::optional<geometry::AngleMeasure> angles;
  std::optional<geometry::VesselRatios> ratios;
  std::optional<geometry::ShapeMetrics3D> shape;       // contour stack
  std::optional<geometry::ShapeMetrics3D> shape_auto;  // 3D mask
  std::optional<double> device_volume_cm3;
  /// Problems that turned an output into "missing" instead of aborting.
  std::vector<std::string> warnings;
};

/// Never throws on bad geometry of a single item; failures are recorded as
/// warnings and leave that output missing.
CaseGeometry compute_case_geometry(const io::AnnotationBundle* annotation, const CaseMasks& masks,
                                   const io::DeviceCatalog* devices = nullptr, const GeometryOptions& options = {});

using GeometryTable = std::map<std::string, CaseGeometry>;

// ---------------------------------------------------------------------------
// Feature matrix
// ---------------------------------------------------------------------------

/// Everything known about the cohort, keyed by case_id.
struct Dataset {
  Cohort cohort;
  std::map<std::string, io::AnnotationBundle> annotations;
  GeometryTable geometry;
};

/// Columns replaced by their automatic counterparts in sets E and G.
const std::vector<std::string>& automatic_columns();
const std::vector<std::string>& imaging3d_columns();

/// How each column's values were obtained.
using AuditMap = std::map<std::string, std::string>;

struct BuiltMatrix {
  FeatureMatrix matrix;
  AuditMap audit;
};

/// All clinical and all imaging columns with manual sources; rows sorted by
/// case_id. Clinical categoricals are one-hot (`gender=F`, `condition=X`...).
BuiltMatrix full_matrix(const Dataset& data);

/// Same universe as full_matrix but with the automatic columns sourced from
/// masks. Throws ValidationError when no case has any automatic value.
BuiltMatrix full_matrix_automatic(const Dataset& data);

struct FeatureSelectionLists {
  std::vector<std::string> clinical;  // for B..E
  std::vector<std::string> imaging;   // 2D imaging names for C..G
};

/// Columns per set definition:
///   A all clinical + all 2D imaging     B selected clinical
///   C B + selected 2D imaging           D C + the four 3D columns
///   E D with area/volume/surface/IPR automatic
///   F D without clinical columns        G E without clinical columns
BuiltMatrix build_matrix(const Dataset& data, FeatureSetId set, const FeatureSelectionLists& selected);

/// Header row (case_id,label,names...), then a "#meta" row with
/// kind/provenance/source per column, then one row per case.
std::string format_matrix_csv(const FeatureMatrix& matrix);
FeatureMatrix parse_matrix_csv(std::string_view text);

}  // namespace aok::features
