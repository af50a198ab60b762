#pragma once
// Domain types shared by every module. Optional fields are std::optional so
// "missing" never collides with a sentinel value.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aok/error.hpp"

namespace aok {

// ---------------------------------------------------------------------------
// Enumerations and their string forms
// ---------------------------------------------------------------------------

/// Twelve-month outcome. PartialOcclusion merges residual neck and residual
/// aneurysm grades.
enum class OcclusionLabel : std::uint8_t { CompleteOcclusion = 0, PartialOcclusion = 1 };

enum class Gender : std::uint8_t { Male, Female };
enum class AneurysmLocation : std::uint8_t { ACommA, Basilar, ICATerminus, MCABifurcation };
enum class Side : std::uint8_t { Right, Left, Midline };
enum class RuptureStatus : std::uint8_t { Ruptured, Unruptured };
enum class Detection : std::uint8_t { Incidental, Symptomatic };
enum class View : std::uint8_t { AP, Lateral };

enum class ColumnKind : std::uint8_t { Numeric, Categorical };
enum class Provenance : std::uint8_t { Clinical, Imaging2D, Imaging3D };
enum class Source : std::uint8_t { Manual, Automatic };

enum class FeatureSetId : std::uint8_t { A, B, C, D, E, F, G };

template <class E>
struct EnumNames;

#define AOK_ENUM_NAMES(E, ...)                                              \
  template <>                                                              \
  struct EnumNames<E> {                                                    \
    static constexpr auto names = std::to_array<std::string_view>({__VA_ARGS__}); \
  }

AOK_ENUM_NAMES(OcclusionLabel, "Complete Occlusion", "Partial Occlusion");
AOK_ENUM_NAMES(Gender, "M", "F");
AOK_ENUM_NAMES(AneurysmLocation, "ACommA", "Basilar", "ICATerminus", "MCABifurcation");
AOK_ENUM_NAMES(Side, "Right", "Left", "Midline");
AOK_ENUM_NAMES(RuptureStatus, "Ruptured", "Unruptured");
AOK_ENUM_NAMES(Detection, "Incidental", "Symptomatic");
AOK_ENUM_NAMES(View, "AP", "Lateral");
AOK_ENUM_NAMES(ColumnKind, "Numeric", "Categorical");
AOK_ENUM_NAMES(Provenance, "Clinical", "Imaging2D", "Imaging3D");
AOK_ENUM_NAMES(Source, "Manual", "Automatic");
AOK_ENUM_NAMES(FeatureSetId, "A", "B", "C", "D", "E", "F", "G");

#undef AOK_ENUM_NAMES

template <class E>
constexpr std::string_view to_string(E value) {
  return EnumNames<E>::names[static_cast<std::size_t>(value)];
}

/// Exact, case-sensitive inverse of to_string.
template <class E>
constexpr std::optional<E> enum_from_string(std::string_view text) {
  const auto& names = EnumNames<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == text) return static_cast<E>(i);
  return std::nullopt;
}

template <class E>
constexpr std::size_t enum_count() {
  return EnumNames<E>::names.size();
}

/// Strict label parse; throws ParseError naming the offending text.
OcclusionLabel parse_label(std::string_view text);

// ---------------------------------------------------------------------------
// Clinical data
// ---------------------------------------------------------------------------

struct ClinicalRecord {
  std::string case_id;
  std::optional<double> age;
  std::optional<Gender> gender;
  std::optional<double> height_cm;
  std::optional<double> weight_kg;
  std::optional<std::string> race;
  std::optional<AneurysmLocation> aneurysm_location;
  std::optional<Side> side;
  std::optional<RuptureStatus> rupture_status;
  std::optional<Detection> detection;
  std::optional<int> hunt_hess;  // 0..5
  std::optional<int> nihss;      // >= 0
  std::optional<int> mrs;        // 0..6
  std::optional<bool> smoking_history;
  std::optional<bool> substance_abuse;
  std::set<std::string> conditions;
  std::vector<std::string> allergies;
  std::vector<std::string> medications;

  bool operator==(const ClinicalRecord&) const = default;
};

struct CohortEntry {
  ClinicalRecord record;
  OcclusionLabel label;

  bool operator==(const CohortEntry&) const = default;
};

using Cohort = std::vector<CohortEntry>;

/// Registered pre-existing conditions grouped by body system.
class ConditionVocabulary {
 public:
  struct Entry {
    std::string body_system;
    std::string condition;
  };

  /// Parses `body_system,condition` lines; '#' starts a comment line.
  static ConditionVocabulary parse(std::string_view text);
  static ConditionVocabulary load(const std::filesystem::path& path);
  /// The vocabulary shipped in data/conditions.csv, compiled in.
  static const ConditionVocabulary& builtin();

  bool contains(std::string_view condition) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<std::string> conditions() const;
  std::vector<std::string> body_systems() const;

 private:
  std::vector<Entry> entries_;
};

struct Violation {
  std::string field;
  std::string message;
};

/// Empty iff every record invariant holds. Never throws on bad data.
std::vector<Violation> validate_record(const ClinicalRecord& rec, const ConditionVocabulary& vocab);

/// Per-record checks plus case_id uniqueness across the cohort.
std::vector<Violation> validate_cohort(const Cohort& cohort, const ConditionVocabulary& vocab);

// ---------------------------------------------------------------------------
// Geometry carriers (physical units: mm)
// ---------------------------------------------------------------------------

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Point3&) const = default;
};

struct Segment2 {
  Point2 a;
  Point2 b;

  double length() const;
  bool operator==(const Segment2&) const = default;
};

struct Spacing2 {
  double sx = 1.0;
  double sy = 1.0;

  bool operator==(const Spacing2&) const = default;
};

struct Spacing3 {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;

  bool operator==(const Spacing3&) const = default;
};

struct Measurement2D {
  View view = View::AP;
  std::optional<double> height_mm;
  std::optional<double> width_mm;
  std::optional<double> dome_mm;
  std::optional<double> neck_mm;

  bool operator==(const Measurement2D&) const = default;
};

std::vector<Violation> validate(const Measurement2D& m);

struct VesselAnnotation {
  Segment2 parent;
  Segment2 left;
  Segment2 right;
  std::optional<double> parent_diam_mm;
  std::optional<double> left_diam_mm;
  std::optional<double> right_diam_mm;

  bool operator==(const VesselAnnotation&) const = default;
};

std::vector<Violation> validate(const VesselAnnotation& v);

/// True when the closed polygon through `points` has no self-intersections,
/// no repeated vertices and no zero-length edges.
bool is_simple_polygon(std::span<const Point2> points);

/// Closed simple polygon with at least three vertices; checked on construction.
class Contour2D {
 public:
  explicit Contour2D(std::vector<Point2> points);

  const std::vector<Point2>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }

  bool operator==(const Contour2D&) const = default;

 private:
  std::vector<Point2> points_;
};

/// Planar contours at strictly increasing z.
class ContourStack3D {
 public:
  struct Slice {
    double z_mm;
    Contour2D contour;

    bool operator==(const Slice&) const = default;
  };

  explicit ContourStack3D(std::vector<Slice> slices);

  const std::vector<Slice>& slices() const noexcept { return slices_; }
  std::size_t size() const noexcept { return slices_.size(); }

  bool operator==(const ContourStack3D&) const = default;

 private:
  std::vector<Slice> slices_;
};

/// Binary raster, x fastest. Voxel values are normalized to 0/1.
template <std::size_t Rank>
class Mask {
 public:
  using Dims = std::array<std::size_t, Rank>;
  using SpacingArray = std::array<double, Rank>;

  Mask(Dims dims, SpacingArray spacing_mm, std::vector<std::uint8_t> voxels);
  /// All-background mask.
  Mask(Dims dims, SpacingArray spacing_mm);

  const Dims& dims() const noexcept { return dims_; }
  const SpacingArray& spacing() const noexcept { return spacing_; }
  std::span<const std::uint8_t> voxels() const noexcept { return voxels_; }
  std::size_t size() const noexcept { return voxels_.size(); }

  std::size_t index(const Dims& at) const noexcept {
    std::size_t idx = 0;
    for (std::size_t d = Rank; d-- > 0;) idx = idx * dims_[d] + at[d];
    return idx;
  }
  bool at(const Dims& pos) const noexcept { return voxels_[index(pos)] != 0; }
  void set(const Dims& pos, bool value) noexcept { voxels_[index(pos)] = value ? 1 : 0; }

  bool operator==(const Mask&) const = default;

 private:
  Dims dims_;
  SpacingArray spacing_;
  std::vector<std::uint8_t> voxels_;
};

using Mask2D = Mask<2>;
using Mask3D = Mask<3>;

extern template class Mask<2>;
extern template class Mask<3>;

/// Closed triangle surface. Triangles index into `vertices`, counter-clockwise
/// seen from outside once oriented.
struct SacMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

// ---------------------------------------------------------------------------
// Feature matrix
// ---------------------------------------------------------------------------

struct ColumnInfo {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  Provenance provenance = Provenance::Clinical;
  Source source = Source::Manual;

  bool operator==(const ColumnInfo&) const = default;
};

/// One matrix cell; nullopt is "missing", distinct from every value.
using Cell = std::optional<double>;

/// Column-major table of named features with explicit missingness and one
/// outcome label per row. Immutable once built.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<ColumnInfo> columns, std::vector<std::string> case_ids,
                std::vector<std::vector<Cell>> column_values, std::vector<OcclusionLabel> labels);

  std::size_t rows() const noexcept { return case_ids_.size(); }
  std::size_t cols() const noexcept { return columns_.size(); }

  const std::vector<ColumnInfo>& columns() const noexcept { return columns_; }
  const std::vector<std::string>& case_ids() const noexcept { return case_ids_; }
  const std::vector<OcclusionLabel>& labels() const noexcept { return labels_; }
  std::span<const Cell> column(std::size_t j) const noexcept { return values_[j]; }
  const Cell& cell(std::size_t row, std::size_t col) const noexcept { return values_[col][row]; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::string> column_names() const;

  /// Columns in the requested order; throws ValidationError on unknown names.
  FeatureMatrix select_columns(std::span<const std::string> names) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix with_labels(std::vector<OcclusionLabel> labels) const;
  FeatureMatrix with_column(ColumnInfo info, std::vector<Cell> values) const;

  std::size_t count(OcclusionLabel label) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<ColumnInfo> columns_;
  std::vector<std::string> case_ids_;
  std::vector<std::vector<Cell>> values_;
  std::vector<OcclusionLabel> labels_;
};

}  // namespace aok
