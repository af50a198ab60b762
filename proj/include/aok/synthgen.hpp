#pragma once
// Synthetic cohorts, annotation bundles and shapes with known ground truth.
// Everything is a pure function of its seed; each case draws from its own
// derived stream so generation order never matters.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aok/core.hpp"
#include "aok/features.hpp"
#include "aok/io.hpp"

namespace aok::synthgen {

// ---------------------------------------------------------------------------
// Cohorts
// ---------------------------------------------------------------------------

/// Latent per-case quantities that effect sizes can shift. Each is Gaussian
/// with a fixed mean/SD; an effect size d moves the CO mean up by d/2 SD and
/// the PO mean down by d/2 SD.
///
///   age, height_cm, weight_kg          clinical record
///   sac_width_mm, sac_elongation       sac extent (visible in 2D and 3D)
///   sac_lobulation                     surface lobes, visible only in 3D
///   neck_mm, parent_diam_mm, daughter_diam_mm, left_angle_deg, right_angle_deg
const std::vector<std::string>& trait_names();

struct CohortSpec {
  std::size_t n_co = 49;
  std::size_t n_po = 32;
  std::map<std::string, double> effect_sizes;  // trait -> standardized shift
  double missing_rate = 0.0;
  /// condition -> (p_co, p_po). Exactly round(p * class size) cases of each
  /// class get the condition, chosen at random. Empty selects a small default
  /// set with equal prevalence in both classes.
  std::map<std::string, std::pair<double, double>> condition_prevalences;
  std::uint64_t seed = 1;
  /// Share of cases with a 3D contour stack (default 41 of 81).
  /// Like the prevalences and the lateral share, realized as an exact count.
  double stack_fraction = 41.0 / 81.0;
  /// Share of cases without a lateral view.
  double lateral_missing_fraction = 0.11;
  /// Also rasterize automatic segmentations (2D views and the 3D sac).
  bool with_masks = false;
  double mask_spacing_mm = 0.25;
};

/// Throws ValidationError for empty classes, unknown traits or conditions,
/// and rates outside [0,1).
void validate(const CohortSpec& spec);

CohortSpec parse_cohort_spec(std::string_view json_text);
std::string format_cohort_spec(const CohortSpec& spec);

struct SyntheticCohort {
  Cohort cohort;  // case ids "S001".., labels in shuffled order
  std::map<std::string, io::AnnotationBundle> annotations;
  std::map<std::string, features::CaseMasks> masks;  // only with_masks
  io::DeviceCatalog devices;
  /// Every trait with its effect size, zeros included.
  std::map<std::string, double> effects;
};

SyntheticCohort gen_cohort(const CohortSpec& spec);

/// Lays the cohort out as the CLI expects:
///   cohort.csv, annotations/<id>.json, masks/<id>_{AP,Lateral}.pgm and
///   <id>_sac.raw (+ sidecars), devices.json, truth.json, run.json
void write_dataset(const std::filesystem::path& dir, const SyntheticCohort& data, const CohortSpec& spec);

/// 49 CO / 32 PO with Hypertension in exactly 28 CO and 19 PO cases and
/// Migraines in exactly 28 CO and 14 PO cases; nothing else is set.
Cohort prevalence_fixture();

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

enum class ShapeKind : std::uint8_t { Sphere, Ellipsoid, Prism, Blob };
enum class ShapeOutput : std::uint8_t { Stack, Mask3D, Mask2D };

struct ShapeParams {
  /// Sphere: radius in [0]. Ellipsoid: semi-axes. Prism: edge lengths.
  /// Blob: base radius in [0].
  std::array<double, 3> size{10.0, 10.0, 10.0};
  double blob_amplitude = 0.15;  // relative radial perturbation
  std::uint64_t seed = 1;
};

struct ShapeResolution {
  int slices = 33;          // Stack
  int ring_samples = 64;    // points per Stack contour
  double spacing_mm = 0.5;  // Mask3D / Mask2D voxel size
  int margin = 2;           // background voxels on each side of a mask
};

struct ShapeTruth {
  std::optional<double> volume_mm3;
  std::optional<double> surface_mm2;
  bool surface_approximate = false;  // Thomsen formula for ellipsoids
};

struct GeneratedShape {
  std::optional<ContourStack3D> stack;
  std::optional<Mask3D> mask3d;
  std::optional<Mask2D> mask2d;  // central z cross-section
  ShapeTruth truth;
};

/// Shapes are centred at the origin. Curved shapes are sliced at cell
/// centres over their z extent; prism stacks include both end faces so the
/// loft is exact. Throws ValidationError on non-positive sizes and when
/// fewer than 8 samples fall across the smallest radius.
GeneratedShape gen_shape(ShapeKind kind, const ShapeParams& params, ShapeOutput output,
                         const ShapeResolution& resolution = {});

/// 4/3 pi abc and Thomsen's surface approximation (p = 1.6075, within 1.061%).
double ellipsoid_volume(double a, double b, double c);
double ellipsoid_surface_thomsen(double a, double b, double c);

// ---------------------------------------------------------------------------
// Segmentation corpus
// ---------------------------------------------------------------------------

enum class SegTask : std::uint8_t { Seg2D, Seg3D };

struct SegCorpusSpec {
  SegTask task = SegTask::Seg2D;
  std::size_t n_cases = 20;
  std::size_t size = 64;  // pixels per side (voxels for 3D)
  double spacing_mm = 0.5;
  int folds = 5;
  double noise_sd = 15.0;
  double blur_sigma_px = 1.0;
  /// The first case has no foreground at all when set.
  bool include_empty = false;
  std::uint64_t seed = 1;
};

/// Blob masks with noisy, blurred 8-bit renderings, plus manifest.json
/// referencing images/ and masks/. mask_pred is left unset.
io::SegManifest gen_seg_corpus(const std::filesystem::path& dir, const SegCorpusSpec& spec);

}  // namespace aok::synthgen
