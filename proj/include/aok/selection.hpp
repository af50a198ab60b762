#pragma once
// Two-stage feature selection: condition prevalence filtering, then
// information-gain ranking refined by greedy forward search.

#include <span>
#include <string>
#include <vector>

#include "aok/core.hpp"
#include "aok/evaluation.hpp"
#include "aok/features.hpp"
#include "aok/learners.hpp"

namespace aok::selection {

struct PrevalenceConfig {
  double min_ratio = 0.30;  // stage 1: keep if max(ratio_co, ratio_po) >= this
  double min_diff = 0.10;   // stage 2: keep if |ratio_co - ratio_po| >= this
};

struct PrevalenceRow {
  std::string condition;
  std::size_t count_co = 0;
  std::size_t count_po = 0;
  double ratio_co = 0.0;
  double ratio_po = 0.0;
  double abs_diff = 0.0;
  bool kept_stage1 = false;
  bool kept_stage2 = false;
};

struct PrevalenceReport {
  std::size_t n_co = 0;
  std::size_t n_po = 0;
  std::vector<PrevalenceRow> rows;  // sorted by condition name

  const PrevalenceRow* find(std::string_view condition) const;
  std::vector<std::string> kept() const;  // stage-2 survivors
};

/// One row per condition in `conditions` plus any condition seen in the
/// cohort. Throws ValidationError when a class has no cases.
PrevalenceReport prevalence_select(const Cohort& cohort, std::span<const std::string> conditions,
                                   const PrevalenceConfig& cfg = {});
PrevalenceReport prevalence_select(const Cohort& cohort, const PrevalenceConfig& cfg = {});

/// Information gain in bits of one column, scaled by its non-missing
/// fraction. Numeric columns take the best binary split at midpoints of
/// consecutive distinct values; categorical columns split on every value.
double information_gain(std::span<const Cell> values, std::span<const OcclusionLabel> labels, ColumnKind kind);

struct RankedFeature {
  std::string name;
  double gain = 0.0;
};

struct Ranking {
  std::vector<RankedFeature> all;  // descending gain, ties by name
  std::vector<std::string> kept;   // gain strictly above the threshold
};

Ranking rank_features(const FeatureMatrix& matrix, double threshold = 0.15);

struct GreedyConfig {
  evaluation::CVConfig cv;
  learners::ForestConfig forest;
  double epsilon = 0.001;
};

struct GreedyStep {
  int iteration = 0;
  std::string candidate;
  double weighted_f1 = 0.0;
  bool accepted = false;
};

struct GreedyResult {
  std::vector<std::string> features;
  double base_score = 0.0;
  double final_score = 0.0;
  std::vector<GreedyStep> trace;
};

/// Adds, one at a time, the candidate whose random-forest CV weighted F1 is
/// highest, while it beats the incumbent by more than epsilon.
GreedyResult greedy_forward(const FeatureMatrix& matrix, std::span<const std::string> base,
                            std::span<const std::string> candidates, const GreedyConfig& cfg);

// ---------------------------------------------------------------------------
// Whole selection pipeline
// ---------------------------------------------------------------------------

struct PipelineConfig {
  PrevalenceConfig prevalence;
  double ig_threshold = 0.15;
  bool greedy = false;
  GreedyConfig greedy_config;
};

struct PipelineResult {
  PrevalenceReport prevalence;
  Ranking clinical;  // non-condition clinical columns
  Ranking imaging;   // 2D imaging columns
  features::FeatureSelectionLists lists;
  std::optional<GreedyResult> greedy;
};

/// Clinical list: IG-kept clinical columns, then `condition=X` for every
/// prevalence survivor. Imaging list: IG-kept 2D columns. With greedy on,
/// both lists seed a forward search over the remaining set-A columns and the
/// additions are filed by provenance.
PipelineResult select_features(const features::Dataset& data, const PipelineConfig& cfg);

}  // namespace aok::selection
