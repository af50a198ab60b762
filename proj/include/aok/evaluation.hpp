#pragma once
// Cross-validation, the Table-3 metric block, paired t-tests and Dice.
//
// CompleteOcclusion is the positive class throughout. Every confidence
// interval is the Wald interval p +/- 1.96 sqrt(p(1-p)/n) with n the total
// case count, clamped to [0,1]; CiOptions::per_class_n switches sensitivity
// and specificity to their own class sizes.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aok/core.hpp"
#include "aok/learners.hpp"

namespace aok::evaluation {

struct CVConfig {
  int k = 10;
  std::uint64_t seed = 1;
  int repetitions = 1;
  bool stratified = true;
};

/// Per class: shuffle with the seed, then deal round-robin into the folds;
/// the second class continues where the first one stopped so fold sizes
/// differ by at most one. Throws ValidationError when n < k, or when a class
/// has fewer than k cases while stratified.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const OcclusionLabel> labels, const CVConfig& cfg);

struct Confusion {
  std::size_t tp = 0;  // CO predicted CO
  std::size_t fn = 0;  // CO predicted PO
  std::size_t fp = 0;  // PO predicted CO
  std::size_t tn = 0;  // PO predicted PO

  std::size_t total() const noexcept { return tp + fn + fp + tn; }
  Confusion& operator+=(const Confusion& o) noexcept;
  bool operator==(const Confusion&) const = default;
};

Confusion confusion(std::span<const OcclusionLabel> truth, std::span<const OcclusionLabel> predicted);

struct Estimate {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

Estimate wald(double p, std::size_t n);

struct CiOptions {
  bool per_class_n = false;
};

struct MetricBlock {
  Estimate accuracy, specificity, sensitivity, weighted_f1, roc_auc, f1_co, f1_po;
  std::size_t n = 0;
  Confusion confusion;
};

/// Mann-Whitney estimate of P(score_CO > score_PO), ties counting one half;
/// 0.5 when a class is absent.
double roc_auc(std::span<const double> score_co, std::span<const OcclusionLabel> truth);

/// Undefined ratios (0/0) are reported as 0. Throws ValidationError on an
/// empty confusion matrix or when the score count does not match it.
MetricBlock metric_block(const Confusion& c, std::span<const double> score_co, std::span<const OcclusionLabel> truth,
                         const CiOptions& ci = {});

struct CvResult {
  MetricBlock pooled;                    // repetition 0, all folds pooled
  std::vector<MetricBlock> per_fold;     // repetition 0
  std::vector<MetricBlock> per_repetition;
  std::vector<double> repetition_wf1;    // pooled weighted F1 per repetition
  std::vector<double> fold_wf1;          // every fold of every repetition
  std::vector<learners::Prediction> predictions;  // repetition 0, row order
};

/// Repetition r uses folds seeded with cfg.seed + r; the learner seed of
/// fold f in repetition r is derive_seed(learner seed, r * k + f).
CvResult cross_validate(const FeatureMatrix& matrix, const learners::LearnerConfig& learner, const CVConfig& cfg,
                        const CiOptions& ci = {});

struct TTest {
  double t = 0.0;
  double p = 1.0;
  std::size_t df = 0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
};

/// Paired two-sided t-test on a - b. Constant differences: p = 1 (and t = 0)
/// when they are all zero, else p = 0 with t = +/-DBL_MAX.
TTest paired_ttest(std::span<const double> a, std::span<const double> b);

/// Two-sided Student-t tail P(|T| >= |t|) with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1); 0 when n < 2
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

// ---------------------------------------------------------------------------
// Dice
// ---------------------------------------------------------------------------

struct DiceOptions {
  double both_empty = 1.0;
};

/// 2|A and B| / (|A| + |B|). Throws ValidationError on differing dims or spacing.
double dice(const Mask2D& a, const Mask2D& b, const DiceOptions& opt = {});
double dice(const Mask3D& a, const Mask3D& b, const DiceOptions& opt = {});

struct DiceResult {
  std::vector<double> per_case;
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// mean +/- 1.96 sd / sqrt(n), clamped to [0,1].
DiceResult dice_summary(std::span<const double> per_case);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Table-3 layout: accuracy, specificity and sensitivity as percentages with
/// one decimal; weighted F1, ROC and per-class F1 with two decimals.
std::string format_table(const std::map<FeatureSetId, MetricBlock>& blocks);
std::string format_percent(const Estimate& e);
std::string format_ratio(const Estimate& e);

/// Deterministic JSON rendering of a metric block.
std::string metric_block_json(const MetricBlock& block);

}  // namespace aok::evaluation
