#pragma once
// The five binary classifiers. Each one states how it treats missing cells:
//
//   RandomForest  C4.5 fractional weights (train and predict)
//   NaiveBayes    missing cells are skipped
//   Logistic, LinearSVM, MLP
//                 train-set mean (numeric) / mode (categorical) imputation,
//                 then standardization
//
// score_co is always P(CompleteOcclusion)-like and lies in [0,1]; the label
// is CompleteOcclusion when score_co >= 0.5.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aok/core.hpp"

namespace aok::learners {

enum class LearnerKind : std::uint8_t { RandomForest, NaiveBayes, Logistic, LinearSVM, MLP };

std::string_view to_string(LearnerKind kind);
std::optional<LearnerKind> learner_from_string(std::string_view text);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class FeaturesPerSplit : std::uint8_t { Sqrt, All, Fixed };

struct ForestConfig {
  int n_trees = 100;
  FeaturesPerSplit features_per_split = FeaturesPerSplit::Sqrt;
  int fixed_k = 1;  // used when features_per_split == Fixed
  int min_leaf = 1;
  std::optional<int> max_depth;
  std::uint64_t seed = 1;
  bool bootstrap = true;
  /// 0 = one worker per hardware thread. Results never depend on this.
  int threads = 0;
};

struct LogisticConfig {
  double ridge = 1e-8;
  int max_iter = 500;
  double grad_tol = 1e-6;
};

struct SvmConfig {
  double C = 1.0;
  int epochs = 200;
};

struct MlpConfig {
  int hidden = 16;
  int epochs = 200;
  double lr = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 1;
};

struct LearnerConfig {
  LearnerKind kind = LearnerKind::RandomForest;
  ForestConfig forest;
  LogisticConfig logistic;
  SvmConfig svm;
  MlpConfig mlp;

  /// Copy with every seed replaced by `seed` (forest and MLP).
  LearnerConfig with_seed(std::uint64_t seed) const;
};

/// Derives an independent 64-bit seed from (seed, stream); splitmix64 mix.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Binary split `x <= threshold` goes left; the threshold is the largest
/// training value on the left. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  /// Share of known-value training weight that went left; missing values at
  /// prediction time blend both children with this proportion.
  double left_fraction = 0.0;
  int left = -1;
  int right = -1;
  std::array<double, 2> counts{};  // weighted {CO, PO} reaching the node

  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// Class distribution {P(CO), P(PO)} for one row; `row` is indexed by column.
  std::array<double, 2> distribution(std::span<const Cell> row) const;
  bool operator==(const Tree&) const = default;
};

struct ForestParams {
  std::vector<Tree> trees;
  /// Out-of-bag accuracy over rows left out by at least one tree.
  std::optional<double> oob_accuracy;
};

struct NaiveBayesColumn {
  ColumnKind kind = ColumnKind::Numeric;
  std::array<double, 2> mean{};
  std::array<double, 2> var{};
  std::vector<double> levels;                  // categorical values seen in training
  std::vector<std::array<double, 2>> counts;   // per level, per class
  std::array<double, 2> known{};               // non-missing rows per class
};

struct NaiveBayesParams {
  std::array<double, 2> prior{};
  std::vector<NaiveBayesColumn> columns;
};

/// Imputation + standardization shared by the three margin learners.
struct Standardizer {
  std::vector<double> fill;   // value used for a missing cell
  std::vector<double> mean;
  std::vector<double> scale;  // 1 when the column is constant

  static Standardizer fit(const FeatureMatrix& matrix);
  std::vector<double> transform(std::span<const Cell> row) const;
};

struct LinearParams {
  Standardizer standardizer;
  std::vector<double> weights;  // on standardized features
  double bias = 0.0;
  // SVM only: P(CO) = 1 / (1 + exp(platt_a * margin + platt_b)).
  double platt_a = 0.0;
  double platt_b = 0.0;
};

struct MlpParams {
  Standardizer standardizer;
  int inputs = 0;
  int hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
};

struct Prediction {
  OcclusionLabel label;
  double score_co;
};

class TrainedModel {
 public:
  using Params = std::variant<ForestParams, NaiveBayesParams, LinearParams, MlpParams>;

  TrainedModel(LearnerKind kind, std::vector<ColumnInfo> schema, Params params, bool converged = true);

  LearnerKind kind() const noexcept { return kind_; }
  const std::vector<ColumnInfo>& schema() const noexcept { return schema_; }
  const Params& params() const noexcept { return params_; }
  /// False when an iterative learner hit its iteration cap first.
  bool converged() const noexcept { return converged_; }

  /// Throws ValidationError unless `matrix` has the training column names and
  /// kinds, in the same order.
  std::vector<Prediction> predict(const FeatureMatrix& matrix) const;
  double score_row(std::span<const Cell> row) const;

 private:
  LearnerKind kind_;
  std::vector<ColumnInfo> schema_;
  Params params_;
  bool converged_;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Throws ValidationError on single-class data or fewer than two rows per class.
TrainedModel train_forest(const FeatureMatrix& matrix, const ForestConfig& cfg);
TrainedModel train_naive_bayes(const FeatureMatrix& matrix);
TrainedModel train_logistic(const FeatureMatrix& matrix, const LogisticConfig& cfg = {});
TrainedModel train_svm(const FeatureMatrix& matrix, const SvmConfig& cfg = {});
TrainedModel train_mlp(const FeatureMatrix& matrix, const MlpConfig& cfg = {});

TrainedModel train(const FeatureMatrix& matrix, const LearnerConfig& cfg);

/// One C4.5-style tree on weighted rows. `rows`/`weights` select the
/// training sample; `rng_seed` drives the feature subsets.
Tree grow_tree(const FeatureMatrix& matrix, std::span<const std::size_t> rows, std::span<const double> weights,
               const ForestConfig& cfg, std::uint64_t rng_seed);

/// Mean log-loss of an MLP over standardized inputs, and its gradient in the
/// order (w1, b1, w2, b2).
struct MlpLoss {
  double loss = 0.0;
  std::vector<double> gradient;
};
MlpLoss mlp_loss(const MlpParams& params, std::span<const std::vector<double>> inputs,
                 std::span<const OcclusionLabel> labels);

// ---------------------------------------------------------------------------
// Persistence (versioned JSON, see docs/model-format.md)
// ---------------------------------------------------------------------------

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace aok::learners
