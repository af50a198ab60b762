#pragma once
// Shared between the learner translation units; not installed.

#include <cmath>

#include "aok/learners.hpp"

namespace aok::learners {

inline void require_two_per_class(const FeatureMatrix& m, const char* who) {
  const auto co = m.count(OcclusionLabel::CompleteOcclusion);
  const auto po = m.count(OcclusionLabel::PartialOcclusion);
  if (co == 0 || po == 0) throw ValidationError(std::string(who) + ": training data has a single class");
  if (co < 2 || po < 2) throw ValidationError(std::string(who) + ": need at least two rows per class");
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double target_co(OcclusionLabel l) { return l == OcclusionLabel::CompleteOcclusion ? 1.0 : 0.0; }

double forest_score(const ForestParams& p, std::span<const Cell> row);
double naive_bayes_score(const NaiveBayesParams& p, std::span<const Cell> row);
double logistic_score(const LinearParams& p, std::span<const Cell> row);
double svm_score(const LinearParams& p, std::span<const Cell> row);
double mlp_score(const MlpParams& p, std::span<const Cell> row);

}  // namespace aok::learners
