#include <algorithm>
#include <numbers>

#include "internal.hpp"

namespace aok::learners {

namespace {
constexpr double kVarianceFloor = 1e-9;
constexpr double kLaplace = 1.0;
}  // namespace

TrainedModel train_naive_bayes(const FeatureMatrix& matrix) {
  const auto n_co = static_cast<double>(matrix.count(OcclusionLabel::CompleteOcclusion));
  const auto n_po = static_cast<double>(matrix.count(OcclusionLabel::PartialOcclusion));
  if (n_co == 0.0 || n_po == 0.0) throw ValidationError("train_naive_bayes: training data has a single class");

  NaiveBayesParams p;
  p.prior = {n_co / (n_co + n_po), n_po / (n_co + n_po)};
  const auto& labels = matrix.labels();
  auto cls = [&](std::size_t r) { return labels[r] == OcclusionLabel::CompleteOcclusion ? 0u : 1u; };

  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    NaiveBayesColumn c;
    c.kind = matrix.columns()[j].kind;
    const auto col = matrix.column(j);
    if (c.kind == ColumnKind::Numeric) {
      std::array<double, 2> sum{}, sq{};
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col[r]) continue;
        const auto k = cls(r);
        c.known[k] += 1.0;
        sum[k] += *col[r];
      }
      for (int k = 0; k < 2; ++k) c.mean[k] = c.known[k] > 0 ? sum[k] / c.known[k] : 0.0;
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col[r]) continue;
        const auto k = cls(r);
        const double d = *col[r] - c.mean[k];
        sq[k] += d * d;
      }
      for (int k = 0; k < 2; ++k) c.var[k] = std::max(c.known[k] > 0 ? sq[k] / c.known[k] : 0.0, kVarianceFloor);
    } else {
      for (std::size_t r = 0; r < col.size(); ++r)
        if (col[r]) c.levels.push_back(*col[r]);
      std::sort(c.levels.begin(), c.levels.end());
      c.levels.erase(std::unique(c.levels.begin(), c.levels.end()), c.levels.end());
      c.counts.assign(c.levels.size(), {0.0, 0.0});
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col[r]) continue;
        const auto at = std::lower_bound(c.levels.begin(), c.levels.end(), *col[r]) - c.levels.begin();
        c.counts[static_cast<std::size_t>(at)][cls(r)] += 1.0;
        c.known[cls(r)] += 1.0;
      }
    }
    p.columns.push_back(std::move(c));
  }
  return TrainedModel(LearnerKind::NaiveBayes, matrix.columns(), std::move(p));
}

double naive_bayes_score(const NaiveBayesParams& p, std::span<const Cell> row) {
  std::array<double, 2> logp = {std::log(p.prior[0]), std::log(p.prior[1])};
  for (std::size_t j = 0; j < p.columns.size(); ++j) {
    if (!row[j]) continue;
    const auto& c = p.columns[j];
    const double x = *row[j];
    if (c.kind == ColumnKind::Numeric) {
      if (c.known[0] == 0.0 || c.known[1] == 0.0) continue;
      for (int k = 0; k < 2; ++k) {
        const double d = x - c.mean[k];
        logp[k] += -0.5 * std::log(2.0 * std::numbers::pi * c.var[k]) - d * d / (2.0 * c.var[k]);
      }
    } else {
      const auto it = std::lower_bound(c.levels.begin(), c.levels.end(), x);
      const bool seen = it != c.levels.end() && *it == x;
      const double k_levels = static_cast<double>(c.levels.size()) + (seen ? 0.0 : 1.0);
      for (int k = 0; k < 2; ++k) {
        const double count = seen ? c.counts[static_cast<std::size_t>(it - c.levels.begin())][k] : 0.0;
        logp[k] += std::log((count + kLaplace) / (c.known[k] + kLaplace * k_levels));
      }
    }
  }
  return sigmoid(logp[0] - logp[1]);
}

}  // namespace aok::learners
