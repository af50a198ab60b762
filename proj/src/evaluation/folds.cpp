#include <algorithm>
#include <numeric>
#include <random>

#include "aok/evaluation.hpp"

namespace aok::evaluation {

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const OcclusionLabel> labels, const CVConfig& cfg) {
  if (cfg.k < 2) throw ValidationError("k must be >= 2");
  const auto k = static_cast<std::size_t>(cfg.k);
  if (labels.size() < k)
    throw ValidationError("cannot split " + std::to_string(labels.size()) + " cases into " + std::to_string(k) + " folds");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<std::size_t>> groups;
  if (cfg.stratified) {
    groups.resize(2);
    for (std::size_t i = 0; i < labels.size(); ++i)
      groups[labels[i] == OcclusionLabel::CompleteOcclusion ? 0 : 1].push_back(i);
    for (int c = 0; c < 2; ++c) {
      const auto& g = groups[static_cast<std::size_t>(c)];
      if (!g.empty() && g.size() < k)
        throw ValidationError(std::string(to_string(static_cast<OcclusionLabel>(c))) + " has " +
                              std::to_string(g.size()) + " cases, fewer than k = " + std::to_string(k) +
                              "; use stratified = false or a smaller k");
    }
  } else {
    groups.emplace_back(labels.size());
    std::iota(groups[0].begin(), groups[0].end(), 0);
  }

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    for (std::size_t idx : g) {
      folds[next].push_back(idx);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CvResult cross_validate(const FeatureMatrix& matrix, const learners::LearnerConfig& learner, const CVConfig& cfg,
                        const CiOptions& ci) {
  if (cfg.repetitions < 1) throw ValidationError("repetitions must be >= 1");
  const std::uint64_t base_seed =
      learner.kind == learners::LearnerKind::MLP ? learner.mlp.seed : learner.forest.seed;
  const auto& labels = matrix.labels();
  const std::size_t n = matrix.rows();

  CvResult result;
  for (int r = 0; r < cfg.repetitions; ++r) {
    CVConfig rep = cfg;
    rep.seed = cfg.seed + static_cast<std::uint64_t>(r);
    const auto folds = stratified_folds(labels, rep);

    std::vector<learners::Prediction> preds(n, {OcclusionLabel::CompleteOcclusion, 0.5});
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<char> held(n, 0);
      for (auto i : folds[f]) held[i] = 1;
      std::vector<std::size_t> train_rows;
      for (std::size_t i = 0; i < n; ++i)
        if (!held[i]) train_rows.push_back(i);

      const auto fold_seed = learners::derive_seed(base_seed, static_cast<std::uint64_t>(r) * folds.size() + f);
      const auto model = learners::train(matrix.select_rows(train_rows), learner.with_seed(fold_seed));
      const auto fold_preds = model.predict(matrix.select_rows(folds[f]));

      std::vector<OcclusionLabel> truth, predicted;
      std::vector<double> scores;
      for (std::size_t j = 0; j < folds[f].size(); ++j) {
        preds[folds[f][j]] = fold_preds[j];
        truth.push_back(labels[folds[f][j]]);
        predicted.push_back(fold_preds[j].label);
        scores.push_back(fold_preds[j].score_co);
      }
      const auto block = metric_block(confusion(truth, predicted), scores, truth, ci);
      result.fold_wf1.push_back(block.weighted_f1.point);
      if (r == 0) result.per_fold.push_back(block);
    }

    std::vector<OcclusionLabel> predicted(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      predicted[i] = preds[i].label;
      scores[i] = preds[i].score_co;
    }
    const auto pooled = metric_block(confusion(labels, predicted), scores, labels, ci);
    result.per_repetition.push_back(pooled);
    result.repetition_wf1.push_back(pooled.weighted_f1.point);
    if (r == 0) {
      result.pooled = pooled;
      result.predictions = std::move(preds);
    }
  }
  return result;
}

}  // namespace aok::evaluation
