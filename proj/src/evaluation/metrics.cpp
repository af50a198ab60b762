#include <algorithm>
#include <cmath>

#include "aok/evaluation.hpp"

namespace aok::evaluation {

Confusion& Confusion::operator+=(const Confusion& o) noexcept {
  tp += o.tp;
  fn += o.fn;
  fp += o.fp;
  tn += o.tn;
  return *this;
}

Confusion confusion(std::span<const OcclusionLabel> truth, std::span<const OcclusionLabel> predicted) {
  if (truth.size() != predicted.size()) throw ValidationError("confusion: label vectors differ in length");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == OcclusionLabel::CompleteOcclusion;
    const bool p = predicted[i] == OcclusionLabel::CompleteOcclusion;
    if (t && p) ++c.tp;
    else if (t) ++c.fn;
    else if (p) ++c.fp;
    else ++c.tn;
  }
  return c;
}

Estimate wald(double p, std::size_t n) {
  if (n == 0) throw ValidationError("wald: n must be > 0");
  const double half = 1.96 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
  return {p, std::clamp(p - half, 0.0, 1.0), std::clamp(p + half, 0.0, 1.0)};
}

double roc_auc(std::span<const double> score_co, std::span<const OcclusionLabel> truth) {
  if (score_co.size() != truth.size()) throw ValidationError("roc_auc: scores and labels differ in length");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < truth.size(); ++i)
    (truth[i] == OcclusionLabel::CompleteOcclusion ? pos : neg).push_back(score_co[i]);
  if (pos.empty() || neg.empty()) return 0.5;
  // Sort the negatives once; each positive then counts wins and ties by bisection.
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (double s : pos) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), s);
    const auto hi = std::upper_bound(lo, neg.end(), s);
    wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

namespace {
double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
}  // namespace

MetricBlock metric_block(const Confusion& c, std::span<const double> score_co, std::span<const OcclusionLabel> truth,
                         const CiOptions& ci) {
  const std::size_t n = c.total();
  if (n == 0) throw ValidationError("metric_block: empty confusion matrix");
  if (score_co.size() != n || truth.size() != n)
    throw ValidationError("metric_block: score/label count does not match the confusion matrix");

  const double tp = static_cast<double>(c.tp), fn = static_cast<double>(c.fn);
  const double fp = static_cast<double>(c.fp), tn = static_cast<double>(c.tn);
  const double n_co = tp + fn, n_po = tn + fp, nd = static_cast<double>(n);

  MetricBlock m;
  m.n = n;
  m.confusion = c;
  const double acc = (tp + tn) / nd;
  const double sens = ratio(tp, n_co);
  const double spec = ratio(tn, n_po);
  const double f1_co = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  const double f1_po = ratio(2.0 * tn, 2.0 * tn + fn + fp);
  const double wf1 = (n_co * f1_co + n_po * f1_po) / nd;
  const double auc = roc_auc(score_co, truth);

  auto n_for = [&](double cls) { return ci.per_class_n && cls > 0 ? static_cast<std::size_t>(cls) : n; };
  m.accuracy = wald(acc, n);
  m.sensitivity = wald(sens, n_for(n_co));
  m.specificity = wald(spec, n_for(n_po));
  m.f1_co = wald(f1_co, n);
  m.f1_po = wald(f1_po, n);
  m.weighted_f1 = wald(wf1, n);
  m.roc_auc = wald(auc, n);
  return m;
}

}  // namespace aok::evaluation
