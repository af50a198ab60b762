#include "aok/selection.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "entropy.hpp"

namespace aok::selection {

namespace {
// Ratios such as 28/49 - 14/32 are compared against decimal thresholds;
// the slack keeps exact boundary cases on the inclusive side.
constexpr double kSlack = 1e-12;
}  // namespace

const PrevalenceRow* PrevalenceReport::find(std::string_view condition) const {
  for (const auto& r : rows)
    if (r.condition == condition) return &r;
  return nullptr;
}

std::vector<std::string> PrevalenceReport::kept() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (r.kept_stage2) out.push_back(r.condition);
  return out;
}

PrevalenceReport prevalence_select(const Cohort& cohort, std::span<const std::string> conditions,
                                   const PrevalenceConfig& cfg) {
  PrevalenceReport rep;
  std::map<std::string, std::array<std::size_t, 2>> counts;
  for (const auto& c : conditions) counts[c];
  for (const auto& e : cohort) {
    const std::size_t k = e.label == OcclusionLabel::CompleteOcclusion ? 0 : 1;
    (k == 0 ? rep.n_co : rep.n_po) += 1;
    for (const auto& c : e.record.conditions) counts[c][k] += 1;
  }
  if (rep.n_co == 0 || rep.n_po == 0) throw ValidationError("prevalence_select: both outcome classes need cases");

  for (const auto& [name, cnt] : counts) {
    PrevalenceRow r;
    r.condition = name;
    r.count_co = cnt[0];
    r.count_po = cnt[1];
    r.ratio_co = static_cast<double>(cnt[0]) / static_cast<double>(rep.n_co);
    r.ratio_po = static_cast<double>(cnt[1]) / static_cast<double>(rep.n_po);
    r.abs_diff = std::abs(r.ratio_co - r.ratio_po);
    r.kept_stage1 = std::max(r.ratio_co, r.ratio_po) >= cfg.min_ratio - kSlack;
    r.kept_stage2 = r.kept_stage1 && r.abs_diff >= cfg.min_diff - kSlack;
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

PrevalenceReport prevalence_select(const Cohort& cohort, const PrevalenceConfig& cfg) {
  return prevalence_select(cohort, std::span<const std::string>{}, cfg);
}

double information_gain(std::span<const Cell> values, std::span<const OcclusionLabel> labels, ColumnKind kind) {
  if (values.size() != labels.size()) throw ValidationError("information_gain: values and labels differ in length");
  std::vector<std::pair<double, int>> known;
  std::array<double, 2> kc{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    const int y = labels[i] == OcclusionLabel::CompleteOcclusion ? 0 : 1;
    known.push_back({*values[i], y});
    kc[static_cast<std::size_t>(y)] += 1.0;
  }
  if (known.empty()) return 0.0;
  const double kn = static_cast<double>(known.size());
  const double fraction = kn / static_cast<double>(values.size());
  const double h = detail::entropy_bits(kc[0], kc[1]);
  std::sort(known.begin(), known.end());

  double best_cond = h;
  if (kind == ColumnKind::Categorical) {
    double cond = 0.0;
    for (std::size_t i = 0; i < known.size();) {
      std::array<double, 2> c{};
      std::size_t j = i;
      for (; j < known.size() && known[j].first == known[i].first; ++j) c[static_cast<std::size_t>(known[j].second)] += 1.0;
      cond += ((c[0] + c[1]) / kn) * detail::entropy_bits(c[0], c[1]);
      i = j;
    }
    best_cond = cond;
  } else {
    std::array<double, 2> lc{};
    for (std::size_t i = 0; i + 1 < known.size(); ++i) {
      lc[static_cast<std::size_t>(known[i].second)] += 1.0;
      if (!(known[i].first < known[i + 1].first)) continue;
      const double lw = lc[0] + lc[1], rw = kn - lw;
      const double cond = (lw / kn) * detail::entropy_bits(lc[0], lc[1]) +
                          (rw / kn) * detail::entropy_bits(kc[0] - lc[0], kc[1] - lc[1]);
      best_cond = std::min(best_cond, cond);
    }
  }
  return std::max(0.0, fraction * (h - best_cond));
}

Ranking rank_features(const FeatureMatrix& matrix, double threshold) {
  Ranking r;
  for (std::size_t j = 0; j < matrix.cols(); ++j)
    r.all.push_back({matrix.columns()[j].name, information_gain(matrix.column(j), matrix.labels(), matrix.columns()[j].kind)});
  std::sort(r.all.begin(), r.all.end(), [](const RankedFeature& a, const RankedFeature& b) {
    return a.gain > b.gain || (a.gain == b.gain && a.name < b.name);
  });
  for (const auto& f : r.all)
    if (f.gain > threshold) r.kept.push_back(f.name);
  return r;
}

GreedyResult greedy_forward(const FeatureMatrix& matrix, std::span<const std::string> base,
                            std::span<const std::string> candidates, const GreedyConfig& cfg) {
  learners::LearnerConfig learner;
  learner.kind = learners::LearnerKind::RandomForest;
  learner.forest = cfg.forest;

  auto score = [&](const std::vector<std::string>& cols) {
    return evaluation::cross_validate(matrix.select_columns(cols), learner, cfg.cv).pooled.weighted_f1.point;
  };

  GreedyResult res;
  res.features.assign(base.begin(), base.end());
  std::vector<std::string> pool;
  for (const auto& c : candidates)
    if (std::find(res.features.begin(), res.features.end(), c) == res.features.end() &&
        std::find(pool.begin(), pool.end(), c) == pool.end())
      pool.push_back(c);

  res.base_score = score(res.features);
  double incumbent = res.base_score;
  for (int iteration = 1; !pool.empty(); ++iteration) {
    std::size_t best = pool.size();
    double best_score = 0.0;
    const std::size_t first_step = res.trace.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      auto cols = res.features;
      cols.push_back(pool[i]);
      const double s = score(cols);
      res.trace.push_back({iteration, pool[i], s, false});
      if (best == pool.size() || s > best_score) {
        best = i;
        best_score = s;
      }
    }
    if (!(best_score > incumbent + cfg.epsilon)) break;
    res.trace[first_step + best].accepted = true;
    res.features.push_back(pool[best]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    incumbent = best_score;
  }
  res.final_score = incumbent;
  return res;
}

PipelineResult select_features(const features::Dataset& data, const PipelineConfig& cfg) {
  PipelineResult res;
  res.prevalence = prevalence_select(data.cohort, cfg.prevalence);
  const FeatureMatrix full = features::full_matrix(data).matrix;

  std::vector<std::string> clinical, imaging;
  for (const auto& c : full.columns()) {
    if (c.provenance == Provenance::Clinical && !c.name.starts_with("condition=")) clinical.push_back(c.name);
    if (c.provenance == Provenance::Imaging2D) imaging.push_back(c.name);
  }
  res.clinical = rank_features(full.select_columns(clinical), cfg.ig_threshold);
  res.imaging = rank_features(full.select_columns(imaging), cfg.ig_threshold);

  res.lists.clinical = res.clinical.kept;
  for (const auto& cond : res.prevalence.kept())
    if (full.index_of("condition=" + cond)) res.lists.clinical.push_back("condition=" + cond);
  res.lists.imaging = res.imaging.kept;

  if (cfg.greedy) {
    std::vector<std::string> base = res.lists.clinical;
    base.insert(base.end(), res.lists.imaging.begin(), res.lists.imaging.end());
    std::vector<std::string> candidates;
    for (const auto& c : full.columns())
      if (c.provenance != Provenance::Imaging3D && std::find(base.begin(), base.end(), c.name) == base.end())
        candidates.push_back(c.name);
    res.greedy = greedy_forward(full, base, candidates, cfg.greedy_config);
    for (std::size_t i = base.size(); i < res.greedy->features.size(); ++i) {
      const auto& name = res.greedy->features[i];
      const auto& info = full.columns()[*full.index_of(name)];
      (info.provenance == Provenance::Clinical ? res.lists.clinical : res.lists.imaging).push_back(name);
    }
  }
  return res;
}

}  // namespace aok::selection
