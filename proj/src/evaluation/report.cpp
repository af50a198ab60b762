#include <cstdio>
#include <string_view>

#include "report_json.hpp"

namespace aok::evaluation {

namespace {

std::string printf_string(const char* fmt, double a, double b, double c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

}  // namespace

std::string format_percent(const Estimate& e) {
  return printf_string("%.1f%% (%.1f%% - %.1f%%)", 100.0 * e.point, 100.0 * e.ci_low, 100.0 * e.ci_high);
}

std::string format_ratio(const Estimate& e) { return printf_string("%.2f (%.2f - %.2f)", e.point, e.ci_low, e.ci_high); }

std::string format_table(const std::map<FeatureSetId, MetricBlock>& blocks) {
  if (blocks.empty()) throw ValidationError("format_table: no metric blocks");
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Feature Set", "Accuracy (95% CI)", "Specificity (95% CI)", "Sensitivity (95% CI)",
                  "Weighted F1 Score (95% CI)", "ROC (95% CI)", "F1 (CO) (95% CI)", "F1 (PO) (95% CI)"});
  for (const auto& [set, m] : blocks) {
    rows.push_back({std::string(to_string(set)), format_percent(m.accuracy), format_percent(m.specificity),
                    format_percent(m.sensitivity), format_ratio(m.weighted_f1), format_ratio(m.roc_auc),
                    format_ratio(m.f1_co), format_ratio(m.f1_po)});
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out += r[c];
      if (c + 1 < r.size()) out += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Estimate& e) { return {{"point", e.point}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}}; }

nlohmann::json to_json(const MetricBlock& m) {
  return {{"n", m.n},
          {"confusion", {{"tp", m.confusion.tp}, {"fn", m.confusion.fn}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}}},
          {"accuracy", to_json(m.accuracy)},
          {"specificity", to_json(m.specificity)},
          {"sensitivity", to_json(m.sensitivity)},
          {"weighted_f1", to_json(m.weighted_f1)},
          {"roc_auc", to_json(m.roc_auc)},
          {"f1_co", to_json(m.f1_co)},
          {"f1_po", to_json(m.f1_po)}};
}

nlohmann::json to_json(const TTest& t) {
  return {{"t", t.t}, {"p", t.p}, {"df", t.df}, {"mean_diff", t.mean_diff}, {"sd_diff", t.sd_diff}};
}

nlohmann::json to_json(const DiceResult& d) {
  return {{"per_case", d.per_case}, {"mean", d.mean}, {"sd", d.sd}, {"ci_low", d.ci_low}, {"ci_high", d.ci_high}};
}

std::string metric_block_json(const MetricBlock& block) { return to_json(block).dump(1); }

}  // namespace aok::evaluation
