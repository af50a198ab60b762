#include <cmath>
#include <random>

#include "aok/features.hpp"
#include "aok/selection.hpp"
#include "aok/synthgen.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace aok;
using namespace aok::selection;
using aok::testing::brute_information_gain;
using aok::testing::random_table;

namespace {

Cohort counts_cohort(std::size_t n_co, std::size_t with_co, std::size_t n_po, std::size_t with_po,
                     const std::string& condition = "Hypertension") {
  Cohort c;
  auto add = [&](std::size_t n, std::size_t with, OcclusionLabel y, const char* prefix) {
    for (std::size_t i = 0; i < n; ++i) {
      ClinicalRecord r;
      r.case_id = prefix + std::to_string(i);
      if (i < with) r.conditions.insert(condition);
      c.push_back({r, y});
    }
  };
  add(n_co, with_co, OcclusionLabel::CompleteOcclusion, "c");
  add(n_po, with_po, OcclusionLabel::PartialOcclusion, "p");
  return c;
}

double round2(double v) { return std::round(v * 100) / 100; }

}  // namespace

TEST_CASE("worked prevalence example") {
  const auto report = prevalence_select(synthgen::prevalence_fixture());
  CHECK(report.n_co == 49);
  CHECK(report.n_po == 32);
  const auto* h = report.find("Hypertension");
  const auto* m = report.find("Migraines");
  REQUIRE(h);
  REQUIRE(m);
  CHECK(h->count_co == 28);
  CHECK(h->count_po == 19);
  CHECK(m->count_po == 14);
  CHECK(round2(h->ratio_co) == 0.57);
  CHECK(round2(h->ratio_po) == 0.59);
  CHECK(round2(m->ratio_po) == 0.44);
  CHECK(round2(h->abs_diff) == 0.02);
  CHECK(round2(m->abs_diff) == 0.13);
  CHECK(h->kept_stage1);
  CHECK_FALSE(h->kept_stage2);
  CHECK(m->kept_stage2);
  CHECK(report.kept() == std::vector<std::string>{"Migraines"});
}

TEST_CASE("prevalence thresholds are inclusive") {
  // 3/10 = 0.30 passes stage 1; 0.5 - 0.4 = 0.10 passes stage 2 despite rounding.
  auto r = prevalence_select(counts_cohort(10, 3, 10, 0));
  CHECK(r.rows.at(0).kept_stage1);
  r = prevalence_select(counts_cohort(10, 5, 10, 4));
  CHECK(r.rows.at(0).kept_stage2);
  r = prevalence_select(counts_cohort(10, 2, 10, 1));
  CHECK_FALSE(r.rows.at(0).kept_stage1);
  CHECK_FALSE(r.rows.at(0).kept_stage2);
  r = prevalence_select(counts_cohort(100, 40, 100, 31));
  CHECK_FALSE(r.rows.at(0).kept_stage2);

  // Listed but unseen conditions still get a row.
  const std::vector<std::string> listed{"Arrhythmia"};
  r = prevalence_select(counts_cohort(4, 2, 4, 0), listed);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].condition == "Arrhythmia");
  CHECK(r.rows[0].count_co == 0);

  CHECK_THROWS_AS(prevalence_select(counts_cohort(4, 1, 0, 0)), ValidationError);
}

TEST_CASE("information gain equals brute-force split enumeration") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto t = random_table(seed, 4 + seed % 9, 2, 0.15, 2 + static_cast<int>(seed % 5));
    for (std::size_t j = 0; j < t.cols(); ++j)
      for (ColumnKind kind : {ColumnKind::Numeric, ColumnKind::Categorical}) {
        const double got = information_gain(t.column(j), t.labels(), kind);
        const std::vector<Cell> col(t.column(j).begin(), t.column(j).end());
        const double want = brute_information_gain(col, t.labels(), kind == ColumnKind::Categorical);
        INFO("seed " << seed << " col " << j);
        CHECK(std::abs(got - want) <= 1e-12);
      }
  }
}

TEST_CASE("information gain edge cases and monotone invariance") {
  using L = OcclusionLabel;
  const std::vector<L> y{L::CompleteOcclusion, L::CompleteOcclusion, L::PartialOcclusion, L::PartialOcclusion};
  const std::vector<Cell> perfect{1.0, 2.0, 3.0, 4.0};
  CHECK(information_gain(perfect, y, ColumnKind::Numeric) == doctest::Approx(1.0));
  const std::vector<Cell> half_missing{1.0, Cell{}, 3.0, Cell{}};
  CHECK(information_gain(half_missing, y, ColumnKind::Numeric) == doctest::Approx(0.5));
  const std::vector<Cell> none{Cell{}, Cell{}, Cell{}, Cell{}};
  CHECK(information_gain(none, y, ColumnKind::Numeric) == 0.0);
  const std::vector<Cell> constant{2.0, 2.0, 2.0, 2.0};
  CHECK(information_gain(constant, y, ColumnKind::Numeric) == 0.0);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  std::vector<Cell> v, w;
  std::vector<L> lab;
  for (int i = 0; i < 60; ++i) {
    const double x = z(rng) + (i % 2 ? 0.7 : 0);
    v.push_back(i % 7 ? Cell{x} : Cell{});
    w.push_back(i % 7 ? Cell{std::exp(3 * x)} : Cell{});
    lab.push_back(i % 2 ? L::PartialOcclusion : L::CompleteOcclusion);
  }
  CHECK(information_gain(v, lab, ColumnKind::Numeric) == information_gain(w, lab, ColumnKind::Numeric));
}

TEST_CASE("ranking order and strict threshold") {
  using L = OcclusionLabel;
  const std::vector<L> y{L::CompleteOcclusion, L::CompleteOcclusion, L::PartialOcclusion, L::PartialOcclusion};
  const FeatureMatrix m({{"b"}, {"a"}, {"c"}, {"half"}}, {"1", "2", "3", "4"},
                        {{1.0, 2.0, 3.0, 4.0}, {4.0, 3.0, 2.0, 1.0}, {1.0, 1.0, 1.0, 1.0}, {1.0, Cell{}, 3.0, Cell{}}},
                        y);
  const auto r = rank_features(m, 0.5);
  REQUIRE(r.all.size() == 4);
  CHECK(r.all[0].name == "a");
  CHECK(r.all[1].name == "b");
  CHECK(r.all[2].name == "half");
  CHECK(r.all[3].name == "c");
  CHECK(r.kept == std::vector<std::string>{"a", "b"});  // 0.5 is not above 0.5
}

TEST_CASE("greedy forward search adds the informative column and stops") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  const std::size_t n = 80;
  std::vector<std::vector<Cell>> cols(4);
  std::vector<OcclusionLabel> y;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const bool co = i % 2 == 0;
    y.push_back(co ? OcclusionLabel::CompleteOcclusion : OcclusionLabel::PartialOcclusion);
    ids.push_back(std::to_string(i));
    cols[0].push_back(z(rng));
    cols[1].push_back(z(rng) + (co ? 2.0 : -2.0));
    cols[2].push_back(z(rng));
    cols[3].push_back(z(rng));
  }
  const FeatureMatrix m({{"noise0"}, {"signal"}, {"noise1"}, {"noise2"}}, ids, cols, y);
  GreedyConfig cfg;
  cfg.cv = {.k = 5, .seed = 1, .repetitions = 1, .stratified = true};
  cfg.forest.n_trees = 15;
  const std::vector<std::string> base{"noise0"};
  const std::vector<std::string> cand{"noise1", "signal", "noise2"};
  const auto r = greedy_forward(m, base, cand, cfg);
  REQUIRE(r.features.size() >= 2);
  CHECK(r.features[0] == "noise0");
  CHECK(r.features[1] == "signal");
  CHECK(r.final_score > r.base_score + cfg.epsilon);
  // The first iteration evaluates every candidate; exactly one is accepted per accepted iteration.
  int first = 0, accepted = 0;
  for (const auto& s : r.trace) {
    first += s.iteration == r.trace.front().iteration;
    accepted += s.accepted;
  }
  CHECK(first == 3);
  CHECK(accepted == static_cast<int>(r.features.size() - base.size()));
  CHECK(greedy_forward(m, base, cand, cfg).features == r.features);
}

TEST_CASE("selection pipeline files columns by provenance") {
  synthgen::CohortSpec spec;
  spec.seed = 2;
  spec.effect_sizes = {{"neck_mm", 2.5}, {"age", 2.5}};
  spec.condition_prevalences = {{"Migraines", {0.6, 0.2}}, {"Hypertension", {0.5, 0.5}}};
  const auto s = synthgen::gen_cohort(spec);
  features::Dataset d{s.cohort, s.annotations, {}};
  for (const auto& e : s.cohort) {
    const auto a = s.annotations.find(e.record.case_id);
    d.geometry[e.record.case_id] = features::compute_case_geometry(&a->second, {}, &s.devices);
  }
  const auto r = select_features(d, {});
  const auto full = features::full_matrix(d).matrix;
  auto prov = [&](const std::string& n) { return full.columns()[*full.index_of(n)].provenance; };
  for (const auto& n : r.lists.clinical) CHECK(prov(n) == Provenance::Clinical);
  for (const auto& n : r.lists.imaging) CHECK(prov(n) == Provenance::Imaging2D);
  for (const auto& f : r.clinical.all) CHECK(f.name.rfind("condition=", 0) != 0);
  CHECK(std::find(r.lists.clinical.begin(), r.lists.clinical.end(), "age") != r.lists.clinical.end());
  CHECK(std::find(r.lists.imaging.begin(), r.lists.imaging.end(), "agg_neck_mm") != r.lists.imaging.end());
  const auto kept = r.prevalence.kept();
  for (const auto& c : kept)
    CHECK(std::find(r.lists.clinical.begin(), r.lists.clinical.end(), "condition=" + c) != r.lists.clinical.end());
  CHECK(std::find(kept.begin(), kept.end(), "Migraines") != kept.end());
  CHECK_FALSE(r.greedy);
}

namespace {

// Synthetic cohort whose four base columns all carry a planted effect;
// label-free noise columns are appended. Four base columns keep the forest's
// per-split candidate count (floor sqrt) unchanged when a fifth arrives.
const std::vector<std::string> kStrongBase{"age", "height_cm", "weight_kg", "neck_mm"};

FeatureMatrix strong_plus_noise(std::uint64_t seed, std::size_t n_noise) {
  synthgen::CohortSpec spec;
  spec.seed = seed;
  spec.effect_sizes = {{"age", 2.0}, {"height_cm", 2.0}, {"weight_kg", 2.0}, {"neck_mm", 2.0}};
  spec.lateral_missing_fraction = 0.0;
  const auto s = synthgen::gen_cohort(spec);
  std::mt19937_64 rng(seed * 7919);
  std::normal_distribution<double> z;
  std::vector<ColumnInfo> meta;
  for (const auto& n : kStrongBase) meta.push_back({n});
  for (std::size_t k = 0; k < n_noise; ++k) meta.push_back({"noise" + std::to_string(k)});
  std::vector<std::vector<Cell>> cols(meta.size());
  std::vector<std::string> ids;
  std::vector<OcclusionLabel> y;
  auto cell = [](const auto& v) { return v ? Cell{double(*v)} : Cell{}; };
  for (const auto& e : s.cohort) {
    ids.push_back(e.record.case_id);
    y.push_back(e.label);
    cols[0].push_back(cell(e.record.age));
    cols[1].push_back(cell(e.record.height_cm));
    cols[2].push_back(cell(e.record.weight_kg));
    const auto& a = s.annotations.at(e.record.case_id);
    cols[3].push_back(features::aggregate(a.ap->neck_mm, a.lateral->neck_mm));
    for (std::size_t k = 0; k < n_noise; ++k) cols[4 + k].push_back(z(rng));
  }
  return FeatureMatrix(meta, ids, cols, y);
}

}  // namespace

TEST_CASE("greedy search adds nothing from pure noise on top of a strong base") {
  GreedyConfig cfg;
  cfg.cv = {.k = 10, .seed = 1, .repetitions = 1, .stratified = true};
  const auto& base = kStrongBase;
  const std::vector<std::string> cand{"noise0", "noise1", "noise2"};
  int clean = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = greedy_forward(strong_plus_noise(seed, 3), base, cand, cfg);
    clean += r.features == base;
  }
  MESSAGE("no additions in " << clean << "/20 seeds");
  CHECK(clean >= 19);
}

TEST_CASE("a copy of the label is accepted in the first iteration") {
  auto m = strong_plus_noise(3, 1);
  std::vector<Cell> copy;
  for (auto y : m.labels()) copy.push_back(y == OcclusionLabel::CompleteOcclusion ? 1.0 : 0.0);
  std::vector<ColumnInfo> meta{{"noise0"}, {"label_copy"}};
  const FeatureMatrix t(meta, m.case_ids(), {{m.column(4).begin(), m.column(4).end()}, copy}, m.labels());
  GreedyConfig cfg;
  cfg.forest.n_trees = 15;
  const std::vector<std::string> base{"noise0"}, cand{"label_copy"};
  const auto r = greedy_forward(t, base, cand, cfg);
  CHECK(r.features == std::vector<std::string>{"noise0", "label_copy"});
  REQUIRE_FALSE(r.trace.empty());
  CHECK(r.trace.front().candidate == "label_copy");
  CHECK(r.trace.front().accepted);
  CHECK(r.final_score == doctest::Approx(1.0));
}

TEST_CASE("empty candidate list returns the base unchanged") {
  const auto m = strong_plus_noise(4, 2);
  const std::vector<std::string> base{"noise1", "age"};
  GreedyConfig cfg;
  cfg.forest.n_trees = 10;
  const auto r = greedy_forward(m, base, {}, cfg);
  CHECK(r.features == base);
  CHECK(r.final_score == r.base_score);
}
