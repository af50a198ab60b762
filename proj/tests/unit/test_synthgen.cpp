#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "aok/evaluation.hpp"
#include "aok/geometry.hpp"
#include "aok/selection.hpp"
#include "aok/synthgen.hpp"
#include "doctest.h"

using namespace aok;
using namespace aok::synthgen;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("aok_sg_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

features::Dataset dataset(const SyntheticCohort& s) {
  features::Dataset d{s.cohort, s.annotations, {}};
  for (const auto& e : s.cohort) {
    const auto& id = e.record.case_id;
    const auto a = s.annotations.find(id);
    const auto m = s.masks.find(id);
    d.geometry[id] = features::compute_case_geometry(a == s.annotations.end() ? nullptr : &a->second,
                                                     m == s.masks.end() ? features::CaseMasks{} : m->second,
                                                     &s.devices);
  }
  return d;
}

std::size_t missing_cells(const FeatureMatrix& m) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (const auto& c : m.column(j)) n += !c;
  return n;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("cohort label counts, ids and determinism") {
  CohortSpec spec;
  spec.seed = 5;
  const auto a = gen_cohort(spec);
  REQUIRE(a.cohort.size() == 81);
  std::size_t co = 0;
  for (const auto& e : a.cohort) co += e.label == OcclusionLabel::CompleteOcclusion;
  CHECK(co == 49);
  CHECK(a.cohort.front().record.case_id == "S001");
  CHECK(a.cohort.back().record.case_id == "S081");
  CHECK(validate_cohort(a.cohort, ConditionVocabulary::builtin()).empty());
  CHECK(a.effects.size() == trait_names().size());

  const auto b = gen_cohort(spec);
  CHECK(a.cohort == b.cohort);
  CHECK(a.annotations == b.annotations);
  spec.seed = 6;
  CHECK_FALSE(gen_cohort(spec).cohort == a.cohort);

  spec.n_co = 3;
  spec.n_po = 1;
  const auto small = gen_cohort(spec);
  CHECK(small.cohort.size() == 4);
}

TEST_CASE("no missing cells when every missingness source is off") {
  CohortSpec spec;
  spec.seed = 2;
  spec.missing_rate = 0.0;
  spec.stack_fraction = 1.0;
  spec.lateral_missing_fraction = 0.0;
  const auto d = dataset(gen_cohort(spec));
  const auto m = features::full_matrix(d).matrix;
  CHECK(missing_cells(m) == 0);

  spec.missing_rate = 0.2;
  const auto m2 = features::full_matrix(dataset(gen_cohort(spec))).matrix;
  const double frac = double(missing_cells(m2)) / double(m2.rows() * m2.cols());
  CHECK(frac > 0.02);
  CHECK(frac < 0.4);
}

TEST_CASE("stack and lateral fractions are honoured") {
  CohortSpec spec;
  spec.seed = 9;
  const auto s = gen_cohort(spec);
  std::size_t stacks = 0, laterals = 0;
  for (const auto& [id, a] : s.annotations) {
    stacks += a.stack.has_value();
    laterals += a.lateral.has_value();
    REQUIRE(a.device_model);
    CHECK(s.devices.volume_of(*a.device_model));
  }
  CHECK(stacks == 41);
  CHECK(laterals == 81 - static_cast<std::size_t>(std::lround(0.11 * 81)));
}

TEST_CASE("planted effects move the class means") {
  CohortSpec spec;
  spec.n_co = 400;
  spec.n_po = 400;
  spec.seed = 3;
  spec.effect_sizes = {{"age", 1.0}, {"neck_mm", -1.0}};
  const auto s = gen_cohort(spec);
  double age[2] = {0, 0}, neck[2] = {0, 0};
  double n[2] = {0, 0};
  for (const auto& e : s.cohort) {
    const int k = e.label == OcclusionLabel::CompleteOcclusion ? 0 : 1;
    n[k] += 1;
    age[k] += *e.record.age;
    neck[k] += *features::aggregate(s.annotations.at(e.record.case_id).ap->neck_mm,
                                    s.annotations.at(e.record.case_id).lateral
                                        ? s.annotations.at(e.record.case_id).lateral->neck_mm
                                        : std::nullopt);
  }
  // d = 1 moves the means 1 SD apart (age SD 12); measurement noise widens neck a little.
  CHECK((age[0] / n[0] - age[1] / n[1]) == doctest::Approx(12.0).epsilon(0.15));
  CHECK(neck[0] / n[0] < neck[1] / n[1] - 0.6);
}

TEST_CASE("condition prevalences drive prevalence selection") {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CohortSpec spec;
    spec.seed = seed;
    spec.condition_prevalences = {{"Hypertension", {0.57, 0.59}}, {"Migraines", {0.57, 0.44}}};
    const auto r = selection::prevalence_select(gen_cohort(spec).cohort);
    const auto kept = r.kept();
    const bool mig = std::find(kept.begin(), kept.end(), "Migraines") != kept.end();
    const bool hyp = std::find(kept.begin(), kept.end(), "Hypertension") != kept.end();
    hits += mig && !hyp;
  }
  MESSAGE("Migraines kept and Hypertension dropped in " << hits << "/100 seeds");
  CHECK(hits >= 90);
}

TEST_CASE("zero effects give chance-level accuracy") {
  CohortSpec spec;
  spec.seed = 21;
  spec.missing_rate = 0.1;
  const auto d = dataset(gen_cohort(spec));
  const auto m = features::build_matrix(d, FeatureSetId::A, {}).matrix;
  learners::LearnerConfig lc;
  lc.forest.n_trees = 30;
  const evaluation::CVConfig cv{.k = 5, .seed = 1, .repetitions = 1, .stratified = true};
  const double observed = evaluation::cross_validate(m, lc, cv).pooled.accuracy.point;
  // Label-permutation null: the observed accuracy must not sit in either 5% tail.
  std::mt19937_64 rng(77);
  std::vector<double> null;
  for (int p = 0; p < 39; ++p) {
    auto y = m.labels();
    std::shuffle(y.begin(), y.end(), rng);
    null.push_back(evaluation::cross_validate(m.with_labels(y), lc, cv).pooled.accuracy.point);
  }
  const auto above = std::count_if(null.begin(), null.end(), [&](double v) { return v >= observed; });
  INFO("observed " << observed << ", null values at or above: " << above << "/39");
  CHECK(above >= 1);
  CHECK(above <= 38);
}

TEST_CASE("spec JSON round trip and validation") {
  CohortSpec spec;
  spec.n_co = 10;
  spec.effect_sizes = {{"sac_lobulation", 2.5}};
  spec.condition_prevalences = {{"Migraines", {0.5, 0.2}}};
  spec.missing_rate = 0.1;
  spec.with_masks = true;
  const auto back = parse_cohort_spec(format_cohort_spec(spec));
  CHECK(format_cohort_spec(back) == format_cohort_spec(spec));
  CHECK(back.effect_sizes == spec.effect_sizes);
  CHECK(back.condition_prevalences == spec.condition_prevalences);
  CHECK_THROWS_AS(parse_cohort_spec(R"({"n_co": 4, "bogus": 1})"), ParseError);
  CHECK_THROWS_AS(parse_cohort_spec("{"), ParseError);

  CohortSpec bad;
  bad.n_po = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = {};
  bad.missing_rate = 1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = {};
  bad.effect_sizes = {{"shoe_size", 1}};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = {};
  bad.condition_prevalences = {{"Lycanthropy", {0.1, 0.1}}};
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("written dataset reads back through io") {
  CohortSpec spec;
  spec.n_co = 4;
  spec.n_po = 3;
  spec.with_masks = true;
  spec.stack_fraction = 1.0;
  const auto s = gen_cohort(spec);
  REQUIRE(s.masks.size() == 7);
  TempDir t;
  write_dataset(t.path, s, spec);
  CHECK(io::read_cohort(t.path / "cohort.csv") == s.cohort);
  CHECK(io::read_annotation_dir(t.path / "annotations") == s.annotations);
  for (const char* f : {"devices.json", "truth.json", "spec.json", "run.json"}) CHECK(std::filesystem::exists(t.path / f));
  const auto masks = features::load_case_masks(t.path / "masks", "S001");
  REQUIRE(masks.sac);
  CHECK(*masks.sac == *s.masks.at("S001").sac);
  CHECK(parse_cohort_spec(io::read_text(t.path / "spec.json")).seed == spec.seed);
}

TEST_CASE("prevalence fixture has the worked-example counts") {
  const auto c = prevalence_fixture();
  std::size_t co = 0, h_co = 0, h_po = 0, m_co = 0, m_po = 0;
  for (const auto& e : c) {
    const bool is_co = e.label == OcclusionLabel::CompleteOcclusion;
    co += is_co;
    (is_co ? h_co : h_po) += e.record.conditions.contains("Hypertension");
    (is_co ? m_co : m_po) += e.record.conditions.contains("Migraines");
  }
  CHECK(c.size() == 81);
  CHECK(co == 49);
  CHECK(h_co == 28);
  CHECK(h_po == 19);
  CHECK(m_co == 28);
  CHECK(m_po == 14);
}

TEST_CASE("shape truths") {
  ShapeParams p;
  p.size = {10, 10, 20};
  CHECK(*gen_shape(ShapeKind::Ellipsoid, p, ShapeOutput::Stack).truth.volume_mm3 == doctest::Approx(8377.58).epsilon(1e-6));
  p.size = {10, 10, 10};
  const auto sphere = gen_shape(ShapeKind::Sphere, p, ShapeOutput::Stack);
  CHECK(*sphere.truth.volume_mm3 == doctest::Approx(4188.79).epsilon(1e-6));
  CHECK(*sphere.truth.surface_mm2 == doctest::Approx(4 * std::numbers::pi * 100));
  CHECK_FALSE(sphere.truth.surface_approximate);

  const auto cube = gen_shape(ShapeKind::Prism, p, ShapeOutput::Mask3D, {.spacing_mm = 1.0});
  REQUIRE(cube.mask3d);
  std::size_t fg = 0;
  for (auto v : cube.mask3d->voxels()) fg += v;
  CHECK(fg == 1000);
  CHECK(*cube.truth.surface_mm2 == 600.0);

  p.size = {3, 4, 5};
  const auto e = gen_shape(ShapeKind::Ellipsoid, p, ShapeOutput::Mask2D, {.spacing_mm = 0.25});
  REQUIRE(e.mask2d);
  CHECK(e.truth.surface_approximate);
  CHECK(rel(geometry::mask_area(*e.mask2d), std::numbers::pi * 12) < 0.05);
  // Sphere: Thomsen's formula is exact.
  CHECK(ellipsoid_surface_thomsen(2, 2, 2) == doctest::Approx(16 * std::numbers::pi));

  const auto blob = gen_shape(ShapeKind::Blob, p, ShapeOutput::Stack);
  CHECK_FALSE(blob.truth.volume_mm3);
  CHECK(blob.stack);
}

TEST_CASE("shape resolution and parameter checks") {
  ShapeParams p;
  p.size = {2, 2, 2};
  CHECK_THROWS_AS(gen_shape(ShapeKind::Sphere, p, ShapeOutput::Mask3D, {.spacing_mm = 0.5}), ValidationError);
  CHECK_NOTHROW(gen_shape(ShapeKind::Sphere, p, ShapeOutput::Mask3D, {.spacing_mm = 0.25}));
  CHECK_THROWS_AS(gen_shape(ShapeKind::Sphere, p, ShapeOutput::Stack, {.slices = 7}), ValidationError);
  CHECK_THROWS_AS(gen_shape(ShapeKind::Sphere, p, ShapeOutput::Stack, {.slices = 33, .ring_samples = 6}),
                  ValidationError);
  p.size = {0, 2, 2};
  CHECK_THROWS_AS(gen_shape(ShapeKind::Ellipsoid, p, ShapeOutput::Stack), ValidationError);
  p.size = {5, 5, 5};
  p.blob_amplitude = 0.6;
  CHECK_THROWS_AS(gen_shape(ShapeKind::Blob, p, ShapeOutput::Stack), ValidationError);
}

TEST_CASE("sphere pipeline closure over random radii") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> radius(2.0, 15.0);
  for (int i = 0; i < 20; ++i) {
    ShapeParams p;
    p.size = {radius(rng), 0, 0};
    p.size[1] = p.size[2] = p.size[0];
    INFO("r = " << p.size[0]);
    const auto g = gen_shape(ShapeKind::Sphere, p, ShapeOutput::Stack);
    const auto m = geometry::mesh_metrics(geometry::loft_mesh(*g.stack));
    CHECK(rel(m.volume_cm3 * 1000, *g.truth.volume_mm3) < 0.02);
    CHECK(rel(m.surface_cm2 * 100, *g.truth.surface_mm2) < 0.02);
    CHECK(rel(m.ipr, geometry::kSphereIpr) < 0.01);

    const auto v = gen_shape(ShapeKind::Sphere, p, ShapeOutput::Mask3D, {.spacing_mm = p.size[0] / 10});
    const auto mv = geometry::mesh_metrics(geometry::loft_mesh(geometry::mask_to_stack(*v.mask3d)));
    CHECK(rel(mv.volume_cm3 * 1000, *v.truth.volume_mm3) < 0.03);
  }
}

TEST_CASE("segmentation corpus") {
  TempDir t;
  SegCorpusSpec spec;
  spec.n_cases = 6;
  spec.size = 32;
  spec.folds = 3;
  spec.include_empty = true;
  const auto m = gen_seg_corpus(t.path, spec);
  REQUIRE(m.cases.size() == 6);
  const auto back = io::read_manifest(t.path / "manifest.json");
  CHECK(back.cases == m.cases);
  for (std::size_t i = 0; i < m.cases.size(); ++i) {
    const auto& c = back.cases[i];
    CHECK(c.split == "fold-" + std::to_string(i % 3));
    CHECK_FALSE(c.mask_pred);
    const auto img = io::read_image2d(back.resolve(c.image));
    const auto gt = io::read_mask2d(back.resolve(c.mask_gt));
    CHECK(img.dims == gt.dims());
    std::size_t fg = 0;
    for (auto v : gt.voxels()) fg += v;
    if (i == 0)
      CHECK(fg == 0);
    else
      CHECK(fg > 0);
  }

  TempDir t3;
  spec.task = SegTask::Seg3D;
  spec.n_cases = 2;
  spec.include_empty = false;
  const auto m3 = gen_seg_corpus(t3.path, spec);
  const auto gt3 = io::read_mask3d(m3.resolve(m3.cases[0].mask_gt));
  const auto img3 = io::read_image3d(m3.resolve(m3.cases[0].image));
  CHECK(gt3.dims() == img3.dims);
  CHECK(gt3.dims()[2] == 32);

  spec.size = 8;
  CHECK_THROWS_AS(gen_seg_corpus(t.path / "x", spec), ValidationError);
}
