#include <cmath>
#include <numbers>

#include "aok/core.hpp"
#include "doctest.h"

using namespace aok;

namespace {

template <class E>
void check_roundtrip() {
  for (std::size_t i = 0; i < enum_count<E>(); ++i) {
    const auto e = static_cast<E>(i);
    const auto back = enum_from_string<E>(to_string(e));
    REQUIRE(back);
    CHECK(*back == e);
  }
}

std::vector<Point2> circle(int n, double r = 1.0) {
  std::vector<Point2> p;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * i / n;
    p.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return p;
}

}  // namespace

TEST_CASE("enum names round trip and are case sensitive") {
  check_roundtrip<OcclusionLabel>();
  check_roundtrip<Gender>();
  check_roundtrip<AneurysmLocation>();
  check_roundtrip<Side>();
  check_roundtrip<RuptureStatus>();
  check_roundtrip<Detection>();
  check_roundtrip<View>();
  check_roundtrip<ColumnKind>();
  check_roundtrip<Provenance>();
  check_roundtrip<Source>();
  check_roundtrip<FeatureSetId>();
  CHECK(enum_count<FeatureSetId>() == 7);
  CHECK_FALSE(enum_from_string<Side>("right"));
  CHECK_FALSE(enum_from_string<AneurysmLocation>(""));
}

TEST_CASE("outcome labels parse strictly") {
  CHECK(parse_label("Complete Occlusion") == OcclusionLabel::CompleteOcclusion);
  CHECK(parse_label("Partial Occlusion") == OcclusionLabel::PartialOcclusion);
  CHECK_THROWS_AS(parse_label("complete occlusion"), ParseError);
  CHECK_THROWS_AS(parse_label("Residual Neck"), ParseError);
  CHECK_THROWS_AS(parse_label(" Complete Occlusion"), ParseError);
}

TEST_CASE("condition vocabulary") {
  const auto& v = ConditionVocabulary::builtin();
  CHECK(v.contains("Hypertension"));
  CHECK(v.contains("Migraines"));
  CHECK_FALSE(v.contains("hypertension"));
  CHECK(v.body_systems().front() == "Cardiovascular and circulatory");

  const auto custom = ConditionVocabulary::parse("# comment\nA,x\nA,y\n\nB,z\n");
  CHECK(custom.conditions() == std::vector<std::string>{"x", "y", "z"});
  CHECK(custom.body_systems() == std::vector<std::string>{"A", "B"});

  try {
    ConditionVocabulary::parse("A,x\nA,x\n");
    FAIL("duplicate accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(ConditionVocabulary::parse("A,\n"), ParseError);
  CHECK_THROWS_AS(ConditionVocabulary::parse("just one field\n"), ParseError);
}

TEST_CASE("record validation reports each broken invariant") {
  const auto& vocab = ConditionVocabulary::builtin();
  ClinicalRecord ok;
  ok.case_id = "P1";
  ok.age = 60;
  ok.hunt_hess = 5;
  ok.mrs = 6;
  ok.nihss = 0;
  ok.conditions = {"Hypertension"};
  CHECK(validate_record(ok, vocab).empty());

  auto field_of = [&](ClinicalRecord r) {
    auto v = validate_record(r, vocab);
    return v.size() == 1 ? v[0].field : std::string("<" + std::to_string(v.size()) + ">");
  };
  ClinicalRecord r = ok;
  r.age = 131;
  CHECK(field_of(r) == "age");
  r = ok;
  r.age = std::nan("");
  CHECK(field_of(r) == "age");
  r = ok;
  r.height_cm = 0.0;
  CHECK(field_of(r) == "height_cm");
  r = ok;
  r.weight_kg = -1;
  CHECK(field_of(r) == "weight_kg");
  r = ok;
  r.hunt_hess = 6;
  CHECK(field_of(r) == "hunt_hess");
  r = ok;
  r.nihss = -1;
  CHECK(field_of(r) == "nihss");
  r = ok;
  r.mrs = 7;
  CHECK(field_of(r) == "mrs");
  r = ok;
  r.conditions.insert("Gout of the soul");
  CHECK(field_of(r) == "conditions");
  r = ok;
  r.race = "";
  CHECK(field_of(r) == "race");
  r = ok;
  r.case_id.clear();
  CHECK(field_of(r) == "case_id");

  Cohort c{{ok, OcclusionLabel::CompleteOcclusion}, {ok, OcclusionLabel::PartialOcclusion}};
  const auto v = validate_cohort(c, vocab);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "case_id");
}

TEST_CASE("measurement and vessel validation") {
  Measurement2D m;
  m.height_mm = 3;
  m.neck_mm = 0;
  const auto v = validate(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "neck_mm");

  VesselAnnotation a;
  a.parent = {{0, 0}, {0, 1}};
  a.left = {{0, 1}, {1, 2}};
  a.right = {{0, 1}, {0, 1}};
  a.left_diam_mm = -2;
  const auto w = validate(a);
  REQUIRE(w.size() == 2);
  CHECK(w[0].field == "right_seg");
  CHECK(w[1].field == "left_diam_mm");
}

TEST_CASE("simple polygon detection") {
  CHECK(is_simple_polygon(circle(3)));
  CHECK(is_simple_polygon(circle(64)));
  // Bow tie.
  const std::vector<Point2> bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(is_simple_polygon(bow));
  // Repeated vertex, collinear triangle, spike folding back on itself.
  CHECK_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}, {1, 0}, {0, 1}}));
  CHECK_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}, {2, 0}}));
  CHECK_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {2, 0}, {1, 0}, {1, 1}}));
  // Vertex touching a non-adjacent edge.
  CHECK_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {2, 0}, {2, 2}, {1, 0}, {0, 2}}));
  CHECK_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}, {std::nan(""), 1}}));
  // Non-convex but simple.
  CHECK(is_simple_polygon(std::vector<Point2>{{0, 0}, {2, 0}, {2, 2}, {1, 1}, {0, 2}}));
}

TEST_CASE("contour and stack construction checks") {
  CHECK_NOTHROW(Contour2D(circle(8)));
  CHECK_THROWS_AS(Contour2D({{0, 0}, {1, 0}}), ValidationError);
  CHECK_THROWS_AS(Contour2D({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), ValidationError);

  const Contour2D c(circle(8));
  CHECK_NOTHROW(ContourStack3D({{0.0, c}, {0.5, c}}));
  CHECK_THROWS_AS(ContourStack3D({{0.0, c}}), ValidationError);
  CHECK_THROWS_AS(ContourStack3D({{0.0, c}, {0.0, c}}), ValidationError);
  CHECK_THROWS_AS(ContourStack3D({{1.0, c}, {0.5, c}}), ValidationError);
  CHECK_THROWS_AS(ContourStack3D({{0.0, c}, {INFINITY, c}}), ValidationError);
}

TEST_CASE("masks index x fastest and normalize voxels") {
  Mask3D m({3, 4, 5}, {0.5, 0.5, 1.0});
  CHECK(m.size() == 60);
  CHECK(m.index({1, 2, 3}) == 1 + 3 * (2 + 4 * 3));
  m.set({2, 3, 4}, true);
  CHECK(m.at({2, 3, 4}));
  CHECK(m.voxels()[59] == 1);

  const Mask2D n({2, 2}, {1, 1}, {0, 7, 0, 255});
  CHECK(n.voxels()[1] == 1);
  CHECK(n.voxels()[3] == 1);
  CHECK_THROWS_AS(Mask2D({2, 2}, {1, 1}, {0, 1, 0}), ValidationError);
  CHECK_THROWS_AS(Mask2D({0, 2}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(Mask2D({2, 2}, {0, 1}), ValidationError);
}

TEST_CASE("feature matrix invariants and views") {
  const std::vector<ColumnInfo> cols{{"a"}, {"b", ColumnKind::Categorical}};
  const std::vector<std::string> ids{"r0", "r1", "r2"};
  const std::vector<OcclusionLabel> y{OcclusionLabel::CompleteOcclusion, OcclusionLabel::PartialOcclusion,
                                      OcclusionLabel::CompleteOcclusion};
  const FeatureMatrix m(cols, ids, {{1.0, Cell{}, 3.0}, {0.0, 1.0, 0.0}}, y);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m.count(OcclusionLabel::CompleteOcclusion) == 2);
  CHECK_FALSE(m.cell(1, 0));
  CHECK(m.index_of("b") == 1u);
  CHECK_FALSE(m.index_of("c"));

  const std::vector<std::string> names{"b", "a"};
  const auto s = m.select_columns(names);
  CHECK(s.column_names() == names);
  CHECK(s.cell(2, 1) == 3.0);
  const std::vector<std::string> bad{"zz"};
  CHECK_THROWS_AS(m.select_columns(bad), ValidationError);

  const std::vector<std::size_t> rows{2, 0};
  const auto r = m.select_rows(rows);
  CHECK(r.case_ids() == std::vector<std::string>{"r2", "r0"});
  CHECK(r.cell(0, 0) == 3.0);
  const std::vector<std::size_t> oob{3};
  CHECK_THROWS_AS(m.select_rows(oob), ValidationError);

  const auto w = m.with_column({"c"}, {Cell{}, Cell{}, 5.0});
  CHECK(w.cols() == 3);
  CHECK_THROWS_AS(m.with_column({"a"}, {1.0, 1.0, 1.0}), ValidationError);

  CHECK_THROWS_AS(FeatureMatrix(cols, ids, {{1.0, 2.0}, {0.0, 1.0, 0.0}}, y), ValidationError);
  CHECK_THROWS_AS(FeatureMatrix(cols, ids, {{1.0, NAN, 2.0}, {0.0, 1.0, 0.0}}, y), ValidationError);
  CHECK_THROWS_AS(FeatureMatrix(cols, {"r0", "r1"}, {{1.0, 2.0}, {0.0, 1.0}}, y), ValidationError);
}
