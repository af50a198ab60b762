#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "aok/io.hpp"
#include "doctest.h"

using namespace aok;
using namespace aok::io;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("aok_io_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Contour2D ellipse(int n, double a, double b, double cx = 0, double cy = 0) {
  std::vector<Point2> p;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * i / n;
    p.push_back({cx + a * std::cos(t), cy + b * std::sin(t)});
  }
  return Contour2D(p);
}

std::size_t parse_error_line(std::string_view text) {
  try {
    parse_cohort(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

const std::string kHeader = "case_id,label,age,gender,conditions\n";

}  // namespace

TEST_CASE("cohort CSV round trip keeps every field") {
  Cohort c;
  ClinicalRecord r;
  r.case_id = "P01";
  r.age = 61.5;
  r.gender = Gender::Female;
  r.height_cm = 162;
  r.weight_kg = 70.25;
  r.race = "Asian, East";  // needs quoting
  r.aneurysm_location = AneurysmLocation::Basilar;
  r.side = Side::Midline;
  r.rupture_status = RuptureStatus::Unruptured;
  r.detection = Detection::Incidental;
  r.hunt_hess = 0;
  r.nihss = 3;
  r.mrs = 1;
  r.smoking_history = true;
  r.substance_abuse = false;
  r.conditions = {"Hypertension", "Migraines"};
  r.allergies = {"Z88.0"};
  r.medications = {"aspirin", "clopidogrel"};
  c.push_back({r, OcclusionLabel::PartialOcclusion});
  ClinicalRecord sparse;
  sparse.case_id = "P02";
  c.push_back({sparse, OcclusionLabel::CompleteOcclusion});

  const auto text = format_cohort(c);
  CHECK(parse_cohort(text) == c);

  TempDir d;
  write_cohort(d.path / "c.csv", c);
  CHECK(read_cohort(d.path / "c.csv") == c);
}

TEST_CASE("cohort columns may come in any order; empty cells are missing") {
  const auto c = parse_cohort("label,gender,case_id\nPartial Occlusion,,X\n");
  REQUIRE(c.size() == 1);
  CHECK(c[0].record.case_id == "X");
  CHECK_FALSE(c[0].record.gender);
  CHECK(c[0].label == OcclusionLabel::PartialOcclusion);
}

TEST_CASE("cohort parse errors carry the offending line") {
  CHECK(parse_error_line(kHeader + "P1,Complete Occlusion,50,M,\nP2,Complete Occlusion,abc,M,\n") == 3);
  CHECK(parse_error_line(kHeader + "P1,Complete Occlusion,50,X,\n") == 2);
  CHECK(parse_error_line(kHeader + "P1,Residual Neck,50,M,\n") == 2);
  CHECK(parse_error_line(kHeader + "P1,Complete Occlusion,50\n") == 2);
  CHECK(parse_error_line(kHeader + "P1,Complete Occlusion,,,\nP1,Partial Occlusion,,,\n") == 3);
  CHECK(parse_error_line("case_id,label,shoe_size\nP1,Complete Occlusion,9\n") == 1);
  CHECK(parse_error_line("case_id,age\nP1,40\n") == 1);
  // Quoted field with an embedded newline shifts the line count.
  CHECK(parse_error_line(kHeader + "P1,Complete Occlusion,50,M,\"Hypertension\nx\"\nP2,Bad,,,\n") == 4);
  CHECK(parse_error_line(kHeader + "P1,Complete Occlusion,50,M,\"unterminated\n") > 0);

  CohortReadOptions lenient;
  lenient.allow_extra_columns = true;
  CHECK(parse_cohort("case_id,label,shoe_size\nP1,Complete Occlusion,9\n", lenient).size() == 1);
}

TEST_CASE("annotation JSON round trip with every section") {
  AnnotationBundle b;
  b.case_id = "P7";
  b.ap = Measurement2D{View::AP, 5.5, 6.0, 4.0, 3.25};
  b.lateral = Measurement2D{View::Lateral, 5.0, std::nullopt, std::nullopt, 3.0};
  b.vessel = VesselAnnotation{{{0, 0}, {0, 10}}, {{0, 10}, {-5, 15}}, {{0, 10}, {6, 14}}, 3.0, 2.0, std::nullopt};
  b.contour_ap = ContourAnnotation{ellipse(16, 20, 12, 50, 50), {0.2, 0.2}};
  b.stack = ContourStack3D({{0.0, ellipse(12, 2, 1)}, {0.5, ellipse(12, 2.5, 1.5)}, {1.0, ellipse(12, 1, 1)}});
  b.device_model = "WEB 7x5";

  CHECK(parse_annotation(format_annotation(b)) == b);

  AnnotationBundle empty;
  empty.case_id = "E";
  CHECK(parse_annotation(format_annotation(empty)) == empty);

  TempDir d;
  write_annotation(d.path / "a.json", b);
  write_annotation(d.path / "b.json", empty);
  const auto all = read_annotation_dir(d.path);
  CHECK(all.size() == 2);
  CHECK(all.at("P7") == b);
  write_annotation(d.path / "c.json", empty);
  CHECK_THROWS_AS(read_annotation_dir(d.path), ValidationError);
  CHECK_THROWS_AS(read_annotation_dir(d.path / "nope"), ConfigError);
}

TEST_CASE("annotation shape and invariant errors") {
  CHECK_THROWS_AS(parse_annotation("{"), ParseError);
  CHECK_THROWS_AS(parse_annotation("[]"), ParseError);
  CHECK_THROWS_AS(parse_annotation(R"({"case_id": ""})"), ParseError);
  CHECK_THROWS_AS(parse_annotation(R"({"case_id":"x","measurements_2d":{"Oblique":{}}})"), ParseError);
  CHECK_THROWS_AS(parse_annotation(R"({"case_id":"x","measurements_2d":{"AP":{"neck_mm":-1}}})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_annotation(R"({"case_id":"x","contours_2d":{"AP":{"spacing_mm":[0.2,0.2],"points":[[0,0],[1,0]]}}})"),
      ValidationError);
  CHECK_THROWS_AS(parse_annotation(
                      R"({"case_id":"x","contours_2d":{"AP":{"spacing_mm":[0,0.2],"points":[[0,0],[1,0],[0,1]]}}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_annotation(R"({"case_id":"x","contour_stack_3d":{"slices":[
      {"z_mm":1,"points":[[0,0],[1,0],[0,1]]},{"z_mm":0.5,"points":[[0,0],[1,0],[0,1]]}]}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_annotation(R"({"case_id":"x","vessel":{"parent_seg":[[0,0],[0,1]]}})"), ParseError);
  CHECK_THROWS_AS(parse_annotation(R"({"case_id":"x","device_model":5})"), ParseError);
}

TEST_CASE("2D masks as PGM with sidecar") {
  TempDir d;
  Mask2D m({5, 3}, {0.2, 0.3});
  m.set({4, 2}, true);
  m.set({0, 1}, true);
  const auto p = d.path / "m.pgm";
  write_mask2d(p, m);
  CHECK(fs::exists(sidecar_path(p)));
  CHECK(sidecar_path(p).filename() == "m.json");
  CHECK(read_mask2d(p) == m);

  // Any nonzero byte is foreground.
  const std::string body = std::string("P5\n# comment\n2 1\n255\n") + char(0) + char(17);
  write_text(d.path / "x.pgm", body);
  write_text(d.path / "x.json", R"({"spacing_mm":[1,1]})");
  const auto x = read_mask2d(d.path / "x.pgm");
  CHECK_FALSE(x.at({0, 0}));
  CHECK(x.at({1, 0}));

  write_text(d.path / "y.pgm", std::string("P5 2 1 255\n") + char(0));
  write_text(d.path / "y.json", R"({"spacing_mm":[1,1]})");
  CHECK_THROWS_AS(read_mask2d(d.path / "y.pgm"), ParseError);
  write_text(d.path / "z.pgm", std::string("P2 1 1 255\n0"));
  write_text(d.path / "z.json", R"({"spacing_mm":[1,1]})");
  CHECK_THROWS_AS(read_mask2d(d.path / "z.pgm"), ParseError);
  write_text(d.path / "w.pgm", std::string("P5 1 1 255\n") + char(1));
  CHECK_THROWS_AS(read_mask2d(d.path / "w.pgm"), ParseError);  // no sidecar
}

TEST_CASE("3D masks and images as raw bytes with sidecar") {
  TempDir d;
  Mask3D m({4, 3, 2}, {0.25, 0.25, 0.5});
  m.set({3, 2, 1}, true);
  m.set({1, 0, 0}, true);
  write_mask3d(d.path / "m.raw", m);
  CHECK(read_mask3d(d.path / "m.raw") == m);

  GrayImage3D img{{2, 2, 2}, {1, 1, 2}, {0, 10, 20, 30, 40, 50, 60, 255}};
  write_image3d(d.path / "i.raw", img);
  CHECK(read_image3d(d.path / "i.raw") == img);
  GrayImage2D img2{{3, 1}, {0.5, 0.5}, {7, 8, 9}};
  write_image2d(d.path / "i.pgm", img2);
  CHECK(read_image2d(d.path / "i.pgm") == img2);

  write_text(d.path / "bad.raw", std::string(5, '\1'));
  write_text(d.path / "bad.json", R"({"dims":[2,2,2],"spacing_mm":[1,1,1]})");
  CHECK_THROWS_AS(read_mask3d(d.path / "bad.raw"), ParseError);
  write_text(d.path / "bad.json", R"({"dims":[2,2],"spacing_mm":[1,1,1]})");
  CHECK_THROWS_AS(read_mask3d(d.path / "bad.raw"), ParseError);
}

TEST_CASE("segmentation manifest resolves relative paths") {
  TempDir d;
  fs::create_directories(d.path / "img");
  write_text(d.path / "img" / "a.raw", "x");
  write_text(d.path / "img" / "a_gt.raw", "x");
  SegManifest m;
  m.cases.push_back({"a", "img/a.raw", "img/a_gt.raw", std::nullopt, "fold-0"});
  write_manifest(d.path / "manifest.json", m);

  const auto back = read_manifest(d.path / "manifest.json");
  REQUIRE(back.cases.size() == 1);
  CHECK(back.cases[0] == m.cases[0]);
  CHECK(fs::equivalent(back.resolve(back.cases[0].image), d.path / "img" / "a.raw"));

  m.cases[0].mask_pred = "img/missing.raw";
  write_manifest(d.path / "manifest.json", m);
  CHECK_THROWS_AS(read_manifest(d.path / "manifest.json"), ConfigError);
  write_text(d.path / "manifest.json", R"({"cases":[{"case_id":"a","image":"img/a.raw"}]})");
  CHECK_THROWS_AS(read_manifest(d.path / "manifest.json"), ParseError);
}

TEST_CASE("device catalog") {
  TempDir d;
  DeviceCatalog c;
  c.expanded_volume_cm3 = {{"WEB 7x5", 0.12}, {"WEB 9x6", 0.25}};
  write_device_catalog(d.path / "d.json", c);
  const auto back = read_device_catalog(d.path / "d.json");
  CHECK(back.expanded_volume_cm3 == c.expanded_volume_cm3);
  CHECK(back.volume_of("WEB 9x6") == 0.25);
  CHECK_FALSE(back.volume_of("WEB 1x1"));

  write_text(d.path / "e.json", R"({"devices":[{"model":"a","expanded_volume_cm3":0}]})");
  CHECK_THROWS_AS(read_device_catalog(d.path / "e.json"), ValidationError);
  write_text(d.path / "e.json",
             R"({"devices":[{"model":"a","expanded_volume_cm3":1},{"model":"a","expanded_volume_cm3":2}]})");
  CHECK_THROWS_AS(read_device_catalog(d.path / "e.json"), ValidationError);
  write_text(d.path / "e.json", R"({"devices":[{"model":"a"}]})");
  CHECK_THROWS_AS(read_device_catalog(d.path / "e.json"), ParseError);
}
