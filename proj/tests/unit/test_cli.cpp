#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "aok/io.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("aok_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int code;
  std::string out, err;
};

Run cli(const TempDir& t, const std::string& args) {
  const fs::path o = t.path / "stdout.txt", e = t.path / "stderr.txt";
  const std::string cmd = std::string("'") + AOK_CLI_BINARY + "' " + args + " >'" + o.string() + "' 2>'" + e.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, aok::io::read_text(o), aok::io::read_text(e)};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write_spec(const fs::path& p) {
  aok::io::write_text(p, R"({"n_co": 20, "n_po": 15, "seed": 4, "missing_rate": 0.1,
                            "effect_sizes": {"sac_lobulation": 2.5, "neck_mm": 1.5}})");
}

}  // namespace

TEST_CASE("synth, then every analysis command on the written dataset") {
  TempDir t;
  write_spec(t.path / "spec.json");
  const fs::path data = t.path / "data";
  auto r = cli(t, "synth --spec " + q(t.path / "spec.json") + " --out " + q(data));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  REQUIRE(fs::exists(data / "run.json"));
  const std::string cfg = " --config " + q(data / "run.json");

  r = cli(t, "ingest" + cfg);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("cases: 35 (Complete Occlusion 20, Partial Occlusion 15)") != std::string::npos);
  const auto ingest = json::parse(aok::io::read_text(data / "out" / "ingest.json"));
  CHECK(ingest.at("cases") == 35);

  r = cli(t, "geom" + cfg);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto geom = aok::io::read_text(data / "out" / "geometry.csv");
  CHECK(std::count(geom.begin(), geom.end(), '\n') == 36);

  r = cli(t, "select" + cfg);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto sel = json::parse(aok::io::read_text(data / "out" / "selection.json"));
  CHECK(sel.is_object());

  const std::string eval = "eval" + cfg + " --folds 5 --repetitions 2 --sets A,D";
  r = cli(t, eval);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string first = aok::io::read_text(data / "out" / "eval.json");
  const auto doc = json::parse(first);
  CHECK(doc.at("cv").at("k") == 5);
  CHECK(doc.at("sets").size() == 2);
  CHECK(doc.at("ttest").at("A").contains("D"));

  // Same seed, same bytes.
  r = cli(t, eval);
  REQUIRE(r.code == 0);
  CHECK(aok::io::read_text(data / "out" / "eval.json") == first);
  r = cli(t, eval + " --seed 99");
  REQUIRE(r.code == 0);
  CHECK(aok::io::read_text(data / "out" / "eval.json") != first);
}

TEST_CASE("bad inputs exit with status 2") {
  TempDir t;
  CHECK(cli(t, "").code == 2);
  CHECK(cli(t, "frobnicate").code == 2);
  CHECK(cli(t, "ingest --config " + q(t.path / "missing.json")).code == 2);

  aok::io::write_text(t.path / "bad.json", "{\"cohort\": ");
  auto r = cli(t, "ingest --config " + q(t.path / "bad.json"));
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);

  aok::io::write_text(t.path / "nocohort.json", R"({"cohort": "nowhere.csv"})");
  CHECK(cli(t, "ingest --config " + q(t.path / "nocohort.json")).code == 2);

  write_spec(t.path / "spec.json");
  REQUIRE(cli(t, "synth --spec " + q(t.path / "spec.json") + " --out " + q(t.path / "d")).code == 0);
  CHECK(cli(t, "eval --config " + q(t.path / "d" / "run.json") + " --sets A,Q").code == 2);
  CHECK(cli(t, "eval --config " + q(t.path / "d" / "run.json") + " --learner Oracle").code == 2);

  // A cohort row with an out-of-vocabulary label is a validation error.
  auto csv = aok::io::read_text(t.path / "d" / "cohort.csv");
  const auto pos = csv.find("Complete Occlusion");
  REQUIRE(pos != std::string::npos);
  csv.replace(pos, 18, "Mostly Occluded");
  aok::io::write_text(t.path / "d" / "cohort.csv", csv);
  r = cli(t, "ingest --config " + q(t.path / "d" / "run.json"));
  CHECK(r.code == 2);
}

TEST_CASE("dice of a mask against itself is 1") {
  TempDir t;
  write_spec(t.path / "spec.json");
  REQUIRE(cli(t, "synth --spec " + q(t.path / "spec.json") + " --out " + q(t.path / "d") + " --seg2d 6 --seg3d 3").code ==
          0);
  for (const char* task : {"seg2d", "seg3d"}) {
    const fs::path dir = t.path / "d" / task;
    auto m = aok::io::read_manifest(dir / "manifest.json");
    for (auto& c : m.cases) c.mask_pred = c.mask_gt;
    aok::io::write_manifest(dir / "self.json", m);
    const auto r = cli(t, "dice --manifest " + q(dir / "self.json"));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto doc = json::parse(aok::io::read_text(dir / "out" / "dice.json"));
    CHECK(doc.at("summary").at("mean").get<double>() == 1.0);
    CHECK(doc.at("cases").size() == m.cases.size());
  }
  // Without predictions there is nothing to score.
  CHECK(cli(t, "dice --manifest " + q(t.path / "d" / "seg2d" / "manifest.json")).code == 2);
}
