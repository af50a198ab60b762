#include "aok/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

#include "aok/features.hpp"
#include "aok/io.hpp"
#include "aok/synthgen.hpp"
#include "csv.hpp"
#include "evaluation/report_json.hpp"
#include "json.hpp"

namespace aok::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  cv.seed = s;
  learner = learner.with_seed(s);
  selection.greedy_config.cv.seed = s;
  selection.greedy_config.forest.seed = s;
}

std::vector<FeatureSetId> parse_sets(std::string_view text) {
  std::vector<FeatureSetId> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view token = text.substr(start, comma - start);
    auto id = enum_from_string<FeatureSetId>(token);
    if (!id) throw ConfigError("unknown feature set '" + std::string(token) + "' (expected letters A-G)");
    if (std::find(out.begin(), out.end(), *id) != out.end())
      throw ConfigError("feature set '" + std::string(token) + "' listed twice");
    out.push_back(*id);
    start = comma + 1;
  }
  return out;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ParseError(where + ": unknown key '" + key + "'");
}

learners::LearnerConfig parse_learner(const json& j) {
  check_keys(j, "learner", {"kind", "forest", "logistic", "svm", "mlp"});
  learners::LearnerConfig c;
  if (j.contains("kind")) {
    auto k = learners::learner_from_string(j.at("kind").get<std::string>());
    if (!k) throw ConfigError("learner.kind: unknown learner '" + j.at("kind").get<std::string>() + "'");
    c.kind = *k;
  }
  if (j.contains("forest")) {
    const json& f = j.at("forest");
    check_keys(f, "learner.forest", {"n_trees", "features_per_split", "min_leaf", "max_depth", "bootstrap", "threads"});
    c.forest.n_trees = f.value("n_trees", c.forest.n_trees);
    c.forest.min_leaf = f.value("min_leaf", c.forest.min_leaf);
    if (f.contains("max_depth")) c.forest.max_depth = f.at("max_depth").get<int>();
    c.forest.bootstrap = f.value("bootstrap", c.forest.bootstrap);
    c.forest.threads = f.value("threads", c.forest.threads);
    if (f.contains("features_per_split")) {
      const json& v = f.at("features_per_split");
      if (v.is_number_integer()) {
        c.forest.features_per_split = learners::FeaturesPerSplit::Fixed;
        c.forest.fixed_k = v.get<int>();
      } else if (v == "sqrt") {
        c.forest.features_per_split = learners::FeaturesPerSplit::Sqrt;
      } else if (v == "all") {
        c.forest.features_per_split = learners::FeaturesPerSplit::All;
      } else {
        throw ConfigError("learner.forest.features_per_split: expected \"sqrt\", \"all\" or an integer");
      }
    }
  }
  if (j.contains("logistic")) {
    const json& l = j.at("logistic");
    check_keys(l, "learner.logistic", {"ridge", "max_iter", "grad_tol"});
    c.logistic.ridge = l.value("ridge", c.logistic.ridge);
    c.logistic.max_iter = l.value("max_iter", c.logistic.max_iter);
    c.logistic.grad_tol = l.value("grad_tol", c.logistic.grad_tol);
  }
  if (j.contains("svm")) {
    const json& s = j.at("svm");
    check_keys(s, "learner.svm", {"C", "epochs"});
    c.svm.C = s.value("C", c.svm.C);
    c.svm.epochs = s.value("epochs", c.svm.epochs);
  }
  if (j.contains("mlp")) {
    const json& m = j.at("mlp");
    check_keys(m, "learner.mlp", {"hidden", "epochs", "lr", "momentum"});
    c.mlp.hidden = m.value("hidden", c.mlp.hidden);
    c.mlp.epochs = m.value("epochs", c.mlp.epochs);
    c.mlp.lr = m.value("lr", c.mlp.lr);
    c.mlp.momentum = m.value("momentum", c.mlp.momentum);
  }
  return c;
}

fs::path existing(const fs::path& base, const json& doc, const char* key) {
  const fs::path p = base / doc.at(key).get<std::string>();
  if (!fs::exists(p)) throw ConfigError(std::string("config key '") + key + "': path does not exist: " + p.string());
  return p;
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file does not exist: " + path.string());
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  RunConfig cfg;
  try {
    const json doc = json::parse(io::read_text(path));
    check_keys(doc, "run config",
               {"cohort", "annotations", "masks", "devices", "out", "seed", "selection", "selected", "learner", "cv",
                "sets", "pairing"});
    if (!doc.contains("cohort")) throw ConfigError("config key 'cohort' is required");
    cfg.cohort = existing(base, doc, "cohort");
    if (doc.contains("annotations")) cfg.annotations = existing(base, doc, "annotations");
    if (doc.contains("masks")) cfg.masks = existing(base, doc, "masks");
    if (doc.contains("devices")) cfg.devices = existing(base, doc, "devices");
    cfg.out = base / doc.value("out", std::string("out"));

    if (doc.contains("selection")) {
      const json& s = doc.at("selection");
      check_keys(s, "selection", {"min_ratio", "min_diff", "ig_threshold", "greedy", "epsilon"});
      cfg.selection.prevalence.min_ratio = s.value("min_ratio", cfg.selection.prevalence.min_ratio);
      cfg.selection.prevalence.min_diff = s.value("min_diff", cfg.selection.prevalence.min_diff);
      cfg.selection.ig_threshold = s.value("ig_threshold", cfg.selection.ig_threshold);
      cfg.selection.greedy = s.value("greedy", cfg.selection.greedy);
      cfg.selection.greedy_config.epsilon = s.value("epsilon", cfg.selection.greedy_config.epsilon);
    }
    if (doc.contains("selected")) {
      const json& s = doc.at("selected");
      check_keys(s, "selected", {"clinical", "imaging"});
      features::FeatureSelectionLists lists;
      lists.clinical = s.value("clinical", std::vector<std::string>{});
      lists.imaging = s.value("imaging", std::vector<std::string>{});
      cfg.selected = lists;
    }
    if (doc.contains("learner")) cfg.learner = parse_learner(doc.at("learner"));
    if (doc.contains("cv")) {
      const json& c = doc.at("cv");
      check_keys(c, "cv", {"k", "repetitions", "stratified"});
      cfg.cv.k = c.value("k", cfg.cv.k);
      cfg.cv.repetitions = c.value("repetitions", cfg.cv.repetitions);
      cfg.cv.stratified = c.value("stratified", cfg.cv.stratified);
      if (cfg.cv.k < 2 || cfg.cv.repetitions < 1) throw ConfigError("cv: need k >= 2 and repetitions >= 1");
    }
    if (doc.contains("sets")) {
      std::string joined;
      for (const auto& s : doc.at("sets")) joined += (joined.empty() ? "" : ",") + s.get<std::string>();
      cfg.sets = parse_sets(joined);
    }
    cfg.pairing = doc.value("pairing", cfg.pairing);
    if (cfg.pairing != "repetition" && cfg.pairing != "fold")
      throw ConfigError("config key 'pairing': expected \"repetition\" or \"fold\"");
    cfg.selection.greedy_config.cv = cfg.cv;
    cfg.selection.greedy_config.cv.repetitions = 1;
    cfg.selection.greedy_config.forest = cfg.learner.forest;
    cfg.apply_seed(doc.value("seed", cfg.seed));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return cfg;
}

namespace {

struct Loaded {
  features::Dataset data;
  std::vector<std::string> warnings;
};

Loaded load_dataset(const RunConfig& cfg) {
  Loaded l;
  l.data.cohort = io::read_cohort(cfg.cohort);
  const auto violations = validate_cohort(l.data.cohort, ConditionVocabulary::builtin());
  if (!violations.empty()) {
    std::string msg = cfg.cohort.string() + ": " + std::to_string(violations.size()) + " invalid field(s)";
    for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 10); ++i)
      msg += "\n  " + violations[i].field + ": " + violations[i].message;
    throw ValidationError(msg);
  }
  if (cfg.annotations) l.data.annotations = io::read_annotation_dir(*cfg.annotations);
  std::optional<io::DeviceCatalog> devices;
  if (cfg.devices) devices = io::read_device_catalog(*cfg.devices);

  std::set<std::string> ids;
  for (const auto& e : l.data.cohort) ids.insert(e.record.case_id);
  for (const auto& [id, _] : l.data.annotations)
    if (!ids.contains(id)) l.warnings.push_back("annotation for unknown case '" + id + "' ignored");

  for (const auto& e : l.data.cohort) {
    const auto& id = e.record.case_id;
    auto it = l.data.annotations.find(id);
    features::CaseMasks masks;
    if (cfg.masks) masks = features::load_case_masks(*cfg.masks, id);
    auto g = features::compute_case_geometry(it == l.data.annotations.end() ? nullptr : &it->second, masks,
                                             devices ? &*devices : nullptr);
    for (const auto& w : g.warnings) l.warnings.push_back(id + ": " + w);
    l.data.geometry.emplace(id, std::move(g));
  }
  return l;
}

void write_json(const fs::path& path, const json& doc) { io::write_text(path, doc.dump(2) + "\n"); }

std::string fmt(std::optional<double> v) {
  if (!v) return "";
  std::ostringstream s;
  s.precision(10);
  s << *v;
  return s.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  const Loaded l = load_dataset(cfg);
  const FeatureMatrix m = features::full_matrix(l.data).matrix;
  json missing = json::object();
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const auto col = m.column(j);
    const auto n_missing = static_cast<std::size_t>(std::count(col.begin(), col.end(), std::nullopt));
    missing[m.columns()[j].name] = m.rows() ? static_cast<double>(n_missing) / static_cast<double>(m.rows()) : 0.0;
  }
  const std::size_t n_co = m.count(OcclusionLabel::CompleteOcclusion), n_po = m.count(OcclusionLabel::PartialOcclusion);
  json doc = {{"cases", m.rows()},
              {"complete_occlusion", n_co},
              {"partial_occlusion", n_po},
              {"annotated", l.data.annotations.size()},
              {"missingness", missing},
              {"warnings", l.warnings}};
  write_json(cfg.out / "ingest.json", doc);
  out << "cases: " << m.rows() << " (Complete Occlusion " << n_co << ", Partial Occlusion " << n_po << ")\n"
      << "annotated cases: " << l.data.annotations.size() << "\n"
      << "feature columns: " << m.cols() << "\n";
  std::size_t with_missing = 0;
  for (const auto& [_, v] : missing.items()) with_missing += v.get<double>() > 0.0;
  out << "columns with missing values: " << with_missing << "\n";
  if (!l.warnings.empty()) out << "warnings: " << l.warnings.size() << " (see ingest.json)\n";
  out << "wrote " << (cfg.out / "ingest.json").string() << "\n";
  return 0;
}

int cmd_geom(const RunConfig& cfg, std::ostream& out) {
  const Loaded l = load_dataset(cfg);
  std::string text = csv::join({"case_id",          "area_ap_mm2",     "area_lat_mm2",    "area_ap_auto_mm2",
                                "area_lat_auto_mm2", "left_angle_deg", "right_angle_deg", "norm_left_angle",
                                "norm_right_angle", "volume_cm3",      "surface_cm2",     "nsi",
                                "ipr",              "volume_auto_cm3", "surface_auto_cm2", "nsi_auto",
                                "ipr_auto",         "device_volume_cm3", "device_gap_cm3", "warnings"}) +
                     "\n";
  for (const auto& [id, g] : l.data.geometry) {
    auto shape = [](const std::optional<geometry::ShapeMetrics3D>& s, double geometry::ShapeMetrics3D::*f) {
      return s ? std::optional<double>(*s.*f) : std::nullopt;
    };
    std::optional<double> gap;
    if (g.shape && g.device_volume_cm3) gap = geometry::device_gap(g.shape->volume_cm3, *g.device_volume_cm3);
    std::string warnings;
    for (const auto& w : g.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    using S = geometry::ShapeMetrics3D;
    text += csv::join({id,
                       fmt(g.area_ap_mm2),
                       fmt(g.area_lat_mm2),
                       fmt(g.area_ap_auto_mm2),
                       fmt(g.area_lat_auto_mm2),
                       fmt(g.angles ? std::optional(g.angles->left_angle_deg) : std::nullopt),
                       fmt(g.angles ? std::optional(g.angles->right_angle_deg) : std::nullopt),
                       fmt(g.angles ? std::optional(g.angles->normalized_left) : std::nullopt),
                       fmt(g.angles ? std::optional(g.angles->normalized_right) : std::nullopt),
                       fmt(shape(g.shape, &S::volume_cm3)),
                       fmt(shape(g.shape, &S::surface_cm2)),
                       fmt(shape(g.shape, &S::nsi)),
                       fmt(shape(g.shape, &S::ipr)),
                       fmt(shape(g.shape_auto, &S::volume_cm3)),
                       fmt(shape(g.shape_auto, &S::surface_cm2)),
                       fmt(shape(g.shape_auto, &S::nsi)),
                       fmt(shape(g.shape_auto, &S::ipr)),
                       fmt(g.device_volume_cm3),
                       fmt(gap),
                       warnings}) +
            "\n";
  }
  io::write_text(cfg.out / "geometry.csv", text);
  out << "geometry for " << l.data.geometry.size() << " cases -> " << (cfg.out / "geometry.csv").string() << "\n";
  return 0;
}

json selection_json(const selection::PipelineResult& r) {
  json rows = json::array();
  for (const auto& p : r.prevalence.rows)
    rows.push_back({{"condition", p.condition},
                    {"count_co", p.count_co},
                    {"count_po", p.count_po},
                    {"ratio_co", p.ratio_co},
                    {"ratio_po", p.ratio_po},
                    {"abs_diff", p.abs_diff},
                    {"kept_stage1", p.kept_stage1},
                    {"kept_stage2", p.kept_stage2}});
  auto ranking = [](const selection::Ranking& rk) {
    json a = json::array();
    for (const auto& f : rk.all)
      a.push_back({{"name", f.name},
                   {"gain", f.gain},
                   {"kept", std::find(rk.kept.begin(), rk.kept.end(), f.name) != rk.kept.end()}});
    return a;
  };
  json doc = {{"prevalence", {{"n_co", r.prevalence.n_co}, {"n_po", r.prevalence.n_po}, {"conditions", rows},
                              {"kept", r.prevalence.kept()}}},
              {"information_gain", {{"clinical", ranking(r.clinical)}, {"imaging", ranking(r.imaging)}}},
              {"selected", {{"clinical", r.lists.clinical}, {"imaging", r.lists.imaging}}}};
  if (r.greedy) {
    json trace = json::array();
    for (const auto& s : r.greedy->trace)
      trace.push_back({{"iteration", s.iteration},
                       {"candidate", s.candidate},
                       {"weighted_f1", s.weighted_f1},
                       {"accepted", s.accepted}});
    doc["greedy"] = {{"base_score", r.greedy->base_score},
                     {"final_score", r.greedy->final_score},
                     {"features", r.greedy->features},
                     {"trace", trace}};
  }
  return doc;
}

int cmd_select(const RunConfig& cfg, std::ostream& out) {
  const Loaded l = load_dataset(cfg);
  const auto r = selection::select_features(l.data, cfg.selection);
  write_json(cfg.out / "selection.json", selection_json(r));
  out << "conditions kept: ";
  const auto kept = r.prevalence.kept();
  for (std::size_t i = 0; i < kept.size(); ++i) out << (i ? ", " : "") << kept[i];
  out << (kept.empty() ? "(none)" : "") << "\n"
      << "clinical selected: " << r.lists.clinical.size() << ", imaging selected: " << r.lists.imaging.size() << "\n"
      << "wrote " << (cfg.out / "selection.json").string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const Loaded l = load_dataset(cfg);
  features::FeatureSelectionLists lists;
  json selection_doc;
  if (cfg.selected) {
    lists = *cfg.selected;
    selection_doc = {{"selected", {{"clinical", lists.clinical}, {"imaging", lists.imaging}}}, {"source", "config"}};
  } else {
    const auto r = selection::select_features(l.data, cfg.selection);
    lists = r.lists;
    selection_doc = selection_json(r);
  }

  std::map<FeatureSetId, evaluation::MetricBlock> blocks;
  std::map<FeatureSetId, std::vector<double>> paired;
  json sets = json::object();
  for (FeatureSetId id : cfg.sets) {
    const auto built = features::build_matrix(l.data, id, lists);
    if (built.matrix.cols() == 0)
      throw ValidationError("feature set " + std::string(to_string(id)) + " has no columns with the selected lists");
    const auto cv = evaluation::cross_validate(built.matrix, cfg.learner, cfg.cv);
    blocks[id] = cv.pooled;
    paired[id] = cfg.pairing == "fold" ? cv.fold_wf1 : cv.repetition_wf1;
    json reps = json::array();
    for (const auto& b : cv.per_repetition) reps.push_back(evaluation::to_json(b));
    sets[std::string(to_string(id))] = {{"columns", built.matrix.column_names()},
                                        {"pooled", evaluation::to_json(cv.pooled)},
                                        {"repetition_weighted_f1", cv.repetition_wf1},
                                        {"fold_weighted_f1", cv.fold_wf1}};
  }

  // Upper triangle in the requested order.
  json ttests = json::object();
  std::string matrix_text;
  const bool can_test = !cfg.sets.empty() && paired.begin()->second.size() >= 2;
  if (can_test) {
    matrix_text = "Paired t-test p-values (" + cfg.pairing + " weighted F1, row minus column)\n";
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header = {""};
    for (FeatureSetId id : cfg.sets) header.emplace_back(to_string(id));
    cells.push_back(header);
    for (FeatureSetId a : cfg.sets) {
      std::vector<std::string> row = {std::string(to_string(a))};
      for (FeatureSetId b : cfg.sets) {
        if (a == b) {
          row.emplace_back("-");
          continue;
        }
        const auto t = evaluation::paired_ttest(paired[a], paired[b]);
        ttests[std::string(to_string(a))][std::string(to_string(b))] = evaluation::to_json(t);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", t.p);
        row.emplace_back(buf);
      }
      cells.push_back(row);
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& r : cells)
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    for (const auto& r : cells) {
      for (std::size_t c = 0; c < r.size(); ++c)
        matrix_text += r[c] + (c + 1 < r.size() ? std::string(width[c] - r[c].size() + 2, ' ') : "");
      matrix_text += "\n";
    }
  } else {
    matrix_text = "Paired t-tests skipped: fewer than two paired values per set.\n";
  }

  const std::string table = evaluation::format_table(blocks);
  json doc = {{"learner", std::string(learners::to_string(cfg.learner.kind))},
              {"cv", {{"k", cfg.cv.k}, {"repetitions", cfg.cv.repetitions}, {"seed", cfg.cv.seed},
                      {"stratified", cfg.cv.stratified}}},
              {"pairing", cfg.pairing},
              {"selection", selection_doc},
              {"sets", sets},
              {"ttest", ttests}};
  write_json(cfg.out / "eval.json", doc);
  io::write_text(cfg.out / "eval.txt", table + "\n" + matrix_text);
  out << table << "\n" << matrix_text << "wrote " << (cfg.out / "eval.json").string() << "\n";
  return 0;
}

int cmd_dice(const fs::path& manifest_path, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  const auto manifest = io::read_manifest(manifest_path);
  json cases = json::array();
  std::vector<double> scores;
  std::map<std::string, std::vector<double>> by_split;
  for (const auto& c : manifest.cases) {
    if (!c.mask_pred) {
      err << "warning: case '" << c.case_id << "' has no mask_pred, skipped\n";
      continue;
    }
    const fs::path gt = manifest.resolve(c.mask_gt), pred = manifest.resolve(*c.mask_pred);
    const bool two_d = gt.extension() == ".pgm";
    const double d = two_d ? evaluation::dice(io::read_mask2d(gt), io::read_mask2d(pred))
                           : evaluation::dice(io::read_mask3d(gt), io::read_mask3d(pred));
    scores.push_back(d);
    by_split[c.split].push_back(d);
    cases.push_back({{"case_id", c.case_id}, {"split", c.split}, {"dice", d}});
  }
  if (scores.empty()) throw ValidationError(manifest_path.string() + ": no case has a mask_pred to evaluate");
  const auto summary = evaluation::dice_summary(scores);
  json splits = json::object();
  for (const auto& [split, v] : by_split) splits[split] = evaluation::to_json(evaluation::dice_summary(v));
  write_json(out_dir / "dice.json", {{"cases", cases}, {"summary", evaluation::to_json(summary)}, {"by_split", splits}});
  char buf[128];
  std::snprintf(buf, sizeof buf, "Dice over %zu cases: %.3f +/- %.3f (95%% CI %.3f - %.3f)\n", scores.size(),
                summary.mean, summary.sd, summary.ci_low, summary.ci_high);
  out << buf << "wrote " << (out_dir / "dice.json").string() << "\n";
  return 0;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir, std::optional<std::uint64_t> seed, std::size_t seg2d,
              std::size_t seg3d, std::ostream& out) {
  auto spec = synthgen::parse_cohort_spec(io::read_text(spec_path));
  if (seed) spec.seed = *seed;
  const auto data = synthgen::gen_cohort(spec);
  synthgen::write_dataset(out_dir, data, spec);
  out << "cohort: " << spec.n_co << " CO / " << spec.n_po << " PO -> " << out_dir.string() << "\n";
  if (seg2d) {
    synthgen::SegCorpusSpec s{.task = synthgen::SegTask::Seg2D, .n_cases = seg2d, .seed = spec.seed};
    synthgen::gen_seg_corpus(out_dir / "seg2d", s);
    out << "2D segmentation corpus: " << seg2d << " cases -> " << (out_dir / "seg2d").string() << "\n";
  }
  if (seg3d) {
    synthgen::SegCorpusSpec s{.task = synthgen::SegTask::Seg3D, .n_cases = seg3d, .size = 32, .seed = spec.seed};
    synthgen::gen_seg_corpus(out_dir / "seg3d", s);
    out << "3D segmentation corpus: " << seg3d << " cases -> " << (out_dir / "seg3d").string() << "\n";
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aneurysm occlusion toolkit: geometry, feature selection and outcome-model evaluation"};
  app.require_subcommand(1);

  std::string config, sets, learner, manifest, spec, out_flag, pairing;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds, repetitions;
  std::size_t seg2d = 0, seg3d = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run.json")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override every seed");
    sub->add_option("--out", out_flag, "output directory (overrides the config)");
  };
  auto* ingest = app.add_subcommand("ingest", "validate inputs and summarize the dataset");
  auto* geom = app.add_subcommand("geom", "per-case geometry as CSV");
  auto* select = app.add_subcommand("select", "feature selection report");
  auto* eval = app.add_subcommand("eval", "cross-validated metrics per feature set");
  for (auto* s : {ingest, geom, select, eval}) add_common(s);
  eval->add_option("--sets", sets, "comma-separated feature sets, e.g. A,B,C,D");
  eval->add_option("--learner", learner, "RandomForest, NaiveBayes, Logistic, LinearSVM or MLP");
  eval->add_option("--folds", folds, "cross-validation folds");
  eval->add_option("--repetitions", repetitions, "cross-validation repetitions");
  eval->add_option("--pairing", pairing, "t-test pairing: repetition or fold");

  auto* dice = app.add_subcommand("dice", "Dice of predicted against ground-truth masks");
  dice->add_option("--manifest", manifest, "segmentation manifest")->required()->check(CLI::ExistingFile);
  dice->add_option("--out", out_flag, "output directory (default: <manifest dir>/out)");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  synth->add_option("--spec", spec, "cohort spec JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out_flag, "output directory")->required();
  synth->add_option("--seed", seed, "override the cohort spec seed");
  synth->add_option("--seg2d", seg2d, "also write a 2D segmentation corpus with this many cases");
  synth->add_option("--seg3d", seg3d, "also write a 3D segmentation corpus with this many cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*dice) {
      const fs::path m(manifest);
      const fs::path dir = out_flag.empty() ? (m.has_parent_path() ? m.parent_path() : fs::path(".")) / "out" : fs::path(out_flag);
      return cmd_dice(m, dir, out, err);
    }
    if (*synth) return cmd_synth(spec, out_flag, seed, seg2d, seg3d, out);

    RunConfig cfg = load_run_config(config);
    if (seed) cfg.apply_seed(*seed);
    if (!out_flag.empty()) cfg.out = out_flag;
    if (*eval) {
      if (!sets.empty()) cfg.sets = parse_sets(sets);
      if (!learner.empty()) {
        auto k = learners::learner_from_string(learner);
        if (!k) throw ConfigError("--learner: unknown learner '" + learner + "'");
        cfg.learner.kind = *k;
      }
      if (folds) cfg.cv.k = *folds;
      if (repetitions) cfg.cv.repetitions = *repetitions;
      if (!pairing.empty()) {
        if (pairing != "repetition" && pairing != "fold") throw ConfigError("--pairing: expected repetition or fold");
        cfg.pairing = pairing;
      }
      return cmd_eval(cfg, out);
    }
    if (*ingest) return cmd_ingest(cfg, out);
    if (*geom) return cmd_geom(cfg, out);
    if (*select) return cmd_select(cfg, out);
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace aok::cli
