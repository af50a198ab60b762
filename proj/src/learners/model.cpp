#include <algorithm>
#include <array>

#include "internal.hpp"
#include "aok/io.hpp"
#include "json.hpp"

namespace aok::learners {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, 5> kKindNames = {"RandomForest", "NaiveBayes", "Logistic", "LinearSVM", "MLP"};
constexpr int kFormatVersion = 1;
}  // namespace

std::string_view to_string(LearnerKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<LearnerKind> learner_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == text) return static_cast<LearnerKind>(i);
  return std::nullopt;
}

LearnerConfig LearnerConfig::with_seed(std::uint64_t seed) const {
  LearnerConfig c = *this;
  c.forest.seed = seed;
  c.mlp.seed = seed;
  return c;
}

TrainedModel::TrainedModel(LearnerKind kind, std::vector<ColumnInfo> schema, Params params, bool converged)
    : kind_(kind), schema_(std::move(schema)), params_(std::move(params)), converged_(converged) {}

double TrainedModel::score_row(std::span<const Cell> row) const {
  if (row.size() != schema_.size()) throw ValidationError("row width does not match the model schema");
  double s = 0.5;
  switch (kind_) {
    case LearnerKind::RandomForest: s = forest_score(std::get<ForestParams>(params_), row); break;
    case LearnerKind::NaiveBayes: s = naive_bayes_score(std::get<NaiveBayesParams>(params_), row); break;
    case LearnerKind::Logistic: s = logistic_score(std::get<LinearParams>(params_), row); break;
    case LearnerKind::LinearSVM: s = svm_score(std::get<LinearParams>(params_), row); break;
    case LearnerKind::MLP: s = mlp_score(std::get<MlpParams>(params_), row); break;
  }
  return std::clamp(s, 0.0, 1.0);
}

std::vector<Prediction> TrainedModel::predict(const FeatureMatrix& matrix) const {
  if (matrix.cols() != schema_.size())
    throw ValidationError("schema mismatch: model has " + std::to_string(schema_.size()) + " columns, matrix has " +
                          std::to_string(matrix.cols()));
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    const auto& a = schema_[j];
    const auto& b = matrix.columns()[j];
    if (a.name != b.name || a.kind != b.kind)
      throw ValidationError("schema mismatch at column " + std::to_string(j) + ": model '" + a.name + "', matrix '" +
                            b.name + "'");
  }
  std::vector<Prediction> out;
  out.reserve(matrix.rows());
  std::vector<Cell> row(matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) row[c] = matrix.cell(r, c);
    const double s = score_row(row);
    out.push_back({s >= 0.5 ? OcclusionLabel::CompleteOcclusion : OcclusionLabel::PartialOcclusion, s});
  }
  return out;
}

TrainedModel train(const FeatureMatrix& matrix, const LearnerConfig& cfg) {
  switch (cfg.kind) {
    case LearnerKind::RandomForest: return train_forest(matrix, cfg.forest);
    case LearnerKind::NaiveBayes: return train_naive_bayes(matrix);
    case LearnerKind::Logistic: return train_logistic(matrix, cfg.logistic);
    case LearnerKind::LinearSVM: return train_svm(matrix, cfg.svm);
    case LearnerKind::MLP: return train_mlp(matrix, cfg.mlp);
  }
  throw Error("unknown learner kind");
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json standardizer_json(const Standardizer& s) { return {{"fill", s.fill}, {"mean", s.mean}, {"scale", s.scale}}; }

Standardizer standardizer_from(const json& j) {
  Standardizer s;
  s.fill = j.at("fill").get<std::vector<double>>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  return s;
}

json params_json(const TrainedModel::Params& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ForestParams>) {
          json trees = json::array();
          for (const auto& t : p.trees) {
            json nodes = json::array();
            for (const auto& n : t.nodes) {
              if (n.feature < 0) {
                nodes.push_back({{"counts", n.counts}});
              } else {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left_fraction", n.left_fraction},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"counts", n.counts}});
              }
            }
            trees.push_back({{"nodes", nodes}});
          }
          json j = {{"trees", trees}};
          if (p.oob_accuracy) j["oob_accuracy"] = *p.oob_accuracy;
          return j;
        } else if constexpr (std::is_same_v<T, NaiveBayesParams>) {
          json cols = json::array();
          for (const auto& c : p.columns) {
            json jc = {{"kind", std::string(aok::to_string(c.kind))}, {"known", c.known}};
            if (c.kind == ColumnKind::Numeric) {
              jc["mean"] = c.mean;
              jc["var"] = c.var;
            } else {
              jc["levels"] = c.levels;
              jc["counts"] = c.counts;
            }
            cols.push_back(jc);
          }
          return {{"prior", p.prior}, {"columns", cols}};
        } else if constexpr (std::is_same_v<T, LinearParams>) {
          return {{"standardizer", standardizer_json(p.standardizer)},
                  {"weights", p.weights},
                  {"bias", p.bias},
                  {"platt_a", p.platt_a},
                  {"platt_b", p.platt_b}};
        } else {
          return {{"standardizer", standardizer_json(p.standardizer)},
                  {"inputs", p.inputs},
                  {"hidden", p.hidden},
                  {"w1", p.w1},
                  {"b1", p.b1},
                  {"w2", p.w2},
                  {"b2", p.b2}};
        }
      },
      params);
}

TrainedModel::Params params_from(LearnerKind kind, const json& j) {
  switch (kind) {
    case LearnerKind::RandomForest: {
      ForestParams p;
      for (const auto& jt : j.at("trees")) {
        Tree t;
        for (const auto& jn : jt.at("nodes")) {
          TreeNode n;
          n.counts = jn.at("counts").get<std::array<double, 2>>();
          if (jn.contains("feature")) {
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left_fraction = jn.at("left_fraction").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
          }
          t.nodes.push_back(n);
        }
        const int size = static_cast<int>(t.nodes.size());
        for (const auto& n : t.nodes)
          if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
            throw ParseError("model: tree node child index out of range");
        p.trees.push_back(std::move(t));
      }
      if (j.contains("oob_accuracy")) p.oob_accuracy = j.at("oob_accuracy").get<double>();
      return p;
    }
    case LearnerKind::NaiveBayes: {
      NaiveBayesParams p;
      p.prior = j.at("prior").get<std::array<double, 2>>();
      for (const auto& jc : j.at("columns")) {
        NaiveBayesColumn c;
        auto kind_name = enum_from_string<ColumnKind>(jc.at("kind").get<std::string>());
        if (!kind_name) throw ParseError("model: unknown column kind");
        c.kind = *kind_name;
        c.known = jc.at("known").get<std::array<double, 2>>();
        if (c.kind == ColumnKind::Numeric) {
          c.mean = jc.at("mean").get<std::array<double, 2>>();
          c.var = jc.at("var").get<std::array<double, 2>>();
        } else {
          c.levels = jc.at("levels").get<std::vector<double>>();
          c.counts = jc.at("counts").get<std::vector<std::array<double, 2>>>();
        }
        p.columns.push_back(std::move(c));
      }
      return p;
    }
    case LearnerKind::Logistic:
    case LearnerKind::LinearSVM: {
      LinearParams p;
      p.standardizer = standardizer_from(j.at("standardizer"));
      p.weights = j.at("weights").get<std::vector<double>>();
      p.bias = j.at("bias").get<double>();
      p.platt_a = j.at("platt_a").get<double>();
      p.platt_b = j.at("platt_b").get<double>();
      return p;
    }
    case LearnerKind::MLP: {
      MlpParams p;
      p.standardizer = standardizer_from(j.at("standardizer"));
      p.inputs = j.at("inputs").get<int>();
      p.hidden = j.at("hidden").get<int>();
      p.w1 = j.at("w1").get<std::vector<double>>();
      p.b1 = j.at("b1").get<std::vector<double>>();
      p.w2 = j.at("w2").get<std::vector<double>>();
      p.b2 = j.at("b2").get<double>();
      const auto in = static_cast<std::size_t>(p.inputs), hid = static_cast<std::size_t>(p.hidden);
      if (p.w1.size() != in * hid || p.b1.size() != hid || p.w2.size() != hid)
        throw ParseError("model: MLP weight shapes do not match inputs/hidden");
      return p;
    }
  }
  throw ParseError("model: unknown kind");
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  json schema = json::array();
  for (const auto& c : model.schema())
    schema.push_back({{"name", c.name},
                      {"kind", std::string(aok::to_string(c.kind))},
                      {"provenance", std::string(aok::to_string(c.provenance))},
                      {"source", std::string(aok::to_string(c.source))}});
  json doc = {{"format", "aok-model"},
              {"version", kFormatVersion},
              {"kind", std::string(to_string(model.kind()))},
              {"converged", model.converged()},
              {"schema", schema},
              {"params", params_json(model.params())}};
  return doc.dump() + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != "aok-model") throw ParseError("not an aok model file");
    if (doc.at("version").get<int>() != kFormatVersion)
      throw ParseError("unsupported model version " + doc.at("version").dump());
    auto kind = learner_from_string(doc.at("kind").get<std::string>());
    if (!kind) throw ParseError("unknown learner kind " + doc.at("kind").dump());
    std::vector<ColumnInfo> schema;
    for (const auto& jc : doc.at("schema")) {
      auto k = enum_from_string<ColumnKind>(jc.at("kind").get<std::string>());
      auto p = enum_from_string<Provenance>(jc.at("provenance").get<std::string>());
      auto s = enum_from_string<Source>(jc.at("source").get<std::string>());
      if (!k || !p || !s) throw ParseError("model: bad schema entry");
      schema.push_back({jc.at("name").get<std::string>(), *k, *p, *s});
    }
    auto params = params_from(*kind, doc.at("params"));
    return TrainedModel(*kind, std::move(schema), std::move(params), doc.value("converged", true));
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  io::write_text(path, model_to_json(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return model_from_json(io::read_text(path)); }

}  // namespace aok::learners
