#pragma once
// The `aok` command-line tool: ingest, geom, select, eval, dice, synth.
//
// Exit codes: 0 success, 2 invalid input (parse, validation or config
// errors, bad flags), 1 anything else.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aok/evaluation.hpp"
#include "aok/learners.hpp"
#include "aok/selection.hpp"

namespace aok::cli {

/// run.json. Relative paths resolve against the file's directory.
///
///   {"cohort": "cohort.csv", "annotations": "annotations", "masks": "masks",
///    "devices": "devices.json", "out": "out", "seed": 1,
///    "selection": {"min_ratio": 0.30, "min_diff": 0.10, "ig_threshold": 0.15,
///                  "greedy": false, "epsilon": 0.001},
///    "selected": {"clinical": [...], "imaging": [...]},
///    "learner": {"kind": "RandomForest", "n_trees": 100, ...},
///    "cv": {"k": 10, "repetitions": 10, "stratified": true},
///    "sets": ["A", "B", "C", "D"], "pairing": "repetition"}
///
/// Only "cohort" is required. "seed" feeds the CV folds and every learner.
struct RunConfig {
  std::filesystem::path cohort;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> masks;
  std::optional<std::filesystem::path> devices;
  std::filesystem::path out = "out";
  std::uint64_t seed = 1;
  selection::PipelineConfig selection;
  /// Fixed selected lists; when absent `eval` runs the selection pipeline.
  std::optional<features::FeatureSelectionLists> selected;
  learners::LearnerConfig learner;
  evaluation::CVConfig cv{.k = 10, .seed = 1, .repetitions = 10, .stratified = true};
  std::vector<FeatureSetId> sets = {FeatureSetId::A, FeatureSetId::B, FeatureSetId::C, FeatureSetId::D};
  /// "repetition" pairs pooled weighted F1 per CV repetition; "fold" pairs
  /// per-fold weighted F1 across all repetitions.
  std::string pairing = "repetition";

  /// Propagates `seed` to the CV and learner configurations.
  void apply_seed(std::uint64_t s);
};

/// Throws ConfigError (naming the key and path) when a referenced path does
/// not exist, ParseError on malformed JSON or unknown keys.
RunConfig load_run_config(const std::filesystem::path& path);

/// "A,B,D" -> {A, B, D}; throws ConfigError on unknown letters or repeats.
std::vector<FeatureSetId> parse_sets(std::string_view text);

/// Entry point behind main(); never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aok::cli
