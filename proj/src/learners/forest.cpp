#include <atomic>
#include <mutex>
#include <random>
#include <thread>

#include "internal.hpp"

namespace aok::learners {

namespace {

bool votes_co(const std::array<double, 2>& dist) { return dist[0] >= dist[1]; }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrainedModel train_forest(const FeatureMatrix& matrix, const ForestConfig& cfg) {
  if (cfg.n_trees < 1) throw ValidationError("n_trees must be >= 1");
  if (cfg.min_leaf < 1) throw ValidationError("min_leaf must be >= 1");
  require_two_per_class(matrix, "train_forest");

  const std::size_t n = matrix.rows();
  const auto n_trees = static_cast<std::size_t>(cfg.n_trees);
  std::vector<Tree> trees(n_trees);
  std::vector<std::vector<double>> in_bag(n_trees);

  std::vector<std::size_t> all_rows(n);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;

  auto build_one = [&](std::size_t t) {
    const std::uint64_t seed = derive_seed(cfg.seed, t);
    std::vector<double> weights(n, 1.0);
    if (cfg.bootstrap) {
      std::mt19937_64 rng(derive_seed(seed, 0xB007));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) weights[pick(rng)] += 1.0;
    }
    trees[t] = grow_tree(matrix, all_rows, weights, cfg, seed);
    in_bag[t] = std::move(weights);
  };

  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_trees)));
  if (workers == 1) {
    for (std::size_t t = 0; t < n_trees; ++t) build_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < n_trees; t = next++) {
          try {
            build_one(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  ForestParams params;
  if (cfg.bootstrap) {
    std::size_t scored = 0, correct = 0;
    std::vector<Cell> row(matrix.cols());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < matrix.cols(); ++c) row[c] = matrix.cell(r, c);
      std::size_t votes = 0, co = 0;
      for (std::size_t t = 0; t < n_trees; ++t) {
        if (in_bag[t][r] > 0.0) continue;
        ++votes;
        co += votes_co(trees[t].distribution(row)) ? 1 : 0;
      }
      if (votes == 0) continue;
      ++scored;
      const bool pred_co = 2 * co >= votes;
      correct += pred_co == (matrix.labels()[r] == OcclusionLabel::CompleteOcclusion) ? 1 : 0;
    }
    if (scored > 0) params.oob_accuracy = static_cast<double>(correct) / static_cast<double>(scored);
  }
  params.trees = std::move(trees);
  return TrainedModel(LearnerKind::RandomForest, matrix.columns(), std::move(params));
}

double forest_score(const ForestParams& p, std::span<const Cell> row) {
  if (p.trees.empty()) return 0.5;
  std::size_t co = 0;
  for (const auto& t : p.trees) co += votes_co(t.distribution(row)) ? 1 : 0;
  return static_cast<double>(co) / static_cast<double>(p.trees.size());
}

}  // namespace aok::learners
