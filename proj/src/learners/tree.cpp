// C4.5-style binary tree on weighted rows.
//
// Rows whose split value is missing travel down both branches, their weight
// split in proportion to the known-value weight on each side; leaves keep the
// weighted class counts. Split quality is information gain in bits, scaled by
// the known-value fraction of the node.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "internal.hpp"
#include "../entropy.hpp"

namespace aok::learners {

namespace {

constexpr double kMinGain = 1e-12;

struct Item {
  std::size_t row;
  double weight;
};

class Grower {
 public:
  Grower(const FeatureMatrix& m, const ForestConfig& cfg, std::uint64_t seed)
      : m_(m), cfg_(cfg), rng_(seed), labels_(m.labels()) {
    const int d = static_cast<int>(m.cols());
    switch (cfg.features_per_split) {
      case FeaturesPerSplit::All: mtry_ = d; break;
      case FeaturesPerSplit::Sqrt: mtry_ = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d))))); break;
      case FeaturesPerSplit::Fixed: mtry_ = std::clamp(cfg.fixed_k, 1, std::max(d, 1)); break;
    }
    features_.resize(static_cast<std::size_t>(d));
    std::iota(features_.begin(), features_.end(), 0);
  }

  Tree grow(std::vector<Item> items) {
    Tree t;
    build(t, std::move(items), 0);
    return t;
  }

 private:
  int cls(std::size_t row) const { return labels_[row] == OcclusionLabel::CompleteOcclusion ? 0 : 1; }

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(features_.size());
    if (mtry_ >= d) return features_;
    std::vector<int> pool = features_;
    for (int i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng_))]);
    }
    pool.resize(static_cast<std::size_t>(mtry_));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  int build(Tree& t, std::vector<Item> items, int depth) {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    std::array<double, 2> counts{};
    for (const auto& it : items) counts[static_cast<std::size_t>(cls(it.row))] += it.weight;
    t.nodes[static_cast<std::size_t>(id)].counts = counts;

    const double total = counts[0] + counts[1];
    const double min_leaf = static_cast<double>(cfg_.min_leaf);
    if (counts[0] <= 0.0 || counts[1] <= 0.0 || total < 2.0 * min_leaf || m_.cols() == 0 ||
        (cfg_.max_depth && depth >= *cfg_.max_depth))
      return id;

    int best_feature = -1;
    double best_gain = kMinGain;
    double best_threshold = 0.0;
    double best_left_fraction = 0.0;

    std::vector<std::pair<double, Item>> known;
    for (int f : candidate_features()) {
      const auto col = m_.column(static_cast<std::size_t>(f));
      known.clear();
      std::array<double, 2> kc{};
      for (const auto& it : items) {
        if (!col[it.row]) continue;
        known.push_back({*col[it.row], it});
        kc[static_cast<std::size_t>(cls(it.row))] += it.weight;
      }
      const double kw = kc[0] + kc[1];
      if (known.size() < 2 || kw < 2.0 * min_leaf) continue;
      std::sort(known.begin(), known.end(), [](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && a.second.row < b.second.row);
      });
      const double h_known = detail::entropy_bits(kc[0], kc[1]);
      std::array<double, 2> lc{};
      for (std::size_t i = 0; i + 1 < known.size(); ++i) {
        lc[static_cast<std::size_t>(cls(known[i].second.row))] += known[i].second.weight;
        if (!(known[i].first < known[i + 1].first)) continue;
        const double lw = lc[0] + lc[1];
        const double rw = kw - lw;
        if (lw < min_leaf || rw < min_leaf) continue;
        const double cond = (lw / kw) * detail::entropy_bits(lc[0], lc[1]) +
                            (rw / kw) * detail::entropy_bits(kc[0] - lc[0], kc[1] - lc[1]);
        const double gain = (kw / total) * (h_known - cond);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          // Cut at the observed value, not the midpoint, so predictions on
          // unseen values survive any increasing transform of the feature.
          best_threshold = known[i].first;
          best_left_fraction = lw / kw;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<Item> left, right;
    const auto col = m_.column(static_cast<std::size_t>(best_feature));
    for (const auto& it : items) {
      const Cell& v = col[it.row];
      if (!v) {
        if (best_left_fraction > 0.0) left.push_back({it.row, it.weight * best_left_fraction});
        if (best_left_fraction < 1.0) right.push_back({it.row, it.weight * (1.0 - best_left_fraction)});
      } else if (*v <= best_threshold) {
        left.push_back(it);
      } else {
        right.push_back(it);
      }
    }
    items.clear();
    items.shrink_to_fit();

    const int l = build(t, std::move(left), depth + 1);
    const int r = build(t, std::move(right), depth + 1);
    auto& node = t.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left_fraction = best_left_fraction;
    node.left = l;
    node.right = r;
    return id;
  }

  const FeatureMatrix& m_;
  const ForestConfig& cfg_;
  std::mt19937_64 rng_;
  const std::vector<OcclusionLabel>& labels_;
  int mtry_ = 1;
  std::vector<int> features_;
};

std::array<double, 2> node_distribution(const Tree& t, int id, std::span<const Cell> row) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
  if (n.feature < 0) {
    const double total = n.counts[0] + n.counts[1];
    if (total <= 0.0) return {0.5, 0.5};
    return {n.counts[0] / total, n.counts[1] / total};
  }
  const Cell& v = row[static_cast<std::size_t>(n.feature)];
  if (v) return node_distribution(t, *v <= n.threshold ? n.left : n.right, row);
  const auto l = node_distribution(t, n.left, row);
  const auto r = node_distribution(t, n.right, row);
  const double f = n.left_fraction;
  return {f * l[0] + (1.0 - f) * r[0], f * l[1] + (1.0 - f) * r[1]};
}

}  // namespace

std::array<double, 2> Tree::distribution(std::span<const Cell> row) const {
  if (nodes.empty()) return {0.5, 0.5};
  return node_distribution(*this, 0, row);
}

Tree grow_tree(const FeatureMatrix& matrix, std::span<const std::size_t> rows, std::span<const double> weights,
               const ForestConfig& cfg, std::uint64_t rng_seed) {
  if (rows.size() != weights.size()) throw ValidationError("grow_tree: rows and weights differ in length");
  if (cfg.min_leaf < 1) throw ValidationError("min_leaf must be >= 1");
  std::vector<Item> items;
  items.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (weights[i] > 0.0) items.push_back({rows[i], weights[i]});
  return Grower(matrix, cfg, rng_seed).grow(std::move(items));
}

}  // namespace aok::learners
