// One-hidden-layer perceptron: sigmoid hidden units, sigmoid output read as
// P(CO), log-loss, per-sample SGD with momentum in a seeded shuffled order.

#include <algorithm>
#include <numeric>
#include <random>

#include "internal.hpp"

namespace aok::learners {

namespace {

struct Forward {
  std::vector<double> h;
  double z_out = 0.0;
};

Forward forward(const MlpParams& p, const std::vector<double>& x) {
  Forward f;
  f.h.resize(static_cast<std::size_t>(p.hidden));
  const auto in = static_cast<std::size_t>(p.inputs);
  f.z_out = p.b2;
  for (std::size_t k = 0; k < f.h.size(); ++k) {
    double z = p.b1[k];
    for (std::size_t j = 0; j < in; ++j) z += p.w1[k * in + j] * x[j];
    f.h[k] = sigmoid(z);
    f.z_out += p.w2[k] * f.h[k];
  }
  return f;
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Adds the gradient of one sample's log-loss, times `scale`, into `g`.
double accumulate(const MlpParams& p, const std::vector<double>& x, double y, double scale, std::vector<double>& g) {
  const Forward f = forward(p, x);
  const auto in = static_cast<std::size_t>(p.inputs);
  const auto hid = static_cast<std::size_t>(p.hidden);
  const double delta = sigmoid(f.z_out) - y;
  const std::size_t off_b1 = hid * in, off_w2 = off_b1 + hid, off_b2 = off_w2 + hid;
  for (std::size_t k = 0; k < hid; ++k) {
    const double dh = delta * p.w2[k] * f.h[k] * (1.0 - f.h[k]);
    for (std::size_t j = 0; j < in; ++j) g[k * in + j] += scale * dh * x[j];
    g[off_b1 + k] += scale * dh;
    g[off_w2 + k] += scale * delta * f.h[k];
  }
  g[off_b2] += scale * delta;
  return softplus(f.z_out) - y * f.z_out;
}

std::size_t param_count(const MlpParams& p) {
  const auto in = static_cast<std::size_t>(p.inputs), hid = static_cast<std::size_t>(p.hidden);
  return hid * in + hid + hid + 1;
}

void apply_step(MlpParams& p, const std::vector<double>& delta) {
  const auto in = static_cast<std::size_t>(p.inputs), hid = static_cast<std::size_t>(p.hidden);
  std::size_t i = 0;
  for (std::size_t k = 0; k < hid * in; ++k) p.w1[k] += delta[i++];
  for (std::size_t k = 0; k < hid; ++k) p.b1[k] += delta[i++];
  for (std::size_t k = 0; k < hid; ++k) p.w2[k] += delta[i++];
  p.b2 += delta[i];
}

}  // namespace

MlpLoss mlp_loss(const MlpParams& params, std::span<const std::vector<double>> inputs,
                 std::span<const OcclusionLabel> labels) {
  if (inputs.size() != labels.size() || inputs.empty()) throw ValidationError("mlp_loss: inputs and labels differ");
  MlpLoss out;
  out.gradient.assign(param_count(params), 0.0);
  const double scale = 1.0 / static_cast<double>(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    out.loss += scale * accumulate(params, inputs[i], target_co(labels[i]), scale, out.gradient);
  return out;
}

TrainedModel train_mlp(const FeatureMatrix& matrix, const MlpConfig& cfg) {
  if (matrix.count(OcclusionLabel::CompleteOcclusion) == 0 || matrix.count(OcclusionLabel::PartialOcclusion) == 0)
    throw ValidationError("train_mlp: training data has a single class");
  if (cfg.hidden < 1 || cfg.epochs < 0 || !(cfg.lr > 0.0)) throw ValidationError("train_mlp: invalid configuration");

  MlpParams p;
  p.standardizer = Standardizer::fit(matrix);
  p.inputs = static_cast<int>(matrix.cols());
  p.hidden = cfg.hidden;
  const auto in = static_cast<std::size_t>(p.inputs), hid = static_cast<std::size_t>(p.hidden);

  std::mt19937_64 rng(cfg.seed);
  const double r1 = std::sqrt(6.0 / static_cast<double>(in + hid));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hid + 1));
  std::uniform_real_distribution<double> u1(-r1, r1), u2(-r2, r2);
  p.w1.resize(hid * in);
  for (auto& w : p.w1) w = u1(rng);
  p.b1.assign(hid, 0.0);
  p.w2.resize(hid);
  for (auto& w : p.w2) w = u2(rng);

  std::vector<std::vector<double>> rows(matrix.rows());
  {
    std::vector<Cell> row(matrix.cols());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      for (std::size_t c = 0; c < matrix.cols(); ++c) row[c] = matrix.cell(r, c);
      rows[r] = p.standardizer.transform(row);
    }
  }

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(param_count(p)), velocity(param_count(p), 0.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      std::fill(grad.begin(), grad.end(), 0.0);
      accumulate(p, rows[i], target_co(matrix.labels()[i]), 1.0, grad);
      for (std::size_t k = 0; k < grad.size(); ++k) velocity[k] = cfg.momentum * velocity[k] - cfg.lr * grad[k];
      apply_step(p, velocity);
    }
  }
  return TrainedModel(LearnerKind::MLP, matrix.columns(), std::move(p));
}

double mlp_score(const MlpParams& p, std::span<const Cell> row) {
  return sigmoid(forward(p, p.standardizer.transform(row)).z_out);
}

}  // namespace aok::learners
