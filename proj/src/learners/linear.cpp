// Logistic regression and linear SVM on imputed, standardized features.

#include <Eigen/Dense>
#include <algorithm>
#include <map>

#include "internal.hpp"

namespace aok::learners {

Standardizer Standardizer::fit(const FeatureMatrix& matrix) {
  Standardizer s;
  const std::size_t d = matrix.cols();
  s.fill.assign(d, 0.0);
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = matrix.column(j);
    std::size_t known = 0;
    if (matrix.columns()[j].kind == ColumnKind::Categorical) {
      std::map<double, std::size_t> freq;
      for (const auto& c : col)
        if (c) ++freq[*c], ++known;
      std::size_t best = 0;
      for (const auto& [v, f] : freq)
        if (f > best) best = f, s.fill[j] = v;  // ties keep the smallest value
    } else {
      double sum = 0.0;
      for (const auto& c : col)
        if (c) sum += *c, ++known;
      if (known) s.fill[j] = sum / static_cast<double>(known);
    }
    double sum = 0.0;
    for (const auto& c : col) sum += c.value_or(s.fill[j]);
    const double n = static_cast<double>(col.size());
    s.mean[j] = n > 0 ? sum / n : 0.0;
    double sq = 0.0;
    for (const auto& c : col) {
      const double dv = c.value_or(s.fill[j]) - s.mean[j];
      sq += dv * dv;
    }
    const double sd = n > 0 ? std::sqrt(sq / n) : 0.0;
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::transform(std::span<const Cell> row) const {
  std::vector<double> z(mean.size());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = (row[j].value_or(fill[j]) - mean[j]) / scale[j];
  return z;
}

namespace {

std::vector<std::vector<double>> standardized_rows(const FeatureMatrix& m, const Standardizer& s) {
  std::vector<std::vector<double>> rows(m.rows());
  std::vector<Cell> row(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] = m.cell(r, c);
    rows[r] = s.transform(row);
  }
  return rows;
}

double dot(const std::vector<double>& w, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

}  // namespace

// Newton-Raphson on the ridge-penalized log-likelihood; the intercept is not
// penalized. A backtracking step keeps every iteration an ascent step, which
// matters on (nearly) separable data.
TrainedModel train_logistic(const FeatureMatrix& matrix, const LogisticConfig& cfg) {
  if (matrix.count(OcclusionLabel::CompleteOcclusion) == 0 || matrix.count(OcclusionLabel::PartialOcclusion) == 0)
    throw ValidationError("train_logistic: training data has a single class");
  LinearParams p;
  p.standardizer = Standardizer::fit(matrix);
  const auto rows = standardized_rows(matrix, p.standardizer);
  const auto n = static_cast<Eigen::Index>(matrix.rows());
  const auto d = static_cast<Eigen::Index>(matrix.cols());

  Eigen::MatrixXd X(n, d + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) X(i, j + 1) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    y(i) = target_co(matrix.labels()[static_cast<std::size_t>(i)]);
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, cfg.ridge);
  penalty(0) = 0.0;

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + e^z) computed without overflow
      const double zi = z(i);
      const double softplus = zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
      ll += y(i) * zi - softplus;
    }
    return ll - 0.5 * beta.cwiseProduct(penalty).dot(beta);
  };

  const double n_co = y.sum();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  beta(0) = std::log(n_co / (static_cast<double>(n) - n_co));
  double f = objective(beta);
  bool converged = false;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const Eigen::VectorXd z = X * beta;
    Eigen::VectorXd prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(z(i));
      w(i) = prob(i) * (1.0 - prob(i));
    }
    const Eigen::VectorXd grad = X.transpose() * (y - prob) - penalty.cwiseProduct(beta);
    if (grad.norm() < cfg.grad_tol) {
      converged = true;
      break;
    }
    Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    H.diagonal() += penalty;
    H.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    double t = 1.0;
    bool moved = false;
    while (t > 1e-10) {
      const Eigen::VectorXd cand = beta + t * step;
      const double fc = objective(cand);
      if (fc >= f) {
        moved = fc > f || (cand - beta).norm() > 0.0;
        beta = cand;
        f = fc;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  if (!converged) {
    const Eigen::VectorXd z = X * beta;
    Eigen::VectorXd prob(n);
    for (Eigen::Index i = 0; i < n; ++i) prob(i) = sigmoid(z(i));
    converged = (X.transpose() * (y - prob) - penalty.cwiseProduct(beta)).norm() < cfg.grad_tol;
  }

  p.bias = beta(0);
  p.weights.assign(beta.data() + 1, beta.data() + 1 + d);
  return TrainedModel(LearnerKind::Logistic, matrix.columns(), std::move(p), converged);
}

double logistic_score(const LinearParams& p, std::span<const Cell> row) {
  return sigmoid(p.bias + dot(p.weights, p.standardizer.transform(row)));
}

namespace {

// Platt scaling with the target smoothing and Newton/backtracking scheme of
// Lin, Lin & Weng (2007). Returns (A, B) for P(CO) = 1 / (1 + exp(A f + B)).
std::pair<double, double> platt(const std::vector<double>& f, const std::vector<double>& y) {
  double prior1 = 0, prior0 = 0;
  for (double v : y) (v > 0 ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = y[i] > 0 ? hi : lo;

  auto value = [&](double A, double B) {
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * A + B;
      v += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return v;
  };
  double A = 0.0, B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = value(A, B);
  for (int it = 0; it < 100; ++it) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * A + B;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    while (step >= 1e-10) {
      const double nA = A + step * dA, nB = B + step * dB;
      const double nf = value(nA, nB);
      if (nf < fval + 1e-4 * step * gd) {
        A = nA, B = nB, fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  return {A, B};
}

}  // namespace

// Hinge loss + L2 by per-sample subgradient steps in fixed row order
// (Pegasos schedule, lambda = 1/(C n)). The iterate with the lowest primal
// objective at an epoch boundary is kept.
TrainedModel train_svm(const FeatureMatrix& matrix, const SvmConfig& cfg) {
  if (matrix.count(OcclusionLabel::CompleteOcclusion) == 0 || matrix.count(OcclusionLabel::PartialOcclusion) == 0)
    throw ValidationError("train_svm: training data has a single class");
  if (!(cfg.C > 0.0)) throw ValidationError("train_svm: C must be > 0");
  LinearParams p;
  p.standardizer = Standardizer::fit(matrix);
  const auto rows = standardized_rows(matrix, p.standardizer);
  const std::size_t n = rows.size(), d = matrix.cols();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = target_co(matrix.labels()[i]) > 0 ? 1.0 : -1.0;

  const double lambda = 1.0 / (cfg.C * static_cast<double>(n));
  auto primal = [&](const std::vector<double>& w, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += std::max(0.0, 1.0 - y[i] * (dot(w, rows[i]) + b));
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return 0.5 * reg + cfg.C * loss;
  };

  std::vector<double> w(d, 0.0), best_w = w;
  double b = 0.0, best_b = 0.0;
  double best = primal(w, b);
  const double t0 = static_cast<double>(n);
  std::size_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i, ++t) {
      const double eta = 1.0 / (lambda * (static_cast<double>(t) + t0));
      const double margin = y[i] * (dot(w, rows[i]) + b);
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * y[i] * rows[i][j];
        b += eta * y[i];
      }
    }
    const double obj = primal(w, b);
    if (obj < best) best = obj, best_w = w, best_b = b;
  }
  p.weights = best_w;
  p.bias = best_b;

  std::vector<double> margins(n);
  for (std::size_t i = 0; i < n; ++i) margins[i] = dot(p.weights, rows[i]) + p.bias;
  std::tie(p.platt_a, p.platt_b) = platt(margins, y);
  return TrainedModel(LearnerKind::LinearSVM, matrix.columns(), std::move(p));
}

double svm_score(const LinearParams& p, std::span<const Cell> row) {
  const double f = p.bias + dot(p.weights, p.standardizer.transform(row));
  return sigmoid(-(p.platt_a * f + p.platt_b));
}

}  // namespace aok::learners
