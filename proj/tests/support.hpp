#pragma once

// Independent reference implementations used as test oracles, plus
// hand-rolled random generators for property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "midctl/data.hpp"
#include "midctl/mlp.hpp"

namespace midctl::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double ref_activation(mlp::Activation f, double a) {
  switch (f) {
    case mlp::Activation::kLinear: return a;
    case mlp::Activation::kLogistic: return 1.0 / (1.0 + std::exp(-a));
    case mlp::Activation::kTanh: return std::tanh(a);
    case mlp::Activation::kSoftmax: return a;  // handled by the caller
  }
  return a;
}

// Scalar loop evaluation of the two-layer network, indexing the weight vector
// directly: w[i*M + j] first layer, w[d*M + j] hidden bias, w[(d+1)*M + k*M + j]
// second layer, w[(d+1)*M + K*M + k] output bias.
inline std::vector<double> ref_forward(const mlp::Architecture& a, const VectorXd& w,
                                       const std::vector<double>& x,
                                       std::vector<double>* pre_out = nullptr) {
  const int d = a.inputs, m = a.hidden, k = a.outputs;
  std::vector<double> z(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    double s = w[d * m + j];
    for (int i = 0; i < d; ++i) s += w[i * m + j] * x[static_cast<std::size_t>(i)];
    z[static_cast<std::size_t>(j)] = s;
  }
  auto squash = [](mlp::Activation f, std::vector<double>& v) {
    if (f == mlp::Activation::kSoftmax) {
      double top = *std::max_element(v.begin(), v.end());
      double total = 0.0;
      for (auto& e : v) total += (e = std::exp(e - top));
      for (auto& e : v) e /= total;
    } else {
      for (auto& e : v) e = ref_activation(f, e);
    }
  };
  squash(a.inner, z);
  std::vector<double> y(static_cast<std::size_t>(k));
  for (int o = 0; o < k; ++o) {
    double s = w[(d + 1) * m + k * m + o];
    for (int j = 0; j < m; ++j) s += w[(d + 1) * m + o * m + j] * z[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(o)] = s;
  }
  if (pre_out) *pre_out = y;
  squash(a.outer, y);
  return y;
}

inline std::vector<double> row(const MatrixXd& x, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) v[static_cast<std::size_t>(c)] = x(r, c);
  return v;
}

// Per-pattern cross-entropy plus weight decay, written as a plain loop.
inline double ref_cost(const mlp::Architecture& a, const VectorXd& w, const VectorXd& alpha,
                       double beta, const data::Patterns& p) {
  double e = 0.0;
  for (Eigen::Index n = 0; n < p.size(); ++n) {
    const double y = ref_forward(a, w, row(p.inputs, n))[0];
    const double t = p.targets(n);
    e -= t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
  }
  double prior = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) prior += 0.5 * alpha(i) * w(i) * w(i);
  return beta * e + prior;
}

inline VectorXd central_difference(const std::function<double(const VectorXd&)>& f,
                                   const VectorXd& w, double h = 1e-6) {
  VectorXd g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    VectorXd wp = w, wm = w;
    wp(i) += h;
    wm(i) -= h;
    g(i) = (f(wp) - f(wm)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

inline data::Patterns random_patterns(std::mt19937_64& rng, Eigen::Index n, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  data::Patterns p;
  p.inputs.resize(n, d);
  p.targets.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) p.inputs(r, c) = u(rng);
    p.targets(r) = u(rng) < 0.5 ? 0.0 : 1.0;
  }
  return p;
}

// Logistic output with any hidden activation, moderate sizes.
inline mlp::Architecture random_architecture(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(1, 7), m(1, 8), f(0, 3);
  mlp::Architecture a;
  a.inputs = d(rng);
  a.hidden = m(rng);
  a.inner = static_cast<mlp::Activation>(f(rng));
  a.outer = mlp::Activation::kLogistic;
  return a;
}

inline VectorXd random_weights(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXd w(n);
  for (auto& v : w) v = g(rng);
  return w;
}

// Mann-Whitney statistic by exhaustive pair counting, ties counted as 1/2.
inline double pair_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double concordant = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) concordant += 1.0;
      else if (s[i] == s[j]) concordant += 0.5;
    }
  }
  return concordant / pairs;
}

// Bayesian linear regression y = Phi w + noise (precision beta), prior
// w ~ N(0, alpha^-1 I). Its log evidence has a closed form.
struct LinearToy {
  MatrixXd phi;
  VectorXd y;
  double beta = 1.0;

  static LinearToy make(std::uint64_t seed, int n = 60, int k = 4, double beta = 25.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    LinearToy t;
    t.beta = beta;
    t.phi.resize(n, k);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < k; ++c) t.phi(r, c) = g(rng);
    VectorXd w(k);
    for (auto& v : w) v = 0.7 * g(rng);
    t.y = t.phi * w;
    for (auto& v : t.y) v += g(rng) / std::sqrt(beta);
    return t;
  }

  double error(const VectorXd& w) const { return 0.5 * beta * (y - phi * w).squaredNorm(); }

  double log_evidence(double alpha) const {
    const auto n = static_cast<double>(phi.rows());
    const auto k = phi.cols();
    const MatrixXd A = beta * phi.transpose() * phi + alpha * MatrixXd::Identity(k, k);
    const Eigen::LLT<MatrixXd> llt(A);
    const VectorXd w_mp = llt.solve(beta * phi.transpose() * y);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    const double m = error(w_mp) + 0.5 * alpha * w_mp.squaredNorm();
    return 0.5 * static_cast<double>(k) * std::log(alpha) + 0.5 * n * std::log(beta) - m -
           0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
  }

  // Fine log-spaced grid search.
  double best_alpha_by_grid(double lo = 1e-4, double hi = 1e4, int points = 20001) const {
    double best = lo, best_v = -1e300;
    for (int i = 0; i < points; ++i) {
      const double a = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
      const double v = log_evidence(a);
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  }
};

}  // namespace midctl::testing
