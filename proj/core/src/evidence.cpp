#include "midctl/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "midctl/error.hpp"

namespace midctl::evidence {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd posterior_covariance(const MatrixXd& hessian, const VectorXd& alpha_per_weight) {
  MatrixXd a = hessian;
  a.diagonal() += alpha_per_weight;
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical,
                "H + diag(alpha) is not positive definite; raise the alpha floor");
  }
  return llt.solve(MatrixXd::Identity(a.rows(), a.cols()));
}

double logistic(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

}  // namespace

VectorXd effective_parameters(const mlp::HyperParameters& hp, const MatrixXd& hessian) {
  if (!hessian.allFinite()) {
    throw Error(ErrorCode::kNumerical, "Hessian has non-finite entries");
  }
  const MatrixXd cov = posterior_covariance(hessian, hp.per_weight_alpha(hessian.rows()));
  VectorXd gamma(static_cast<Index>(hp.groups.size()));
  for (std::size_t g = 0; g < hp.groups.size(); ++g) {
    double trace = 0.0;
    for (Index i : hp.groups[g].indices) trace += cov(i, i);
    const double size = static_cast<double>(hp.groups[g].indices.size());
    gamma(static_cast<Index>(g)) = std::clamp(size - hp.alpha(static_cast<Index>(g)) * trace, 0.0, size);
  }
  return gamma;
}

Reestimate reestimate(const VectorXd& w_map, const mlp::HyperParameters& hp,
                      const MatrixXd& hessian, const Safeguards& guard) {
  hp.validate(w_map.size());
  Reestimate out{hp, effective_parameters(hp, hessian)};
  for (std::size_t g = 0; g < hp.groups.size(); ++g) {
    double w2 = 0.0;
    for (Index i : hp.groups[g].indices) w2 += w_map(i) * w_map(i);
    const Index j = static_cast<Index>(g);
    if (w2 < guard.prune_threshold) {
      out.hp.alpha(j) = guard.alpha_cap;
    } else {
      out.hp.alpha(j) = std::clamp(out.gamma(j) / w2, guard.alpha_floor, guard.alpha_cap);
    }
  }
  return out;
}

Optimization optimize_evidence(const PosteriorTerms& terms, mlp::HyperParameters hp,
                               const VectorXd& w0, const EvidenceOptions& opts) {
  if (opts.cycles < 1) throw Error(ErrorCode::kConfig, "evidence cycles must be >= 1");
  hp.validate(w0.size());

  Optimization out;
  out.w = w0;
  const int cycles = opts.reestimate ? opts.cycles : 1;
  for (int c = 1; c <= cycles; ++c) {
    const VectorXd alpha_w = hp.per_weight_alpha(w0.size());
    auto objective = [&](const VectorXd& w) {
      return terms.error(w) + 0.5 * (alpha_w.array() * w.array().square()).sum();
    };
    auto grad = [&](const VectorXd& w) -> VectorXd {
      return terms.gradient(w) + (alpha_w.array() * w.array()).matrix();
    };
    const scg::Result fit = scg::minimize(objective, grad, out.w, opts.scg);
    out.w = fit.w;
    out.hessian = terms.hessian(out.w);

    CycleRecord rec;
    rec.cycle = c;
    rec.alpha = hp.alpha;
    rec.beta = hp.beta;
    rec.objective = fit.objective;
    rec.scg_iterations = static_cast<int>(fit.trace.size());
    rec.scg_converged = fit.converged();
    if (opts.reestimate) {
      Reestimate next = reestimate(out.w, hp, out.hessian, opts.safeguards);
      rec.gamma = next.gamma;
      hp = std::move(next.hp);
    } else {
      rec.gamma = effective_parameters(hp, out.hessian);
    }
    rec.alpha_new = hp.alpha;
    out.trace.push_back(std::move(rec));
  }
  out.hp = hp;
  out.gamma = effective_parameters(hp, out.hessian);
  return out;
}

double moderate(double activation, double variance) {
  const double kappa = 1.0 / std::sqrt(1.0 + std::numbers::pi * variance / 8.0);
  return logistic(kappa * activation);
}

EvidenceModel::EvidenceModel(mlp::Architecture arch, mlp::WeightVector w_map,
                             mlp::HyperParameters hp, MatrixXd hessian, VectorXd gamma,
                             data::NormalizationSpec normalization, bool moderated)
    : arch_(std::move(arch)),
      w_map_(std::move(w_map)),
      hp_(std::move(hp)),
      hessian_(std::move(hessian)),
      gamma_(std::move(gamma)),
      normalization_(normalization),
      moderated_(moderated) {
  arch_.validate();
  if (w_map_.size() != arch_.num_weights() || hessian_.rows() != w_map_.size() ||
      hessian_.cols() != w_map_.size()) {
    throw Error(ErrorCode::kDimension, "evidence model dimensions are inconsistent");
  }
  hp_.validate(w_map_.size());
  covariance_ = posterior_covariance(hessian_, hp_.per_weight_alpha(w_map_.size()));
}

double EvidenceModel::predict_plain(std::span<const double> x) const {
  return mlp::predict(arch_, w_map_, x);
}

double EvidenceModel::activation_variance(std::span<const double> x) const {
  const VectorXd g = mlp::output_preactivation_gradient(arch_, w_map_, x);
  return std::max(0.0, g.dot(covariance_ * g));
}

double EvidenceModel::predict_moderated(std::span<const double> x) const {
  if (arch_.outer != mlp::Activation::kLogistic) return predict_plain(x);
  return moderate(mlp::output_preactivation(arch_, w_map_, x), activation_variance(x));
}

double EvidenceModel::predict(std::span<const double> x) const {
  return moderated_ ? predict_moderated(x) : predict_plain(x);
}

PosteriorTerms mlp_terms(const mlp::Architecture& arch, double beta,
                         const data::Patterns& patterns) {
  return {
      [=, &patterns](const VectorXd& w) { return mlp::data_error(arch, w, beta, patterns); },
      [=, &patterns](const VectorXd& w) { return mlp::data_gradient(arch, w, beta, patterns); },
      [=, &patterns](const VectorXd& w) { return mlp::data_hessian(arch, w, beta, patterns); },
  };
}

TrainResult train_evidence(const data::Patterns& patterns, const mlp::Architecture& arch,
                           const mlp::HyperParameters& init_hp, const EvidenceOptions& opts,
                           const data::NormalizationSpec& normalization) {
  arch.validate();
  const VectorXd w0 =
      opts.initial_weights ? *opts.initial_weights : mlp::initialize_weights(arch, opts.seed);
  if (w0.size() != arch.num_weights()) {
    throw Error(ErrorCode::kDimension, "initial weight vector does not match architecture");
  }
  Optimization opt = optimize_evidence(mlp_terms(arch, init_hp.beta, patterns), init_hp, w0, opts);
  EvidenceModel model(arch, std::move(opt.w), std::move(opt.hp), std::move(opt.hessian),
                      std::move(opt.gamma), normalization);
  return {std::move(model), std::move(opt.trace)};
}

}  // namespace midctl::evidence
