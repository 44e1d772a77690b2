#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "midctl/data.hpp"
#include "midctl/mlp.hpp"
#include "midctl/scg.hpp"

namespace midctl::evidence {

// Data term of a posterior (error, gradient, Hessian approximation). The
// evidence loop adds the weight-decay prior itself, so it works for any
// model that can supply these three.
struct PosteriorTerms {
  std::function<double(const Eigen::VectorXd&)> error;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

struct Safeguards {
  double alpha_floor = 1e-8;
  double alpha_cap = 1e8;
  double prune_threshold = 1e-12;  // group sum of w^2 below this -> alpha_cap
};

struct Reestimate {
  mlp::HyperParameters hp;
  Eigen::VectorXd gamma;  // well-determined parameters per group
};

// gamma_j = |group j| - alpha_j * trace_j((H + diag(alpha))^-1)
Eigen::VectorXd effective_parameters(const mlp::HyperParameters& hp,
                                     const Eigen::MatrixXd& hessian);

// MacKay update alpha_j = gamma_j / sum_{i in j} w_i^2, with the safeguards.
Reestimate reestimate(const Eigen::VectorXd& w_map, const mlp::HyperParameters& hp,
                      const Eigen::MatrixXd& hessian, const Safeguards& guard = {});

struct EvidenceOptions {
  int cycles = 5;
  bool reestimate = true;
  scg::ScgConfig scg{};
  Safeguards safeguards{};
  std::uint64_t seed = 0;  // weight initialization
  std::optional<Eigen::VectorXd> initial_weights;
};

struct CycleRecord {
  int cycle = 0;
  Eigen::VectorXd alpha;      // used for this cycle's MAP fit
  Eigen::VectorXd gamma;      // at this cycle's w_map
  Eigen::VectorXd alpha_new;  // after re-estimation (== alpha when disabled)
  double beta = 1.0;
  double objective = 0.0;
  int scg_iterations = 0;
  bool scg_converged = false;
};

struct Optimization {
  Eigen::VectorXd w;
  mlp::HyperParameters hp;
  Eigen::VectorXd gamma;
  Eigen::MatrixXd hessian;  // data term at w
  std::vector<CycleRecord> trace;
};

// Alternates MAP inference of w (SCG) with hyperparameter re-estimation.
// With re-estimation disabled the objective never changes, so only one MAP
// fit is run whatever `cycles` says.
Optimization optimize_evidence(const PosteriorTerms& terms, mlp::HyperParameters hp,
                               const Eigen::VectorXd& w0, const EvidenceOptions& opts);

// Gaussian approximation around w_map, ready for prediction.
class EvidenceModel {
 public:
  EvidenceModel(mlp::Architecture arch, mlp::WeightVector w_map, mlp::HyperParameters hp,
                Eigen::MatrixXd hessian, Eigen::VectorXd gamma,
                data::NormalizationSpec normalization, bool moderated = true);

  const mlp::Architecture& architecture() const { return arch_; }
  const mlp::WeightVector& w_map() const { return w_map_; }
  const mlp::HyperParameters& hyperparameters() const { return hp_; }
  const Eigen::MatrixXd& hessian() const { return hessian_; }
  const Eigen::VectorXd& gamma() const { return gamma_; }
  const data::NormalizationSpec& normalization() const { return normalization_; }
  bool moderated() const { return moderated_; }

  // Uses the moderated output when enabled (and the output is logistic).
  double predict(std::span<const double> x) const;
  double predict_plain(std::span<const double> x) const;
  double predict_moderated(std::span<const double> x) const;
  // Variance of the output pre-activation under the Gaussian posterior.
  double activation_variance(std::span<const double> x) const;

 private:
  mlp::Architecture arch_;
  mlp::WeightVector w_map_;
  mlp::HyperParameters hp_;
  Eigen::MatrixXd hessian_;
  Eigen::VectorXd gamma_;
  data::NormalizationSpec normalization_;
  bool moderated_;
  Eigen::MatrixXd covariance_;  // (H + diag(alpha))^-1
};

// logistic(a / sqrt(1 + pi s^2 / 8))
double moderate(double activation, double variance);

struct TrainResult {
  EvidenceModel model;
  std::vector<CycleRecord> trace;
};

PosteriorTerms mlp_terms(const mlp::Architecture& arch, double beta,
                         const data::Patterns& patterns);

TrainResult train_evidence(const data::Patterns& patterns, const mlp::Architecture& arch,
                           const mlp::HyperParameters& init_hp, const EvidenceOptions& opts,
                           const data::NormalizationSpec& normalization =
                               data::NormalizationSpec::theoretical_defaults());

}  // namespace midctl::evidence
