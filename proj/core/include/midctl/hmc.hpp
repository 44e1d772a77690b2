#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "midctl/data.hpp"
#include "midctl/mlp.hpp"

namespace midctl::hmc {

using Energy = std::function<double(const Eigen::VectorXd&)>;
using EnergyGradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct HmcConfig {
  double epsilon0 = 0.011;
  int leapfrog_steps = 100;
  int n_samples = 100;
  int burn_in = 1000;
  int thin = 10;
  std::uint64_t seed = 0;

  void validate() const;
  long total_transitions() const {
    return static_cast<long>(burn_in) + static_cast<long>(n_samples) * thin;
  }
};

struct ChainState {
  Eigen::VectorXd w;
  Eigen::VectorXd p;
  double energy = 0.0;
  double hamiltonian = 0.0;

  static ChainState make(Eigen::VectorXd w, Eigen::VectorXd p, double energy);
  double kinetic() const { return 0.5 * p.squaredNorm(); }
};

struct Trajectory {
  ChainState end;
  bool divergent = false;
};

// L leapfrog steps of size eps (half kick, drift, half kick; consecutive half
// kicks are fused). A non-finite gradient or end energy marks the trajectory
// divergent.
Trajectory leapfrog_trajectory(const ChainState& start, double eps, int steps,
                               const Energy& energy, const EnergyGradient& grad);

// min(1, exp(h_old - h_new))
double acceptance_probability(double h_old, double h_new);

struct Transition {
  double h_old = 0.0;
  double h_new = 0.0;
  double kinetic_start = 0.0;
  double epsilon = 0.0;
  bool accepted = false;
  bool divergent = false;
};

struct ChainResult {
  std::vector<Eigen::VectorXd> samples;
  std::vector<Transition> transitions;
  long accepted = 0;
  long divergent = 0;
  long total = 0;

  double acceptance_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(total);
  }
};

// One chain over an arbitrary energy. Each transition: fresh p ~ N(0, I),
// direction lambda in {-1, +1}, k ~ U(0,1), eps = lambda eps0 (1 + 0.1 k),
// Metropolis accept/reject. Every thin-th post-burn-in state is retained.
ChainResult run_chain(const Energy& energy, const EnergyGradient& grad,
                      const Eigen::VectorXd& w0, const HmcConfig& cfg);

enum class Aggregation { kMean, kVote };

class PosteriorEnsemble {
 public:
  PosteriorEnsemble(mlp::Architecture arch, std::vector<mlp::WeightVector> samples,
                    double acceptance_rate, mlp::HyperParameters hp,
                    data::NormalizationSpec normalization);

  const mlp::Architecture& architecture() const { return arch_; }
  const std::vector<mlp::WeightVector>& samples() const { return samples_; }
  double acceptance_rate() const { return acceptance_rate_; }
  const mlp::HyperParameters& hyperparameters() const { return hp_; }
  const data::NormalizationSpec& normalization() const { return normalization_; }

  // Posterior-mean prediction: average network output over retained samples.
  double predict_mean(std::span<const double> x) const;
  // Fraction of samples whose output is >= threshold.
  double predict_vote(std::span<const double> x, double threshold = 0.5) const;
  double predict(std::span<const double> x, Aggregation how = Aggregation::kMean) const;

 private:
  mlp::Architecture arch_;
  std::vector<mlp::WeightVector> samples_;
  double acceptance_rate_;
  mlp::HyperParameters hp_;
  data::NormalizationSpec normalization_;
  // Output 0 of every sample from one stacked hidden layer: rows s*M..s*M+M-1
  // of w1_ hold sample s. Empty when the output layer is softmax.
  Eigen::MatrixXd w1_;  // (S*M) x d
  Eigen::VectorXd b1_;
  Eigen::MatrixXd v_;   // M x S
  Eigen::VectorXd c_;   // S

  Eigen::VectorXd sample_outputs(std::span<const double> x) const;
};

struct SampleResult {
  PosteriorEnsemble ensemble;
  std::vector<ChainResult> chains;
};

// Samples the network posterior with hp held fixed. Starts from
// `initial_weights` (e.g. an evidence MAP fit) or a seeded initialization.
// With chains > 1, independent chains run concurrently with seeds
// cfg.seed + c and their samples are concatenated in chain order.
SampleResult sample_posterior(const data::Patterns& patterns, const mlp::Architecture& arch,
                              const mlp::HyperParameters& hp, const HmcConfig& cfg,
                              const std::optional<mlp::WeightVector>& initial_weights = {},
                              const data::NormalizationSpec& normalization =
                                  data::NormalizationSpec::theoretical_defaults(),
                              int chains = 1);

}  // namespace midctl::hmc
