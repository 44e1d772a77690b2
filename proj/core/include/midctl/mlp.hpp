#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "midctl/data.hpp"

namespace midctl::mlp {

enum class Activation { kLinear = 0, kLogistic = 1, kTanh = 2, kSoftmax = 3 };

std::string_view to_string(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

inline constexpr int kMaxHidden = 15;

// Two-layer perceptron topology:
//   y_k = outer( sum_j w2_kj * inner( sum_i w1_ji x_i + w1_j0 ) + w2_k0 )
struct Architecture {
  int inputs = data::kNumVariables;
  int hidden = 10;
  int outputs = 1;
  Activation inner = Activation::kTanh;
  Activation outer = Activation::kLogistic;

  // M(d+1) + K(M+1)
  Eigen::Index num_weights() const;
  void validate() const;

  bool operator==(const Architecture&) const = default;
};

using WeightVector = Eigen::VectorXd;

// Flat weight layout, stable across versions because ARD groups and the
// model file depend on it:
//   [0, dM)            first layer, grouped by source input: index i*M + j
//   [dM, (d+1)M)       hidden biases
//   [(d+1)M, (d+1)M+KM) second layer: index (d+1)M + k*M + j
//   last K entries     output biases
namespace layout {
Eigen::Index first_layer(const Architecture& a, int input, int hidden_unit);
Eigen::Index hidden_bias(const Architecture& a, int hidden_unit);
Eigen::Index second_layer(const Architecture& a, int output, int hidden_unit);
Eigen::Index output_bias(const Architecture& a, int output);
}  // namespace layout

struct WeightGroup {
  std::string name;
  std::vector<Eigen::Index> indices;

  bool operator==(const WeightGroup&) const = default;
};

// Weight-decay precisions alpha_j (one per group) and the data precision beta.
struct HyperParameters {
  std::vector<WeightGroup> groups;
  Eigen::VectorXd alpha;
  double beta = 1.0;

  // One group covering all weights.
  static HyperParameters single_group(const Architecture& a, double alpha);
  // first-layer weights, hidden biases, second-layer weights, output biases.
  static HyperParameters standard(const Architecture& a, double alpha);
  // One group per input's fan-out, then hidden biases, second layer, output
  // biases. Input groups come first, in input order.
  static HyperParameters ard(const Architecture& a, double alpha);

  // Groups must partition [0, num_weights); alpha >= 0; beta > 0.
  void validate(Eigen::Index num_weights) const;
  Eigen::VectorXd per_weight_alpha(Eigen::Index num_weights) const;

  bool operator==(const HyperParameters&) const = default;
};

// Zero-mean Gaussian with standard deviation 1/sqrt(fan-in).
WeightVector initialize_weights(const Architecture& a, std::uint64_t seed);

Eigen::VectorXd forward(const Architecture& a, const WeightVector& w,
                        std::span<const double> x);
// Single-output convenience: forward(...)[0].
double predict(const Architecture& a, const WeightVector& w, std::span<const double> x);
// Applies f to every row of m (one pattern per row) in place.
void apply_activation(Activation f, Eigen::MatrixXd& m);
// Outputs for every row of `inputs` (n x K).
Eigen::MatrixXd forward_batch(const Architecture& a, const WeightVector& w,
                              const Eigen::MatrixXd& inputs);

// Pre-activation of output 0 and its gradient with respect to w.
double output_preactivation(const Architecture& a, const WeightVector& w,
                            std::span<const double> x);
Eigen::VectorXd output_preactivation_gradient(const Architecture& a, const WeightVector& w,
                                              std::span<const double> x);

// Outputs of non-logistic output units are clamped to [eps, 1-eps] before the
// logarithms. Logistic outputs use the exact softplus form of the
// cross-entropy in terms of the pre-activation, so no clamp is ever applied
// to them.
inline constexpr double kOutputEpsilon = 1e-12;

// beta * cross-entropy, without the prior.
double data_error(const Architecture& a, const WeightVector& w, double beta,
                  const data::Patterns& p);
Eigen::VectorXd data_gradient(const Architecture& a, const WeightVector& w, double beta,
                              const data::Patterns& p);

// Negative exponent of the posterior: beta * cross-entropy +
// sum_j alpha_j/2 * sum_{i in group j} w_i^2. The normalizer is omitted.
double neg_log_posterior(const Architecture& a, const WeightVector& w,
                         const HyperParameters& hp, const data::Patterns& p);
Eigen::VectorXd gradient(const Architecture& a, const WeightVector& w,
                         const HyperParameters& hp, const data::Patterns& p);

// Outer-product (Gauss-Newton / Fisher) approximation of the data-term
// Hessian, positive semidefinite. Single-output networks only.
Eigen::MatrixXd data_hessian(const Architecture& a, const WeightVector& w, double beta,
                             const data::Patterns& p);

}  // namespace midctl::mlp
