#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "midctl/evidence.hpp"

namespace midctl::ard {

struct ArdOptions {
  int cycles = 5;
  int restarts = 5;
  double initial_alpha = 1.0;  // unit-variance prior; 0.01 lets noise inputs grow large cancelling weights
  scg::ScgConfig scg{};
  std::uint64_t seed = 0;  // restart r uses seed + r
  bool parallel = true;
};

struct ArdResult {
  std::vector<std::string> names;  // one per input
  Eigen::VectorXd alpha;           // 1 / relevance
  Eigen::VectorXd relevance;       // median over restarts of 1/alpha_i
  Eigen::VectorXd normalized;      // relevance / sum(relevance)
  std::vector<int> ranking;        // input indices, most relevant first
  std::vector<Eigen::VectorXd> restart_relevance;
  evidence::EvidenceModel model;   // restart 0
};

// Evidence training with one alpha per input fan-out group plus separate
// groups for hidden biases, second-layer weights and output biases.
ArdResult train_ard(const data::Patterns& patterns, const mlp::Architecture& arch,
                    const ArdOptions& opts,
                    const data::NormalizationSpec& normalization =
                        data::NormalizationSpec::theoretical_defaults());

// Relevances of the input groups of an ARD-grouped hyperparameter set, or an
// empty vector when the groups are not ARD groups.
Eigen::VectorXd input_relevances(const mlp::HyperParameters& hp, int inputs);

// Descending relevance; ties keep input column order.
std::vector<int> rank(const Eigen::VectorXd& relevance);

}  // namespace midctl::ard
