#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace midctl::scg {

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Defaults follow Moller's scaled conjugate gradient: sigma0 = 1e-4 for the
// finite-difference curvature probe, lambda starting at 1e-6.
struct ScgConfig {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-6;   // on the infinity norm
  double objective_tolerance = 1e-12; // relative change over an accepted step
  double initial_lambda = 1e-6;
  double sigma0 = 1e-4;

  void validate() const;
};

struct Iteration {
  int iteration = 0;
  double objective = 0.0;  // after the step (unchanged when rejected)
  double gradient_norm = 0.0;
  double lambda = 0.0;
  bool accepted = false;
};

enum class Termination { kGradient, kObjective, kMaxIterations };

struct Result {
  Eigen::VectorXd w;
  double objective = 0.0;
  Termination termination = Termination::kMaxIterations;
  std::vector<Iteration> trace;

  bool converged() const { return termination != Termination::kMaxIterations; }
};

Result minimize(const Objective& f, const Gradient& grad, const Eigen::VectorXd& w0,
                const ScgConfig& cfg = {});

}  // namespace midctl::scg
