#include "midctl/scg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "midctl/error.hpp"

namespace midctl::scg {

namespace {

constexpr double kLambdaMin = 1e-15;
constexpr double kLambdaMax = 1e100;

void require_finite(double v, int iteration, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at SCG iteration " << iteration;
    throw Error(ErrorCode::kNumerical, msg.str());
  }
}

void require_finite(const Eigen::VectorXd& v, int iteration, const char* what) {
  if (!v.allFinite()) require_finite(std::nan(""), iteration, what);
}

}  // namespace

void ScgConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::kConfig, "max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0) || !(objective_tolerance > 0.0)) {
    throw Error(ErrorCode::kConfig, "SCG tolerances must be positive");
  }
  if (!(initial_lambda > 0.0) || !(sigma0 > 0.0)) {
    throw Error(ErrorCode::kConfig, "SCG lambda and sigma0 must be positive");
  }
}

Result minimize(const Objective& f, const Gradient& grad, const Eigen::VectorXd& w0,
                const ScgConfig& cfg) {
  cfg.validate();
  const auto n = w0.size();

  Result res;
  Eigen::VectorXd x = w0;
  double f_old = f(x);
  require_finite(f_old, 0, "objective");
  Eigen::VectorXd g = grad(x);
  require_finite(g, 0, "gradient");
  res.objective = f_old;

  if (n == 0 || g.lpNorm<Eigen::Infinity>() <= cfg.gradient_tolerance) {
    res.w = x;
    res.termination = Termination::kGradient;
    return res;
  }

  Eigen::VectorXd g_old = g;
  Eigen::VectorXd d = -g;
  double lambda = cfg.initial_lambda;
  bool success = true;
  long n_success = 0;
  double mu = 0.0, kappa = 0.0, theta = 0.0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (success) {
      mu = d.dot(g);
      if (mu >= 0.0) {
        d = -g;
        mu = d.dot(g);
      }
      kappa = d.squaredNorm();
      if (kappa < std::numeric_limits<double>::epsilon()) {
        // The conjugate update can cancel (e.g. on an isotropic bowl); fall
        // back to steepest descent before declaring a stationary point.
        d = -g;
        mu = d.dot(g);
        kappa = d.squaredNorm();
      }
      if (kappa < std::numeric_limits<double>::epsilon()) {
        res.termination = Termination::kGradient;
        break;
      }
      const double sigma = cfg.sigma0 / std::sqrt(kappa);
      const Eigen::VectorXd g_plus = grad(x + sigma * d);
      require_finite(g_plus, it, "gradient");
      theta = d.dot(g_plus - g) / sigma;
    }

    // Scale the curvature estimate until it is positive definite.
    double delta = theta + lambda * kappa;
    if (delta <= 0.0) {
      delta = lambda * kappa;
      lambda -= theta / kappa;
    }
    const double alpha = -mu / delta;
    const Eigen::VectorXd x_new = x + alpha * d;
    const double f_new = f(x_new);
    require_finite(f_new, it, "objective");

    const double comparison = 2.0 * (f_new - f_old) / (alpha * mu);
    success = comparison >= 0.0;

    Iteration rec;
    rec.iteration = it;
    rec.accepted = success;
    if (success) {
      x = x_new;
      ++n_success;
      const double df = std::abs(f_new - f_old);
      const double scale = std::max(1.0, std::abs(f_old));
      g_old = g;
      g = grad(x);
      require_finite(g, it, "gradient");
      f_old = f_new;
      rec.objective = f_new;
      rec.gradient_norm = g.lpNorm<Eigen::Infinity>();
      rec.lambda = lambda;
      res.trace.push_back(rec);
      if (rec.gradient_norm <= cfg.gradient_tolerance) {
        res.termination = Termination::kGradient;
        break;
      }
      if (df <= cfg.objective_tolerance * scale) {
        res.termination = Termination::kObjective;
        break;
      }
    } else {
      rec.objective = f_old;
      rec.gradient_norm = g.lpNorm<Eigen::Infinity>();
      rec.lambda = lambda;
      res.trace.push_back(rec);
    }

    if (comparison < 0.25) lambda = std::min(4.0 * lambda, kLambdaMax);
    if (comparison > 0.75) lambda = std::max(0.5 * lambda, kLambdaMin);

    // Restart with steepest descent every n successful steps.
    if (n_success == n) {
      d = -g;
      n_success = 0;
    } else if (success) {
      const double beta = (g_old - g).dot(g) / mu;
      d = beta * d - g;
    }
  }

  res.w = x;
  res.objective = f_old;
  return res;
}

}  // namespace midctl::scg
