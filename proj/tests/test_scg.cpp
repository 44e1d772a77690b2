#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "midctl/error.hpp"
#include "midctl/scg.hpp"

namespace midctl::scg {
namespace {

using Eigen::VectorXd;

double bowl(const VectorXd& w) { return 0.5 * w.squaredNorm(); }
VectorXd bowl_grad(const VectorXd& w) { return w; }

double rosenbrock(const VectorXd& w) {
  return 100.0 * std::pow(w(1) - w(0) * w(0), 2) + std::pow(1.0 - w(0), 2);
}
VectorXd rosenbrock_grad(const VectorXd& w) {
  VectorXd g(2);
  g(0) = -400.0 * w(0) * (w(1) - w(0) * w(0)) - 2.0 * (1.0 - w(0));
  g(1) = 200.0 * (w(1) - w(0) * w(0));
  return g;
}

TEST(Scg, QuadraticReachesOrigin) {
  VectorXd w0(2);
  w0 << 5.0, -3.0;
  ScgConfig cfg;
  cfg.gradient_tolerance = 1e-10;
  cfg.objective_tolerance = 1e-30;
  const auto r = minimize(bowl, bowl_grad, w0, cfg);
  EXPECT_LT(r.w.norm(), 1e-9);
  EXPECT_TRUE(r.converged());
}

TEST(Scg, StationaryStartStopsImmediately) {
  const VectorXd w0 = VectorXd::Zero(3);
  const auto r = minimize(bowl, bowl_grad, w0);
  EXPECT_EQ(r.w, w0);
  EXPECT_EQ(r.termination, Termination::kGradient);
  EXPECT_TRUE(r.trace.empty());
}

TEST(Scg, Rosenbrock) {
  VectorXd w0(2);
  w0 << -1.2, 1.0;
  ScgConfig cfg;
  cfg.max_iterations = 5000;
  cfg.gradient_tolerance = 1e-9;
  cfg.objective_tolerance = 1e-20;
  const auto r = minimize(rosenbrock, rosenbrock_grad, w0, cfg);
  EXPECT_NEAR(r.w(0), 1.0, 1e-4);
  EXPECT_NEAR(r.w(1), 1.0, 1e-4);
}

TEST(Scg, IllConditionedQuadratic) {
  VectorXd scale(5);
  scale << 1, 10, 100, 1000, 1e4;
  auto f = [&](const VectorXd& w) { return 0.5 * (scale.array() * w.array().square()).sum(); };
  auto g = [&](const VectorXd& w) { return VectorXd(scale.array() * w.array()); };
  const auto r = minimize(f, g, VectorXd::Ones(5));
  EXPECT_LT(r.w.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ScgProperty, AcceptedStepsNeverIncreaseObjective) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd w0(2);
    w0 << n(rng), n(rng);
    const auto r = minimize(rosenbrock, rosenbrock_grad, w0);
    double last = rosenbrock(w0);
    for (const auto& it : r.trace) {
      if (!it.accepted) continue;
      EXPECT_LE(it.objective, last);
      last = it.objective;
    }
  }
}

TEST(ScgProperty, Deterministic) {
  VectorXd w0(2);
  w0 << -1.2, 1.0;
  const auto a = minimize(rosenbrock, rosenbrock_grad, w0);
  const auto b = minimize(rosenbrock, rosenbrock_grad, w0);
  EXPECT_EQ(a.w, b.w);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].objective, b.trace[i].objective);
    EXPECT_EQ(a.trace[i].lambda, b.trace[i].lambda);
  }
}

TEST(Scg, BudgetExhaustionIsReportedNotThrown) {
  VectorXd w0(2);
  w0 << -1.2, 1.0;
  ScgConfig cfg;
  cfg.max_iterations = 3;
  const auto r = minimize(rosenbrock, rosenbrock_grad, w0, cfg);
  EXPECT_EQ(r.termination, Termination::kMaxIterations);
  EXPECT_FALSE(r.converged());
  EXPECT_EQ(r.trace.size(), 3u);
}

TEST(Scg, NonFiniteStartIsError) {
  auto f = [](const VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(minimize(f, bowl_grad, VectorXd::Ones(2)), Error);
}

TEST(Scg, NonFiniteMidRunNamesIteration) {
  // Finite at the start, NaN once the iterate moves far enough.
  auto f = [](const VectorXd& w) {
    return w(0) < 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.5 * w.squaredNorm();
  };
  try {
    minimize(f, bowl_grad, VectorXd::Constant(1, 4.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumerical);
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos) << e.what();
  }
}

TEST(Scg, ConfigValidation) {
  ScgConfig cfg;
  cfg.max_iterations = 0;
  EXPECT_THROW(minimize(bowl, bowl_grad, VectorXd::Ones(2), cfg), Error);
  cfg = {};
  cfg.gradient_tolerance = 0.0;
  EXPECT_THROW(minimize(bowl, bowl_grad, VectorXd::Ones(2), cfg), Error);
}

}  // namespace
}  // namespace midctl::scg
