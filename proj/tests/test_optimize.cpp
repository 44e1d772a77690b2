#include <limits>

#include <gtest/gtest.h>

#include "midctl/error.hpp"
#include "optim_cases.hpp"

namespace midctl::optimize {
namespace {

TEST(Gss, ParabolaMinimum) {
  const auto r = gss_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-6);
  EXPECT_NEAR(r.x, 0.3, 1e-5);
  EXPECT_LE(r.widths.back(), 1e-6);
}

TEST(Gss, ConstantObjective) {
  const auto r = gss_minimize([](double) { return 4.0; }, -1.0, 2.0);
  EXPECT_EQ(r.f, 4.0);
  EXPECT_GE(r.x, -1.0);
  EXPECT_LE(r.x, 2.0);
}

TEST(Gss, ReductionFactorIsGolden) {
  EXPECT_NEAR(1.0 - kGoldenFraction, 0.618034, 1e-6);
  EXPECT_LT(testing::gss_width_error(0.0, 1.0), 1e-9);
  EXPECT_LT(testing::gss_width_error(-3.0, 5.0), 1e-9);
  const auto r = gss_minimize([](double x) { return std::abs(x); }, -1.0, 1.0, 1e-6);
  for (std::size_t i = 1; i < r.widths.size(); ++i) {
    EXPECT_NEAR(r.widths[i] / r.widths[i - 1], 0.6180339887, 1e-8);
  }
}

TEST(Gss, BudgetLimitsIterations) {
  const auto r = gss_minimize([](double x) { return x * x; }, -1.0, 1.0, 1e-12, 5);
  EXPECT_EQ(r.iterations, 5);
  EXPECT_EQ(r.evaluations, 7);
}

TEST(Gss, Errors) {
  EXPECT_THROW(gss_minimize([](double x) { return x; }, 1.0, 1.0), Error);
  EXPECT_THROW(gss_minimize([](double x) { return x; }, 0.0, 1.0, 0.0), Error);
  EXPECT_THROW(gss_minimize([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0.0, 1.0),
               Error);
}

TEST(Sa, AcceptanceRule) {
  EXPECT_EQ(sa_acceptance(-0.5, 1.0), 1.0);
  EXPECT_EQ(sa_acceptance(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sa_acceptance(0.5, 0.25), std::exp(-2.0));
  EXPECT_EQ(sa_acceptance(1e-12, 0.0), 0.0);
}

TEST(Sa, ConvexBowl) { EXPECT_GE(testing::bowl_hits(20), 19); }

TEST(Sa, MultimodalMatchesGridBasin) {
  const auto g = testing::grid_minimum(testing::wells);
  EXPECT_NEAR(g.x, 0.2, 0.01);
  EXPECT_NEAR(g.y, 0.8, 0.01);
  EXPECT_GE(testing::wells_basin_hits(20), 18);
}

TEST(SaProperty, ZeroTemperatureNeverAcceptsUphill) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SaConfig cfg;
    cfg.initial_temperature = 0.0;
    cfg.steps_per_temperature = 500;
    cfg.seed = seed;
    std::vector<double> visited;
    const auto r = sa_minimize(
        [&](const std::vector<double>& x) {
          const double v = testing::wells(x);
          visited.push_back(v);
          return v;
        },
        testing::unit_square(), cfg, std::vector<double>{0.9, 0.9});
    EXPECT_EQ(r.uphill_accepted, 0);
    EXPECT_EQ(r.temperature_levels, 1);
    EXPECT_LE(r.f, visited.front());
  }
}

TEST(SaProperty, StaysInBoxAndIsDeterministic) {
  SaConfig cfg;
  cfg.seed = 5;
  cfg.proposal_scale = 2.0;
  const Box box{{-1.0, 2.0, 0.0}, {1.0, 3.0, 0.5}};
  auto f = [&](const std::vector<double>& x) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GE(x[i], box.lo[i]);
      EXPECT_LE(x[i], box.hi[i]);
    }
    return x[0] * x[1] - x[2];
  };
  const auto a = sa_minimize(f, box, cfg);
  const auto b = sa_minimize(f, box, cfg);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Sa, Errors) {
  auto f = [](const std::vector<double>& x) { return x[0]; };
  EXPECT_THROW(sa_minimize(f, Box{{0.0}, {0.0}}), Error);
  EXPECT_THROW(sa_minimize(f, Box{{}, {}}), Error);
  SaConfig cfg;
  cfg.cooling = 1.0;
  EXPECT_THROW(sa_minimize(f, Box{{0.0}, {1.0}}, cfg), Error);
  EXPECT_THROW(sa_minimize([](const std::vector<double>&) { return std::nan(""); }, Box{{0.0}, {1.0}}),
               Error);
}

}  // namespace
}  // namespace midctl::optimize
