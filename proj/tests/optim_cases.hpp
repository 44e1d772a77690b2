#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "midctl/optimize.hpp"

namespace midctl::testing {

inline double bowl2(const std::vector<double>& x) {
  return (x[0] - 0.25) * (x[0] - 0.25) + (x[1] - 0.75) * (x[1] - 0.75);
}

// Three Gaussian wells on the unit square. The centre sits in the shallow
// middle well; the deepest one is near (0.2, 0.8).
inline double wells(const std::vector<double>& x) {
  auto well = [&](double cx, double cy, double width, double depth) {
    const double r2 = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
    return -depth * std::exp(-r2 / width);
  };
  return well(0.2, 0.8, 0.01, 1.0) + well(0.5, 0.5, 0.02, 0.6) + well(0.8, 0.25, 0.01, 0.8);
}

struct GridOptimum {
  double x = 0.0;
  double y = 0.0;
  double f = 0.0;
};

inline GridOptimum grid_minimum(double (*f)(const std::vector<double>&), int n = 200) {
  GridOptimum best{0.0, 0.0, 1e300};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::vector<double> p = {i / (n - 1.0), j / (n - 1.0)};
      const double v = f(p);
      if (v < best.f) best = {p[0], p[1], v};
    }
  }
  return best;
}

inline optimize::Box unit_square() { return {{0.0, 0.0}, {1.0, 1.0}}; }

// Number of seeds out of `runs` where SA with default schedule lands within
// `radius` of the grid optimum.
inline int wells_basin_hits(int runs, double radius = 0.15) {
  const auto g = grid_minimum(wells);
  int hits = 0;
  for (int s = 0; s < runs; ++s) {
    optimize::SaConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    const auto r = optimize::sa_minimize(wells, unit_square(), cfg);
    if (std::hypot(r.x[0] - g.x, r.x[1] - g.y) < radius) ++hits;
  }
  return hits;
}

inline int bowl_hits(int runs) {
  int hits = 0;
  for (int s = 0; s < runs; ++s) {
    optimize::SaConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    if (optimize::sa_minimize(bowl2, unit_square(), cfg).f <= 1e-3) ++hits;
  }
  return hits;
}

// Largest deviation of logged bracket widths from (hi - lo) * 0.618034^n.
inline double gss_width_error(double lo, double hi) {
  const auto r = optimize::gss_minimize([](double x) { return std::cos(3.0 * x) + x * x; }, lo, hi,
                                        1e-9);
  const double factor = 1.0 - optimize::kGoldenFraction;
  double worst = 0.0;
  for (std::size_t n = 0; n < r.widths.size(); ++n) {
    const double expected = (hi - lo) * std::pow(factor, static_cast<double>(n + 1));
    worst = std::max(worst, std::abs(r.widths[n] - expected));
  }
  return worst;
}

}  // namespace midctl::testing
