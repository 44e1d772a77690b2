#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace midctl::optimize {

// (3 - sqrt(5)) / 2: fraction of the bracket at which interior points sit.
inline constexpr double kGoldenFraction = 0.38196601125010515;

struct GssResult {
  double x = 0.0;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> widths;  // bracket width after each iteration
};

// Golden-section search on [lo, hi]. Stops when the bracket is no wider than
// tol or after max_iterations; returns the best point evaluated.
GssResult gss_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-6, int max_iterations = 200);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  void validate() const;
};

struct SaConfig {
  double initial_temperature = 1.0;
  double cooling = 0.95;
  int steps_per_temperature = 50;
  double min_temperature = 1e-4;
  double proposal_scale = 0.1;  // fraction of each box side
  std::uint64_t seed = 0;

  void validate() const;
};

struct SaResult {
  std::vector<double> x;  // best point ever visited
  double f = 0.0;
  int evaluations = 0;
  int accepted = 0;
  int uphill_accepted = 0;
  int temperature_levels = 0;
};

// Metropolis acceptance at temperature T: 1 for downhill moves,
// exp(-delta/T) uphill, 0 uphill when T <= 0.
double sa_acceptance(double delta, double temperature);

// Simulated annealing with Gaussian proposals clamped into the box and
// geometric cooling. At least one temperature level is always run. Starts at
// x0 when given, otherwise at the box centre.
SaResult sa_minimize(const std::function<double(const std::vector<double>&)>& f, const Box& box,
                     const SaConfig& cfg = {},
                     const std::optional<std::vector<double>>& x0 = std::nullopt);

}  // namespace midctl::optimize
