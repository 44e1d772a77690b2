#include "midctl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "midctl/error.hpp"

namespace midctl::optimize {

namespace {
double checked(double v, const char* where) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNumerical, std::string("non-finite objective in ") + where);
  }
  return v;
}
}  // namespace

GssResult gss_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double tol, int max_iterations) {
  if (!(lo < hi)) throw Error(ErrorCode::kConfig, "golden-section search needs lo < hi");
  if (!(tol > 0.0)) throw Error(ErrorCode::kConfig, "golden-section tolerance must be > 0");

  GssResult res;
  auto eval = [&](double x) {
    const double v = checked(f(x), "golden-section search");
    ++res.evaluations;
    if (res.evaluations == 1 || v < res.f) {
      res.x = x;
      res.f = v;
    }
    return v;
  };

  double a = lo, b = hi;
  double c = a + kGoldenFraction * (b - a);
  double d = b - kGoldenFraction * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol && res.iterations < max_iterations) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = a + kGoldenFraction * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = b - kGoldenFraction * (b - a);
      fd = eval(d);
    }
    ++res.iterations;
    res.widths.push_back(b - a);
  }
  return res;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) {
    throw Error(ErrorCode::kConfig, "box bounds must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw Error(ErrorCode::kConfig, "box is degenerate");
  }
}

void SaConfig::validate() const {
  if (!(initial_temperature >= 0.0)) throw Error(ErrorCode::kConfig, "T0 must be >= 0");
  if (!(cooling > 0.0 && cooling < 1.0)) throw Error(ErrorCode::kConfig, "cooling must be in (0,1)");
  if (steps_per_temperature < 1) throw Error(ErrorCode::kConfig, "steps per temperature must be >= 1");
  if (!(min_temperature >= 0.0)) throw Error(ErrorCode::kConfig, "T_min must be >= 0");
  if (!(proposal_scale > 0.0)) throw Error(ErrorCode::kConfig, "proposal scale must be > 0");
}

double sa_acceptance(double delta, double temperature) {
  if (delta <= 0.0) return 1.0;
  if (temperature <= 0.0) return 0.0;
  return std::exp(-delta / temperature);
}

SaResult sa_minimize(const std::function<double(const std::vector<double>&)>& f, const Box& box,
                     const SaConfig& cfg, const std::optional<std::vector<double>>& x0) {
  box.validate();
  cfg.validate();
  const std::size_t n = box.dim();

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> x(n);
  if (x0) {
    if (x0->size() != n) throw Error(ErrorCode::kDimension, "SA start point dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp((*x0)[i], box.lo[i], box.hi[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * (box.lo[i] + box.hi[i]);
  }

  SaResult res;
  double fx = f(x);
  if (!std::isfinite(fx)) throw Error(ErrorCode::kNumerical, "SA objective is non-finite at start");
  res.evaluations = 1;
  res.x = x;
  res.f = fx;

  std::vector<double> y(n);
  for (double t = cfg.initial_temperature;; t *= cfg.cooling) {
    ++res.temperature_levels;
    for (int s = 0; s < cfg.steps_per_temperature; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        const double step = cfg.proposal_scale * (box.hi[i] - box.lo[i]) * normal(rng);
        y[i] = std::clamp(x[i] + step, box.lo[i], box.hi[i]);
      }
      const double fy = checked(f(y), "simulated annealing");
      ++res.evaluations;
      const double delta = fy - fx;
      if (unit(rng) < sa_acceptance(delta, t)) {
        x = y;
        fx = fy;
        ++res.accepted;
        if (delta > 0.0) ++res.uphill_accepted;
        if (fx < res.f) {
          res.f = fx;
          res.x = x;
        }
      }
    }
    if (t <= cfg.min_temperature) break;
  }
  return res;
}

}  // namespace midctl::optimize
