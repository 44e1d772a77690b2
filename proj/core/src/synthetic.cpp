#include <cmath>
#include <random>
#include <sstream>

#include "midctl/data.hpp"
#include "midctl/error.hpp"

namespace midctl::data {

GeneratorScenario GeneratorScenario::null_risk() {
  GeneratorScenario sc;
  sc.conflict_probability = [](const Dyad&) { return 0.0; };
  return sc;
}

double default_conflict_probability(const Dyad& d, const GeneratorScenario& sc) {
  const double dem = (d[Variable::kDemocracy] + 10.0) / 20.0;
  const double dep = d[Variable::kDependency] / sc.dependency_max;
  const double cap = (d[Variable::kCapability] - sc.capability.lo) /
                     (sc.capability.hi - sc.capability.lo);
  const double dist =
      (d[Variable::kDistance] - sc.distance.lo) / (sc.distance.hi - sc.distance.lo);
  const auto& k = sc.risk;
  const double logit = k.intercept + k.autocracy_x_low_trade * (1 - dem) * (1 - dep) +
                       k.autocracy_x_capability * (1 - dem) * cap +
                       k.contiguity_x_low_trade * d[Variable::kContingency] * (1 - dep) +
                       k.allies * d[Variable::kAllies] +
                       k.major_power * d[Variable::kMajorPower] + k.distance * dist +
                       k.dependency * dep;
  return 1.0 / (1.0 + std::exp(-logit));
}

double ground_truth_probability(const Dyad& dyad, const GeneratorScenario& sc) {
  return sc.conflict_probability ? sc.conflict_probability(dyad)
                                 : default_conflict_probability(dyad, sc);
}

Dataset generate_synthetic_population(std::size_t n, std::uint64_t seed,
                                      const GeneratorScenario& sc) {
  if (n == 0) throw Error(ErrorCode::kConfig, "synthetic population size must be > 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto bernoulli = [&](double p) { return unit(rng) < p ? 1.0 : 0.0; };
  auto uniform = [&](Uniform u) { return u.lo + (u.hi - u.lo) * unit(rng); };

  std::vector<Dyad> dyads;
  dyads.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Dyad d;
    std::ostringstream id;
    id << "syn" << k;
    d.dyad_id = id.str();
    d.year = 1885 + static_cast<int>(k % 108);
    d[Variable::kDemocracy] = uniform({-10.0, 10.0});
    d[Variable::kAllies] = bernoulli(sc.p_allies);
    d[Variable::kContingency] = bernoulli(sc.p_contingency);
    d[Variable::kDistance] = uniform(sc.distance);
    d[Variable::kCapability] = uniform(sc.capability);
    const double u = unit(rng);
    d[Variable::kDependency] = sc.dependency_max * u * u;
    d[Variable::kMajorPower] = bernoulli(sc.p_major_power);
    d.mid = static_cast<int>(bernoulli(ground_truth_probability(d, sc)));
    dyads.push_back(std::move(d));
  }
  return Dataset(std::move(dyads), false);
}

}  // namespace midctl::data
