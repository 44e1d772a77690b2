#include "midctl/ga.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>

#include "midctl/error.hpp"
#include "midctl/eval.hpp"

namespace midctl::ga {

namespace {
constexpr double kSelectionEpsilon = 1e-9;
constexpr std::array<mlp::Activation, 4> kActivations = {
    mlp::Activation::kLinear, mlp::Activation::kLogistic, mlp::Activation::kTanh,
    mlp::Activation::kSoftmax};
}  // namespace

Chromosome Chromosome::from_string(std::string_view text) {
  std::string compact;
  for (char ch : text) {
    if (ch == ' ' || ch == '_') continue;
    compact.push_back(ch);
  }
  if (compact.size() != kBits) {
    throw Error(ErrorCode::kConfig, "chromosome must have exactly 8 bits");
  }
  Chromosome c;
  for (int i = 0; i < kBits; ++i) {
    if (compact[i] != '0' && compact[i] != '1') {
      throw Error(ErrorCode::kParse, "chromosome bits must be 0 or 1");
    }
    c.bits[i] = static_cast<std::uint8_t>(compact[i] - '0');
  }
  return c;
}

Chromosome Chromosome::from_code(unsigned code) {
  if (code > 255) throw Error(ErrorCode::kConfig, "chromosome code must be < 256");
  Chromosome c;
  for (int i = 0; i < kBits; ++i) c.bits[i] = static_cast<std::uint8_t>((code >> (kBits - 1 - i)) & 1u);
  return c;
}

std::string Chromosome::to_string() const {
  std::string s;
  for (auto b : bits) s.push_back(static_cast<char>('0' + b));
  return s;
}

unsigned Chromosome::code() const {
  unsigned v = 0;
  for (auto b : bits) v = (v << 1) | b;
  return v;
}

mlp::Architecture decode(const Chromosome& c, int inputs) {
  const unsigned m_code = (c.bits[0] << 3) | (c.bits[1] << 2) | (c.bits[2] << 1) | c.bits[3];
  mlp::Architecture a;
  a.inputs = inputs;
  a.hidden = 1 + static_cast<int>(m_code % 15);
  a.outputs = 1;
  a.inner = kActivations[(c.bits[4] << 1) | c.bits[5]];
  a.outer = kActivations[(c.bits[6] << 1) | c.bits[7]];
  return a;
}

void GaConfig::validate() const {
  if (population < 2) throw Error(ErrorCode::kConfig, "GA population must be >= 2");
  if (generations < 1) throw Error(ErrorCode::kConfig, "GA generations must be >= 1");
  auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!in_unit(crossover_rate) || !in_unit(mutation_rate)) {
    throw Error(ErrorCode::kConfig, "GA rates must lie in [0, 1]");
  }
}

std::vector<double> selection_weights(std::span<const double> fitness) {
  if (fitness.empty()) return {};
  const double lo = *std::min_element(fitness.begin(), fitness.end());
  std::vector<double> w(fitness.size());
  std::transform(fitness.begin(), fitness.end(), w.begin(),
                 [lo](double f) { return f - lo + kSelectionEpsilon; });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

std::size_t roulette_select(std::span<const double> weights, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

EvolveResult evolve(const Fitness& fitness, const GaConfig& cfg, int inputs) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cut_point(1, Chromosome::kBits - 1);

  std::vector<Chromosome> pop(static_cast<std::size_t>(cfg.population));
  for (auto& c : pop) {
    for (auto& b : c.bits) b = unit(rng) < 0.5 ? 0 : 1;
  }

  std::map<unsigned, double> cache;
  auto evaluate = [&](const std::vector<Chromosome>& generation) {
    std::vector<unsigned> missing;
    for (const auto& c : generation) {
      if (!cache.count(c.code()) &&
          std::find(missing.begin(), missing.end(), c.code()) == missing.end()) {
        missing.push_back(c.code());
      }
    }
    if (cfg.parallel) {
      std::vector<std::future<double>> pending;
      for (unsigned code : missing) {
        pending.push_back(std::async(std::launch::async, [&, code] {
          return fitness(decode(Chromosome::from_code(code), inputs));
        }));
      }
      for (std::size_t i = 0; i < missing.size(); ++i) cache[missing[i]] = pending[i].get();
    } else {
      for (unsigned code : missing) cache[code] = fitness(decode(Chromosome::from_code(code), inputs));
    }
    std::vector<double> f;
    for (const auto& c : generation) f.push_back(cache.at(c.code()));
    return f;
  };

  EvolveResult res;
  bool have_best = false;
  for (int g = 0; g < cfg.generations; ++g) {
    Generation gen;
    gen.index = g;
    gen.population = pop;
    gen.fitness = evaluate(pop);
    const auto best_it = std::max_element(gen.fitness.begin(), gen.fitness.end());
    const auto best_idx = static_cast<std::size_t>(best_it - gen.fitness.begin());
    gen.best = *best_it;
    gen.mean = std::accumulate(gen.fitness.begin(), gen.fitness.end(), 0.0) /
               static_cast<double>(gen.fitness.size());
    if (!have_best || gen.best > res.best_fitness) {
      have_best = true;
      res.best_fitness = gen.best;
      res.best_chromosome = pop[best_idx];
      res.best_generation = g;
    }
    gen.best_ever = res.best_fitness;
    gen.best_ever_chromosome = res.best_chromosome;
    res.history.push_back(gen);
    if (g + 1 == cfg.generations) break;

    const auto weights = selection_weights(gen.fitness);
    std::vector<Chromosome> next;
    next.reserve(pop.size());
    if (cfg.elitism) next.push_back(res.best_chromosome);
    while (next.size() < pop.size()) {
      Chromosome a = pop[roulette_select(weights, rng)];
      Chromosome b = pop[roulette_select(weights, rng)];
      if (unit(rng) < cfg.crossover_rate) {
        const int cut = cut_point(rng);
        for (int i = cut; i < Chromosome::kBits; ++i) std::swap(a.bits[i], b.bits[i]);
      }
      for (auto* child : {&a, &b}) {
        for (auto& bit : child->bits) {
          if (unit(rng) < cfg.mutation_rate) bit ^= 1;
        }
        if (next.size() < pop.size()) next.push_back(*child);
      }
    }
    pop = std::move(next);
  }
  res.best = decode(res.best_chromosome, inputs);
  return res;
}

Fitness make_training_fitness(const data::Patterns& train, const data::Patterns& validation,
                              const TrainingFitnessOptions& opts) {
  return [&train, &validation, opts](const mlp::Architecture& arch) -> double {
    const double worst = opts.kind == FitnessKind::kValidationAuc
                             ? 0.0
                             : -std::log(1.0 / mlp::kOutputEpsilon);
    try {
      const auto hp = mlp::HyperParameters::standard(arch, opts.alpha);
      scg::ScgConfig cfg;
      cfg.max_iterations = opts.scg_iterations;
      const auto fit = scg::minimize(
          [&](const Eigen::VectorXd& w) { return mlp::neg_log_posterior(arch, w, hp, train); },
          [&](const Eigen::VectorXd& w) { return mlp::gradient(arch, w, hp, train); },
          mlp::initialize_weights(arch, opts.seed), cfg);
      if (opts.kind == FitnessKind::kValidationCrossEntropy) {
        const double n = static_cast<double>(std::max<Eigen::Index>(1, validation.size()));
        return -mlp::data_error(arch, fit.w, 1.0, validation) / n;
      }
      const Eigen::MatrixXd out = mlp::forward_batch(arch, fit.w, validation.inputs);
      std::vector<double> scores(out.col(0).data(), out.col(0).data() + out.rows());
      std::vector<int> labels;
      for (Eigen::Index n = 0; n < validation.targets.size(); ++n) {
        labels.push_back(static_cast<int>(validation.targets(n)));
      }
      const double auc = eval::roc_auc(scores, labels).auc;
      return std::isfinite(auc) ? auc : worst;
    } catch (const Error&) {
      return worst;
    }
  };
}

}  // namespace midctl::ga
