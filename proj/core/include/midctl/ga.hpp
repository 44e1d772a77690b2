#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "midctl/data.hpp"
#include "midctl/mlp.hpp"
#include "midctl/scg.hpp"

namespace midctl::ga {

// 8-bit architecture genome, most significant bit first:
//   bits 0-3  hidden units M = 1 + (code mod 15)
//   bits 4-5  hidden activation index
//   bits 6-7  output activation index
// Activation indices: 0 linear, 1 logistic, 2 tanh, 3 softmax.
struct Chromosome {
  static constexpr int kBits = 8;
  std::array<std::uint8_t, kBits> bits{};

  static Chromosome from_string(std::string_view bits);
  static Chromosome from_code(unsigned code);  // 0..255
  std::string to_string() const;
  unsigned code() const;

  bool operator==(const Chromosome&) const = default;
};

mlp::Architecture decode(const Chromosome& c, int inputs = data::kNumVariables);

enum class FitnessKind { kValidationAuc, kValidationCrossEntropy };

struct GaConfig {
  int population = 20;
  int generations = 20;
  double crossover_rate = 0.7;
  double mutation_rate = 0.02;
  bool elitism = true;
  bool parallel = false;  // evaluate a generation's fitness concurrently
  std::uint64_t seed = 0;

  void validate() const;
};

using Fitness = std::function<double(const mlp::Architecture&)>;

// Shifted roulette weights: f - min(f) + eps, normalized to sum 1. Constant
// fitness yields uniform weights.
std::vector<double> selection_weights(std::span<const double> fitness);
std::size_t roulette_select(std::span<const double> weights, std::mt19937_64& rng);

struct Generation {
  int index = 0;
  std::vector<Chromosome> population;
  std::vector<double> fitness;
  double best = 0.0;
  double mean = 0.0;
  double best_ever = 0.0;
  Chromosome best_ever_chromosome;
};

struct EvolveResult {
  Chromosome best_chromosome;
  mlp::Architecture best;
  double best_fitness = 0.0;
  int best_generation = 0;
  std::vector<Generation> history;
};

// Roulette-wheel reproduction, single-point crossover, per-bit mutation and
// (optionally) elitism of one. Fitness is cached per chromosome.
EvolveResult evolve(const Fitness& fitness, const GaConfig& cfg, int inputs = data::kNumVariables);

struct TrainingFitnessOptions {
  FitnessKind kind = FitnessKind::kValidationAuc;
  int scg_iterations = 100;
  double alpha = 0.01;
  std::uint64_t seed = 0;
};

// Budgeted MAP training on `train`, scored on `validation`: AUC, or the
// negated mean cross-entropy so that larger is always better.
Fitness make_training_fitness(const data::Patterns& train, const data::Patterns& validation,
                              const TrainingFitnessOptions& opts = {});

}  // namespace midctl::ga
