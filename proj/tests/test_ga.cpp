#include <gtest/gtest.h>

#include "midctl/error.hpp"
#include "midctl/ga.hpp"

namespace midctl::ga {
namespace {

using mlp::Activation;

TEST(Decode, DocumentedExamples) {
  auto a = decode(Chromosome::from_string("0000 01 10"));
  EXPECT_EQ(a.hidden, 1);
  EXPECT_EQ(a.inner, Activation::kLogistic);
  EXPECT_EQ(a.outer, Activation::kTanh);

  a = decode(Chromosome::from_string("1001 10 01"));
  EXPECT_EQ(a.hidden, 10);
  EXPECT_EQ(a.inner, Activation::kTanh);
  EXPECT_EQ(a.outer, Activation::kLogistic);
  EXPECT_EQ(a.inputs, 7);

  a = decode(Chromosome::from_string("11110000"));
  EXPECT_EQ(a.hidden, 1);
  EXPECT_EQ(a.inner, Activation::kLinear);
  EXPECT_EQ(a.outer, Activation::kLinear);
}

TEST(Decode, WrongLengthOrBadBit) {
  EXPECT_THROW(Chromosome::from_string("0101"), Error);
  EXPECT_THROW(Chromosome::from_string("010101010"), Error);
  EXPECT_THROW(Chromosome::from_string("0101010x"), Error);
  EXPECT_THROW(Chromosome::from_code(256), Error);
}

TEST(DecodeProperty, EveryCodeIsValid) {
  int m15 = 0;
  for (unsigned code = 0; code < 256; ++code) {
    const auto c = Chromosome::from_code(code);
    EXPECT_EQ(c.code(), code);
    EXPECT_EQ(Chromosome::from_string(c.to_string()), c);
    const auto a = decode(c);
    EXPECT_NO_THROW(a.validate());
    EXPECT_GE(a.hidden, 1);
    EXPECT_LE(a.hidden, 15);
    if (a.hidden == 15) ++m15;
  }
  // Only the M code 1110 reaches 15, across all 16 activation pairs.
  EXPECT_EQ(m15, 16);
}

TEST(Roulette, FrequenciesMatchWeights) {
  const std::vector<double> fitness = {0.2, 0.5, 0.9, 0.65, 0.8};
  const auto w = selection_weights(fitness);
  std::mt19937_64 rng(4);
  std::vector<int> counts(w.size());
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[roulette_select(w, rng)];
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(counts[i] / static_cast<double>(draws), w[i], 0.01);
  }
}

TEST(Roulette, ShiftedWeights) {
  const std::vector<double> fitness = {-1.0, 1.0, 3.0};
  const auto w = selection_weights(fitness);
  EXPECT_NEAR(w[0], 0.0, 1e-9);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(w[2], 2.0 / 3.0, 1e-9);
  const std::vector<double> flat = {0.0, 0.0, 0.0, 0.0};
  for (double v : selection_weights(flat)) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Evolve, ConstantFitnessKeepsGenerationZeroBest) {
  GaConfig cfg;
  cfg.population = 2;
  cfg.generations = 5;
  cfg.seed = 3;
  const auto r = evolve([](const mlp::Architecture&) { return 0.0; }, cfg);
  EXPECT_EQ(r.best_generation, 0);
  EXPECT_EQ(r.history.size(), 5u);
  EXPECT_EQ(r.best_chromosome, r.history[0].population[0]);
}

Fitness rigged() {
  return [](const mlp::Architecture& a) { return static_cast<double>(a.hidden); };
}

TEST(Evolve, DeterministicHistory) {
  GaConfig cfg;
  cfg.seed = 11;
  const auto a = evolve(rigged(), cfg);
  cfg.parallel = true;
  const auto b = evolve(rigged(), cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t g = 0; g < a.history.size(); ++g) {
    EXPECT_EQ(a.history[g].population, b.history[g].population);
    EXPECT_EQ(a.history[g].fitness, b.history[g].fitness);
  }
}

TEST(EvolveProperty, BestEverNonDecreasingAndDecodable) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GaConfig cfg;
    cfg.seed = seed;
    cfg.mutation_rate = 0.1;
    const auto r = evolve([](const mlp::Architecture& a) {
      return std::sin(a.hidden * 1.3) + static_cast<int>(a.inner) * 0.1;
    }, cfg);
    double last = -1e300;
    for (const auto& g : r.history) {
      EXPECT_GE(g.best_ever, last);
      last = g.best_ever;
      EXPECT_EQ(g.population.size(), 20u);
      for (const auto& c : g.population) EXPECT_NO_THROW(decode(c).validate());
    }
    EXPECT_EQ(r.best_fitness, last);
  }
}

TEST(Evolve, RiggedFitnessFindsLargestNetwork) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GaConfig cfg;
    cfg.seed = seed;
    if (evolve(rigged(), cfg).best.hidden == 15) ++hits;
  }
  EXPECT_GE(hits, 19);
}

TEST(Evolve, ConfigValidation) {
  GaConfig cfg;
  cfg.population = 1;
  EXPECT_THROW(evolve(rigged(), cfg), Error);
  cfg = {};
  cfg.mutation_rate = 1.5;
  EXPECT_THROW(evolve(rigged(), cfg), Error);
  cfg = {};
  cfg.generations = 0;
  EXPECT_THROW(evolve(rigged(), cfg), Error);
}

TEST(TrainingFitness, ScoresAreBounded) {
  const auto raw = data::generate_synthetic_population(3000, 5);
  const auto split = data::make_balanced_training_set(raw, 60, 5);
  const auto [ds, norm] = data::normalize(split.train, std::nullopt);
  const auto p = ds.patterns();
  TrainingFitnessOptions opts;
  opts.scg_iterations = 30;
  const auto auc = make_training_fitness(p, p, opts);
  const double f = auc(decode(Chromosome::from_string("1001 10 01")));
  EXPECT_GT(f, 0.5);
  EXPECT_LE(f, 1.0);
  opts.kind = FitnessKind::kValidationCrossEntropy;
  const auto ce = make_training_fitness(p, p, opts);
  const double g = ce(decode(Chromosome::from_string("1001 10 01")));
  EXPECT_LT(g, 0.0);
  EXPECT_GT(g, -std::log(2.0));
}

}  // namespace
}  // namespace midctl::ga
