#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "midctl/data.hpp"
#include "midctl/eval.hpp"
#include "midctl/hmc.hpp"
#include "midctl/mlp.hpp"
#include "midctl/optimize.hpp"

namespace {

using namespace midctl;

data::Patterns desk_patterns(std::size_t n) {
  const auto raw = data::generate_synthetic_population(n, 3);
  return data::normalize(raw, std::nullopt).first.patterns();
}

void BM_Forward(benchmark::State& state) {
  mlp::Architecture a;
  a.hidden = static_cast<int>(state.range(0));
  const auto w = mlp::initialize_weights(a, 1);
  const std::vector<double> x = {0.1, 0, 1, 0.4, 0.7, 0.05, 1};
  for (auto _ : state) benchmark::DoNotOptimize(mlp::predict(a, w, x));
}
BENCHMARK(BM_Forward)->Arg(5)->Arg(10)->Arg(15);

void BM_Gradient(benchmark::State& state) {
  const auto p = desk_patterns(static_cast<std::size_t>(state.range(0)));
  mlp::Architecture a;
  const auto w = mlp::initialize_weights(a, 1);
  const auto hp = mlp::HyperParameters::standard(a, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(mlp::gradient(a, w, hp, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gradient)->Arg(100)->Arg(1000);

void BM_NegLogPosterior(benchmark::State& state) {
  const auto p = desk_patterns(1000);
  mlp::Architecture a;
  const auto w = mlp::initialize_weights(a, 1);
  const auto hp = mlp::HyperParameters::standard(a, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(mlp::neg_log_posterior(a, w, hp, p));
}
BENCHMARK(BM_NegLogPosterior);

void BM_LeapfrogTrajectory(benchmark::State& state) {
  const auto p = desk_patterns(1000);
  mlp::Architecture a;
  const auto hp = mlp::HyperParameters::standard(a, 0.01);
  const auto w = mlp::initialize_weights(a, 1);
  const hmc::Energy e = [&](const Eigen::VectorXd& v) { return mlp::neg_log_posterior(a, v, hp, p); };
  const hmc::EnergyGradient g = [&](const Eigen::VectorXd& v) { return mlp::gradient(a, v, hp, p); };
  const auto start = hmc::ChainState::make(w, Eigen::VectorXd::Zero(w.size()), e(w));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmc::leapfrog_trajectory(start, 0.005, static_cast<int>(state.range(0)), e, g));
  }
}
BENCHMARK(BM_LeapfrogTrajectory)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = u(rng) < 0.05 ? 1 : 0;
    scores[i] = 0.5 * u(rng) + 0.5 * labels[i] * u(rng);
  }
  labels[0] = 1;
  labels[1] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(eval::roc_auc(scores, labels));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(20000);

void BM_GoldenSection(benchmark::State& state) {
  const auto f = [](double x) { return (x - 0.3) * (x - 0.3); };
  for (auto _ : state) benchmark::DoNotOptimize(optimize::gss_minimize(f, 0.0, 1.0, 1e-6, 200));
}
BENCHMARK(BM_GoldenSection);

}  // namespace
BENCHMARK_MAIN();
