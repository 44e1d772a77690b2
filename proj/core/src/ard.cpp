#include "midctl/ard.hpp"

#include <algorithm>
#include <future>
#include <numeric>

#include "midctl/error.hpp"

namespace midctl::ard {

using Eigen::VectorXd;

VectorXd input_relevances(const mlp::HyperParameters& hp, int inputs) {
  if (static_cast<int>(hp.groups.size()) < inputs) return {};
  VectorXd r(inputs);
  for (int i = 0; i < inputs; ++i) {
    if (hp.groups[static_cast<std::size_t>(i)].name.rfind("input:", 0) != 0) return {};
    r(i) = 1.0 / hp.alpha(i);
  }
  return r;
}

std::vector<int> rank(const VectorXd& relevance) {
  std::vector<int> order(static_cast<std::size_t>(relevance.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return relevance(a) > relevance(b); });
  return order;
}

ArdResult train_ard(const data::Patterns& patterns, const mlp::Architecture& arch,
                    const ArdOptions& opts, const data::NormalizationSpec& normalization) {
  if (opts.restarts < 1) throw Error(ErrorCode::kConfig, "ARD restarts must be >= 1");
  const auto hp0 = mlp::HyperParameters::ard(arch, opts.initial_alpha);

  auto run = [&](int r) {
    evidence::EvidenceOptions eo;
    eo.cycles = opts.cycles;
    eo.scg = opts.scg;
    eo.seed = opts.seed + static_cast<std::uint64_t>(r);
    return evidence::train_evidence(patterns, arch, hp0, eo, normalization);
  };

  std::vector<evidence::TrainResult> runs;
  if (opts.parallel && opts.restarts > 1) {
    std::vector<std::future<evidence::TrainResult>> pending;
    for (int r = 0; r < opts.restarts; ++r) pending.push_back(std::async(std::launch::async, run, r));
    for (auto& f : pending) runs.push_back(f.get());
  } else {
    for (int r = 0; r < opts.restarts; ++r) runs.push_back(run(r));
  }

  const int d = arch.inputs;
  std::vector<VectorXd> per_restart;
  for (const auto& tr : runs) per_restart.push_back(input_relevances(tr.model.hyperparameters(), d));

  VectorXd relevance(d);
  for (int i = 0; i < d; ++i) {
    std::vector<double> values;
    for (const auto& r : per_restart) values.push_back(r(i));
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    relevance(i) = m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  }

  std::vector<std::string> names;
  for (int i = 0; i < d; ++i) names.push_back(hp0.groups[static_cast<std::size_t>(i)].name.substr(6));

  return ArdResult{std::move(names),
                   relevance.cwiseInverse(),
                   relevance,
                   relevance / relevance.sum(),
                   rank(relevance),
                   std::move(per_restart),
                   std::move(runs.front().model)};
}

}  // namespace midctl::ard
