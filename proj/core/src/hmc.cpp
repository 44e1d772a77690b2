#include "midctl/hmc.hpp"

#include <cmath>
#include <future>
#include <random>
#include <sstream>

#include "midctl/error.hpp"

namespace midctl::hmc {

using Eigen::VectorXd;

void HmcConfig::validate() const {
  if (!(epsilon0 > 0.0)) throw Error(ErrorCode::kConfig, "epsilon0 must be > 0");
  if (leapfrog_steps < 0 || burn_in < 0) {
    throw Error(ErrorCode::kConfig, "HMC step and burn-in counts must be >= 0");
  }
  if (n_samples < 1) throw Error(ErrorCode::kConfig, "n_samples must be >= 1");
  if (thin < 1) throw Error(ErrorCode::kConfig, "thin must be >= 1");
}

ChainState ChainState::make(VectorXd w, VectorXd p, double energy) {
  if (w.size() != p.size()) {
    throw Error(ErrorCode::kDimension, "position and momentum lengths differ");
  }
  ChainState s{std::move(w), std::move(p), energy, 0.0};
  s.hamiltonian = energy + s.kinetic();
  return s;
}

Trajectory leapfrog_trajectory(const ChainState& start, double eps, int steps,
                               const Energy& energy, const EnergyGradient& grad) {
  if (steps <= 0) return {start, false};

  VectorXd w = start.w;
  VectorXd p = start.p;
  VectorXd g = grad(w);
  bool divergent = !g.allFinite();
  p -= 0.5 * eps * g;
  for (int l = 1; l <= steps && !divergent; ++l) {
    w += eps * p;
    g = grad(w);
    if (!g.allFinite()) {
      divergent = true;
      break;
    }
    p -= (l < steps ? eps : 0.5 * eps) * g;
  }
  const double e = divergent ? std::nan("") : energy(w);
  Trajectory t{ChainState::make(std::move(w), std::move(p), e), divergent || !std::isfinite(e)};
  return t;
}

double acceptance_probability(double h_old, double h_new) {
  if (!std::isfinite(h_new)) return 0.0;
  return h_new <= h_old ? 1.0 : std::exp(h_old - h_new);
}

ChainResult run_chain(const Energy& energy, const EnergyGradient& grad, const VectorXd& w0,
                      const HmcConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  VectorXd w = w0;
  double e = energy(w);
  if (!std::isfinite(e)) {
    throw Error(ErrorCode::kNumerical, "HMC start point has non-finite energy");
  }

  ChainResult out;
  out.total = cfg.total_transitions();
  out.samples.reserve(static_cast<std::size_t>(cfg.n_samples));
  out.transitions.reserve(static_cast<std::size_t>(out.total));
  for (long t = 1; t <= out.total; ++t) {
    VectorXd p(w.size());
    for (auto& v : p) v = normal(rng);
    const double lambda = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double k = unit(rng);
    const double eps = lambda * cfg.epsilon0 * (1.0 + 0.1 * k);

    const ChainState start = ChainState::make(w, std::move(p), e);
    Trajectory traj = leapfrog_trajectory(start, eps, cfg.leapfrog_steps, energy, grad);

    Transition rec;
    rec.h_old = start.hamiltonian;
    rec.h_new = traj.end.hamiltonian;
    rec.kinetic_start = start.kinetic();
    rec.epsilon = eps;
    rec.divergent = traj.divergent;
    const double u = unit(rng);
    rec.accepted = !traj.divergent && u < acceptance_probability(rec.h_old, rec.h_new);
    if (rec.accepted) {
      w = std::move(traj.end.w);
      e = traj.end.energy;
      ++out.accepted;
    }
    if (rec.divergent) ++out.divergent;
    out.transitions.push_back(rec);

    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0) out.samples.push_back(w);
  }
  if (out.divergent == out.total && out.total > 0) {
    std::ostringstream msg;
    msg << "every HMC trajectory diverged; reduce epsilon0 (currently " << cfg.epsilon0 << ")";
    throw Error(ErrorCode::kNumerical, msg.str());
  }
  return out;
}

PosteriorEnsemble::PosteriorEnsemble(mlp::Architecture arch,
                                     std::vector<mlp::WeightVector> samples,
                                     double acceptance_rate, mlp::HyperParameters hp,
                                     data::NormalizationSpec normalization)
    : arch_(std::move(arch)),
      samples_(std::move(samples)),
      acceptance_rate_(acceptance_rate),
      hp_(std::move(hp)),
      normalization_(normalization) {
  arch_.validate();
  if (samples_.empty()) throw Error(ErrorCode::kConfig, "posterior ensemble is empty");
  for (const auto& w : samples_) {
    if (w.size() != arch_.num_weights()) {
      throw Error(ErrorCode::kDimension, "ensemble sample does not match architecture");
    }
  }
  if (!(acceptance_rate_ >= 0.0 && acceptance_rate_ <= 1.0)) {
    throw Error(ErrorCode::kConfig, "acceptance rate must lie in [0, 1]");
  }
  if (arch_.outer == mlp::Activation::kSoftmax) return;
  const Eigen::Index d = arch_.inputs, m = arch_.hidden, k = arch_.outputs;
  const auto s = static_cast<Eigen::Index>(samples_.size());
  w1_.resize(s * m, d);
  b1_.resize(s * m);
  v_.resize(m, s);
  c_.resize(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto& w = samples_[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index in = 0; in < d; ++in) w1_(i * m + j, in) = w(in * m + j);
      b1_(i * m + j) = w(d * m + j);
      v_(j, i) = w((d + 1) * m + j);  // output 0
    }
    c_(i) = w((d + 1) * m + k * m);
  }
}

Eigen::VectorXd PosteriorEnsemble::sample_outputs(std::span<const double> x) const {
  const auto s = static_cast<Eigen::Index>(samples_.size());
  VectorXd out(s);
  if (w1_.size() == 0) {
    for (Eigen::Index i = 0; i < s; ++i) out(i) = mlp::predict(arch_, samples_[static_cast<std::size_t>(i)], x);
    return out;
  }
  if (static_cast<int>(x.size()) != arch_.inputs) {
    throw Error(ErrorCode::kDimension, "input has " + std::to_string(x.size()) +
                                           " features, network expects " +
                                           std::to_string(arch_.inputs));
  }
  const Eigen::Map<const VectorXd> xv(x.data(), arch_.inputs);
  Eigen::MatrixXd h = (w1_ * xv + b1_).transpose();
  mlp::apply_activation(arch_.inner, h);
  const Eigen::Index m = arch_.hidden;
  for (Eigen::Index i = 0; i < s; ++i) out(i) = h.middleCols(i * m, m).row(0).dot(v_.col(i).transpose());
  Eigen::MatrixXd pre = (out + c_).transpose();
  mlp::apply_activation(arch_.outer, pre);
  return pre.row(0).transpose();
}

double PosteriorEnsemble::predict_mean(std::span<const double> x) const {
  return sample_outputs(x).mean();
}

double PosteriorEnsemble::predict_vote(std::span<const double> x, double threshold) const {
  const VectorXd y = sample_outputs(x);
  return static_cast<double>((y.array() >= threshold).count()) / static_cast<double>(y.size());
}

double PosteriorEnsemble::predict(std::span<const double> x, Aggregation how) const {
  return how == Aggregation::kMean ? predict_mean(x) : predict_vote(x);
}

SampleResult sample_posterior(const data::Patterns& patterns, const mlp::Architecture& arch,
                              const mlp::HyperParameters& hp, const HmcConfig& cfg,
                              const std::optional<mlp::WeightVector>& initial_weights,
                              const data::NormalizationSpec& normalization, int chains) {
  arch.validate();
  cfg.validate();
  hp.validate(arch.num_weights());
  if (chains < 1) throw Error(ErrorCode::kConfig, "chains must be >= 1");

  auto energy = [&](const VectorXd& w) { return mlp::neg_log_posterior(arch, w, hp, patterns); };
  auto grad = [&](const VectorXd& w) { return mlp::gradient(arch, w, hp, patterns); };

  auto run_one = [&](int c) {
    HmcConfig local = cfg;
    local.seed = cfg.seed + static_cast<std::uint64_t>(c);
    const VectorXd w0 = initial_weights ? *initial_weights
                                        : mlp::initialize_weights(arch, local.seed);
    return run_chain(energy, grad, w0, local);
  };

  std::vector<ChainResult> results;
  if (chains == 1) {
    results.push_back(run_one(0));
  } else {
    std::vector<std::future<ChainResult>> pending;
    for (int c = 0; c < chains; ++c) pending.push_back(std::async(std::launch::async, run_one, c));
    for (auto& f : pending) results.push_back(f.get());
  }

  std::vector<mlp::WeightVector> samples;
  long accepted = 0, total = 0;
  for (const auto& r : results) {
    samples.insert(samples.end(), r.samples.begin(), r.samples.end());
    accepted += r.accepted;
    total += r.total;
  }
  const double rate = total == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(total);
  return {PosteriorEnsemble(arch, std::move(samples), rate, hp, normalization), std::move(results)};
}

}  // namespace midctl::hmc
