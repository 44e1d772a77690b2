#include "midctl/control.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "midctl/error.hpp"

namespace midctl::control {

using data::FeatureRow;
using data::Variable;

bool is_controllable(Variable v) {
  return std::find(kControllable.begin(), kControllable.end(), v) != kControllable.end();
}

void ControlProblem::validate() const {
  if (!predict) throw Error(ErrorCode::kConfig, "control problem has no predictor");
  if (controllable.empty()) throw Error(ErrorCode::kConfig, "controllable set is empty");
  for (Variable v : controllable) {
    if (!is_controllable(v)) {
      throw Error(ErrorCode::kConfig,
                  std::string(data::name(v)) + " is not a controllable variable");
    }
    const auto& b = bounds[data::index(v)];
    if (!(b.lo >= 0.0 && b.hi <= 1.0 && b.lo < b.hi)) {
      throw Error(ErrorCode::kConfig, "bounds for " + std::string(data::name(v)) +
                                          " must satisfy 0 <= lo < hi <= 1");
    }
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "peace threshold must lie in (0, 1]");
  }
}

Strategy Strategy::parse(std::string_view text) {
  if (text == "multi") return multi();
  constexpr std::string_view prefix = "single:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto v = data::parse_variable(text.substr(prefix.size()));
    if (v && is_controllable(*v)) return single(*v);
    throw Error(ErrorCode::kConfig, "unknown or uncontrollable variable in strategy '" +
                                        std::string(text) + "'");
  }
  throw Error(ErrorCode::kConfig,
              "strategy must be 'multi' or 'single:<variable>', got '" + std::string(text) + "'");
}

std::string Strategy::to_string() const {
  return kind == Kind::kMulti ? "multi" : "single:" + std::string(data::name(variable));
}

ControlOutcome control_dyad(const ControlProblem& problem, const Strategy& strategy,
                            const ControlConfig& cfg) {
  problem.validate();
  ControlOutcome out;
  out.strategy = strategy;
  out.original = problem.dyad;
  out.adjusted = problem.dyad;
  out.p_before = problem.predict(problem.dyad);
  out.p_after = out.p_before;

  if (out.p_before < problem.threshold) {
    out.success = true;
    return out;
  }
  out.activated = true;

  std::vector<Variable> vars;
  if (strategy.kind == Strategy::Kind::kSingle) {
    if (std::find(problem.controllable.begin(), problem.controllable.end(), strategy.variable) ==
        problem.controllable.end()) {
      throw Error(ErrorCode::kConfig, std::string(data::name(strategy.variable)) +
                                          " is not in the controllable set");
    }
    vars.push_back(strategy.variable);
  } else {
    vars = problem.controllable;
  }

  try {
    if (strategy.kind == Strategy::Kind::kSingle) {
      const int idx = data::index(vars.front());
      const auto& b = problem.bounds[idx];
      FeatureRow x = problem.dyad;
      const auto res = optimize::gss_minimize(
          [&](double v) {
            x[idx] = v;
            return std::abs(problem.predict(x));
          },
          b.lo, b.hi, cfg.gss_tolerance, cfg.gss_max_iterations);
      out.evaluations = res.evaluations;
      if (res.f < std::abs(out.p_before)) out.adjusted[idx] = res.x;
    } else {
      optimize::Box box;
      std::vector<double> start;
      for (Variable v : vars) {
        const auto& b = problem.bounds[data::index(v)];
        box.lo.push_back(b.lo);
        box.hi.push_back(b.hi);
        start.push_back(std::clamp(problem.dyad[data::index(v)], b.lo, b.hi));
      }
      FeatureRow x = problem.dyad;
      const auto res = optimize::sa_minimize(
          [&](const std::vector<double>& y) {
            for (std::size_t i = 0; i < vars.size(); ++i) x[data::index(vars[i])] = y[i];
            return std::abs(problem.predict(x));
          },
          box, cfg.sa, start);
      out.evaluations = res.evaluations;
      if (res.f < std::abs(out.p_before)) {
        for (std::size_t i = 0; i < vars.size(); ++i) out.adjusted[data::index(vars[i])] = res.x[i];
      }
    }
  } catch (const Error& e) {
    out.success = false;
    out.diagnostics = e.what();
    return out;
  }

  out.p_after = problem.predict(out.adjusted);
  out.success = out.p_after < problem.threshold;

  if (std::find(vars.begin(), vars.end(), Variable::kAllies) != vars.end()) {
    RoundedAllies r;
    r.features = out.adjusted;
    const int a = data::index(Variable::kAllies);
    r.features[a] = r.features[a] >= 0.5 ? 1.0 : 0.0;
    r.p = problem.predict(r.features);
    r.success = r.p < problem.threshold;
    out.rounded_allies = r;
  }
  return out;
}

double CampaignReport::avoidance_rate() const {
  return rows.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(rows.size());
}

double CampaignReport::rounded_avoidance_rate() const {
  return rows.empty() ? 0.0
                      : static_cast<double>(rounded_successes) / static_cast<double>(rows.size());
}

std::uint64_t dyad_seed(std::uint64_t seed, std::string_view dyad_id) {
  std::uint64_t h = 14695981039346656037ull ^ seed;
  for (unsigned char c : dyad_id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  // splitmix64 finalizer
  h += 0x9e3779b97f4a7c15ull;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

CampaignReport control_campaign(const Predictor& predict, const data::Dataset& test,
                                const Strategy& strategy, double threshold,
                                const ControlConfig& cfg, std::uint64_t seed, int threads) {
  if (!test.normalized()) {
    throw Error(ErrorCode::kConfig, "control campaign needs a normalized test set");
  }
  CampaignReport report;
  report.strategy = strategy;
  report.threshold = threshold;

  std::vector<const data::Dyad*> selected;
  for (const auto& d : test.dyads()) {
    if (d.mid == 1 && predict(d.features) >= threshold) selected.push_back(&d);
  }
  report.rows.resize(selected.size());
  for (std::size_t k = 0; k < selected.size(); ++k) report.rows[k].dyad_id = selected[k]->dyad_id;

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      ControlProblem prob;
      prob.predict = predict;
      prob.dyad = selected[k]->features;
      prob.threshold = threshold;
      ControlConfig local = cfg;
      local.sa.seed = dyad_seed(seed, selected[k]->dyad_id);
      report.rows[k].outcome = control_dyad(prob, strategy, local);
    }
  };

  const std::size_t n = selected.size();
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& row : report.rows) {
    if (row.outcome.success) ++report.successes;
    const bool rounded_ok = row.outcome.rounded_allies ? row.outcome.rounded_allies->success
                                                       : row.outcome.success;
    if (rounded_ok) ++report.rounded_successes;
  }
  for (Variable v : kControllable) {
    VariableSummary s{v};
    for (const auto& row : report.rows) {
      const double delta = row.outcome.adjusted[data::index(v)] - row.outcome.original[data::index(v)];
      s.mean_change += delta;
      s.mean_abs_change += std::abs(delta);
    }
    if (!report.rows.empty()) {
      s.mean_change /= static_cast<double>(report.rows.size());
      s.mean_abs_change /= static_cast<double>(report.rows.size());
    }
    report.summaries.push_back(s);
  }
  return report;
}

void write_campaign_csv(const CampaignReport& report, const data::NormalizationSpec& norm,
                        std::ostream& out) {
  out << "dyad_id,strategy";
  for (auto n : data::kVariableNames) out << ",original_" << n;
  for (auto n : data::kVariableNames) out << ",adjusted_" << n;
  out << ",p_before,p_after,success,rounded_allies_p_after,rounded_allies_success\n";
  out << std::setprecision(17);
  for (const auto& row : report.rows) {
    const auto& o = row.outcome;
    out << row.dyad_id << ',' << o.strategy.to_string();
    for (double v : norm.denormalize(o.original)) out << ',' << v;
    for (double v : norm.denormalize(o.adjusted)) out << ',' << v;
    out << ',' << o.p_before << ',' << o.p_after << ',' << (o.success ? 1 : 0) << ',';
    if (o.rounded_allies) {
      out << o.rounded_allies->p << ',' << (o.rounded_allies->success ? 1 : 0);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace midctl::control
