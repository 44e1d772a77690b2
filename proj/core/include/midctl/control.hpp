#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "midctl/data.hpp"
#include "midctl/optimize.hpp"

namespace midctl::control {

// Maps a normalized feature row to P(conflict). Must be safe to call
// concurrently.
using Predictor = std::function<double(const data::FeatureRow&)>;

inline constexpr std::array<data::Variable, 4> kControllable = {
    data::Variable::kDemocracy, data::Variable::kAllies, data::Variable::kCapability,
    data::Variable::kDependency};

bool is_controllable(data::Variable v);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct ControlProblem {
  Predictor predict;
  data::FeatureRow dyad{};  // normalized
  std::vector<data::Variable> controllable{kControllable.begin(), kControllable.end()};
  std::array<Interval, data::kNumVariables> bounds{};  // normalized scale
  double threshold = 0.5;

  void validate() const;
};

struct Strategy {
  enum class Kind { kSingle, kMulti };
  Kind kind = Kind::kMulti;
  data::Variable variable = data::Variable::kDemocracy;  // kSingle only

  static Strategy single(data::Variable v) { return {Kind::kSingle, v}; }
  static Strategy multi() { return {Kind::kMulti, data::Variable::kDemocracy}; }
  // "multi" or "single:<variable>"
  static Strategy parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const Strategy&) const = default;
};

struct ControlConfig {
  double gss_tolerance = 1e-6;
  int gss_max_iterations = 200;
  optimize::SaConfig sa{};
};

struct RoundedAllies {
  data::FeatureRow features{};
  double p = 0.0;
  bool success = false;
};

struct ControlOutcome {
  data::FeatureRow original{};
  data::FeatureRow adjusted{};
  double p_before = 0.0;
  double p_after = 0.0;
  bool success = false;
  bool activated = false;  // false when the dyad was already predicted peaceful
  Strategy strategy;
  int evaluations = 0;
  std::optional<RoundedAllies> rounded_allies;
  std::string diagnostics;
};

// Minimizes |prediction| over the strategy's variables when the dyad is
// predicted as conflict (p >= threshold). Single strategies use
// golden-section search on the variable's interval, the multi strategy uses
// simulated annealing over all controllable variables jointly.
ControlOutcome control_dyad(const ControlProblem& problem, const Strategy& strategy,
                            const ControlConfig& cfg = {});

struct CampaignRow {
  std::string dyad_id;
  ControlOutcome outcome;
};

struct VariableSummary {
  data::Variable variable;
  double mean_change = 0.0;      // normalized scale, over selected dyads
  double mean_abs_change = 0.0;
};

struct CampaignReport {
  Strategy strategy;
  double threshold = 0.5;
  std::vector<CampaignRow> rows;
  std::size_t successes = 0;
  std::size_t rounded_successes = 0;  // counting the rounded-allies variant
  std::vector<VariableSummary> summaries;

  std::size_t selected() const { return rows.size(); }
  double avoidance_rate() const;
  double rounded_avoidance_rate() const;
};

// Runs control_dyad on every true positive of `test` (actual conflict and
// predicted conflict). Each dyad's annealing seed is derived from
// (seed, dyad_id), so results do not depend on scheduling.
CampaignReport control_campaign(const Predictor& predict, const data::Dataset& test,
                                const Strategy& strategy, double threshold = 0.5,
                                const ControlConfig& cfg = {}, std::uint64_t seed = 0,
                                int threads = 0);

std::uint64_t dyad_seed(std::uint64_t seed, std::string_view dyad_id);

// CSV with dyad_id, original_*, adjusted_* (raw scale via `norm`), p_before,
// p_after, success and the rounded-allies columns.
void write_campaign_csv(const CampaignReport& report, const data::NormalizationSpec& norm,
                        std::ostream& out);

}  // namespace midctl::control
