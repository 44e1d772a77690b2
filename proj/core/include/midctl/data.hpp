#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace midctl::data {

// Column order of the seven dyadic inputs. This order is the network input
// order and the order of every per-variable array in the library.
enum class Variable : int {
  kDemocracy = 0,
  kAllies,
  kContingency,
  kDistance,
  kCapability,
  kDependency,
  kMajorPower,
};

inline constexpr int kNumVariables = 7;
using FeatureRow = std::array<double, kNumVariables>;

inline constexpr std::array<std::string_view, kNumVariables> kVariableNames = {
    "democracy", "allies",     "contingency", "distance",
    "capability", "dependency", "major_power"};

constexpr int index(Variable v) { return static_cast<int>(v); }
std::string_view name(Variable v);
std::optional<Variable> parse_variable(std::string_view name);
bool is_binary(Variable v);

// One dyad-year. Values are on the raw scale when read from CSV and on the
// [0,1] scale once a Dataset has been normalized.
struct Dyad {
  std::string dyad_id;
  int year = 0;
  FeatureRow features{};
  int mid = 0;  // 0 = peace, 1 = conflict

  double& operator[](Variable v) { return features[index(v)]; }
  double operator[](Variable v) const { return features[index(v)]; }

  bool operator==(const Dyad&) const = default;
};

// Network-facing view: one row per pattern, targets in {0,1}.
struct Patterns {
  Eigen::MatrixXd inputs;   // n x d
  Eigen::VectorXd targets;  // n

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Dyad> dyads, bool normalized);

  const std::vector<Dyad>& dyads() const { return dyads_; }
  std::size_t size() const { return dyads_.size(); }
  bool empty() const { return dyads_.empty(); }
  bool normalized() const { return normalized_; }

  std::size_t count_label(int mid) const;

  Eigen::MatrixXd features() const;
  Eigen::VectorXd labels() const;
  Patterns patterns() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Dyad> dyads_;
  bool normalized_ = false;
};

enum class BoundSource { kTheoretical, kFitted };

struct VariableBounds {
  double lo = 0.0;
  double hi = 1.0;
  BoundSource source = BoundSource::kTheoretical;

  bool operator==(const VariableBounds&) const = default;
};

// Per-variable min-max bounds. Fitted once on training data and carried
// verbatim to test data and to the model file.
struct NormalizationSpec {
  std::array<VariableBounds, kNumVariables> bounds;

  static NormalizationSpec theoretical_defaults();

  double normalize(Variable v, double raw) const;
  double denormalize(Variable v, double scaled) const;
  FeatureRow normalize(const FeatureRow& raw) const;
  FeatureRow denormalize(const FeatureRow& scaled) const;

  bool operator==(const NormalizationSpec&) const = default;
};

// CSV ingestion. The header must be exactly kCsvHeader.
inline constexpr std::string_view kCsvHeader =
    "dyad_id,year,democracy,allies,contingency,distance,capability,"
    "dependency,major_power,mid";

Dataset parse_dyad_csv(const std::filesystem::path& path);
Dataset parse_dyad_csv(std::istream& in, std::string_view source_name = "<stream>");
void write_dyad_csv(const Dataset& ds, const std::filesystem::path& path);
void write_dyad_csv(const Dataset& ds, std::ostream& out);

// Checks the raw-scale invariants of a single dyad; throws kValidation.
void validate_raw(const Dyad& dyad);

// Fits bounds for distance, capability and dependency from `ds` when `spec`
// is empty; democracy always uses (-10, 10), binaries (0, 1). Values outside
// the bounds are clamped to [0,1].
std::pair<Dataset, NormalizationSpec> normalize(
    const Dataset& ds, const std::optional<NormalizationSpec>& spec);

struct Split {
  Dataset train;
  Dataset test;
};

// Samples n_per_class conflicts and n_per_class peace dyads without
// replacement; everything else becomes the test set. Both keep the source
// order of the input.
Split make_balanced_training_set(const Dataset& ds, std::size_t n_per_class,
                                 std::uint64_t seed);

// Stable content fingerprint (FNV-1a over the CSV rendering), used as model
// training metadata.
std::string fingerprint(const Dataset& ds);

// ---------------------------------------------------------------------------
// Synthetic dyad population.

struct Uniform {
  double lo;
  double hi;
};

struct GeneratorScenario {
  double p_allies = 0.3;
  double p_contingency = 0.4;
  double p_major_power = 0.5;
  Uniform distance{1.0, 4.0};    // log10 km
  Uniform capability{0.0, 3.0};  // log10 power ratio
  // dependency = dependency_max * u^2 with u ~ U(0,1): most dyads trade little.
  double dependency_max = 0.2;

  // Coefficients of the default ground-truth logit; see
  // default_conflict_probability.
  struct Coefficients {
    double intercept = -8.25;
    double autocracy_x_low_trade = 6.0;
    double autocracy_x_capability = 4.5;
    double contiguity_x_low_trade = 2.25;
    double allies = -1.5;
    double major_power = 1.2;
    double distance = -2.25;
    double dependency = -3.0;
  } risk;

  // Optional override of the ground truth g(x) (raw-scale dyad -> P(mid=1)).
  std::function<double(const Dyad&)> conflict_probability;

  static GeneratorScenario null_risk();
};

// The documented ground truth. With scaled inputs
//   D = (democracy + 10) / 20, P = dependency / dependency_max,
//   C = (capability - lo) / (hi - lo), S = (distance - lo) / (hi - lo),
// the logit is
//   intercept + 6.0 (1-D)(1-P) + 4.5 (1-D) C + 2.25 contingency (1-P)
//   - 1.5 allies + 1.2 major_power - 2.25 S - 3.0 P
// (default coefficients). Low democracy, low dependency, capability
// asymmetry and contiguity reinforce each other multiplicatively.
double default_conflict_probability(const Dyad& dyad, const GeneratorScenario& sc);

// Ground-truth probability under `sc` (honours the override).
double ground_truth_probability(const Dyad& dyad, const GeneratorScenario& sc);

Dataset generate_synthetic_population(std::size_t n, std::uint64_t seed,
                                      const GeneratorScenario& scenario = {});

}  // namespace midctl::data
