#include "midctl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "midctl/error.hpp"

namespace midctl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace midctl

namespace midctl::data {

std::string_view name(Variable v) { return kVariableNames[index(v)]; }

std::optional<Variable> parse_variable(std::string_view name) {
  for (int i = 0; i < kNumVariables; ++i) {
    if (kVariableNames[i] == name) return static_cast<Variable>(i);
  }
  return std::nullopt;
}

bool is_binary(Variable v) {
  return v == Variable::kAllies || v == Variable::kContingency ||
         v == Variable::kMajorPower;
}

Dataset::Dataset(std::vector<Dyad> dyads, bool normalized)
    : dyads_(std::move(dyads)), normalized_(normalized) {}

std::size_t Dataset::count_label(int mid) const {
  return static_cast<std::size_t>(std::count_if(
      dyads_.begin(), dyads_.end(), [mid](const Dyad& d) { return d.mid == mid; }));
}

Eigen::MatrixXd Dataset::features() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dyads_.size()), kNumVariables);
  for (std::size_t n = 0; n < dyads_.size(); ++n) {
    for (int i = 0; i < kNumVariables; ++i) {
      x(static_cast<Eigen::Index>(n), i) = dyads_[n].features[i];
    }
  }
  return x;
}

Eigen::VectorXd Dataset::labels() const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(dyads_.size()));
  for (std::size_t n = 0; n < dyads_.size(); ++n) {
    t(static_cast<Eigen::Index>(n)) = dyads_[n].mid;
  }
  return t;
}

Patterns Dataset::patterns() const { return {features(), labels()}; }

// ---------------------------------------------------------------------------
// Normalization

NormalizationSpec NormalizationSpec::theoretical_defaults() {
  NormalizationSpec spec;
  for (auto& b : spec.bounds) b = {0.0, 1.0, BoundSource::kTheoretical};
  spec.bounds[index(Variable::kDemocracy)] = {-10.0, 10.0, BoundSource::kTheoretical};
  return spec;
}

double NormalizationSpec::normalize(Variable v, double raw) const {
  const auto& b = bounds[index(v)];
  return std::clamp((raw - b.lo) / (b.hi - b.lo), 0.0, 1.0);
}

double NormalizationSpec::denormalize(Variable v, double scaled) const {
  const auto& b = bounds[index(v)];
  return b.lo + scaled * (b.hi - b.lo);
}

FeatureRow NormalizationSpec::normalize(const FeatureRow& raw) const {
  FeatureRow out;
  for (int i = 0; i < kNumVariables; ++i) {
    out[i] = normalize(static_cast<Variable>(i), raw[i]);
  }
  return out;
}

FeatureRow NormalizationSpec::denormalize(const FeatureRow& scaled) const {
  FeatureRow out;
  for (int i = 0; i < kNumVariables; ++i) {
    out[i] = denormalize(static_cast<Variable>(i), scaled[i]);
  }
  return out;
}

std::pair<Dataset, NormalizationSpec> normalize(
    const Dataset& ds, const std::optional<NormalizationSpec>& spec) {
  if (ds.normalized()) {
    throw Error(ErrorCode::kConfig, "dataset is already normalized");
  }
  NormalizationSpec used;
  if (spec) {
    used = *spec;
  } else {
    if (ds.empty()) {
      throw Error(ErrorCode::kInsufficientData,
                  "cannot fit normalization bounds on an empty dataset");
    }
    used = NormalizationSpec::theoretical_defaults();
    for (Variable v : {Variable::kDistance, Variable::kCapability, Variable::kDependency}) {
      auto [lo, hi] = std::minmax_element(
          ds.dyads().begin(), ds.dyads().end(),
          [v](const Dyad& a, const Dyad& b) { return a[v] < b[v]; });
      used.bounds[index(v)] = {(*lo)[v], (*hi)[v], BoundSource::kFitted};
    }
  }
  for (int i = 0; i < kNumVariables; ++i) {
    const auto& b = used.bounds[i];
    if (!(b.lo < b.hi)) {
      std::ostringstream msg;
      msg << "degenerate normalization bounds for " << kVariableNames[i] << ": lo="
          << b.lo << " hi=" << b.hi;
      throw Error(ErrorCode::kValidation, msg.str());
    }
  }

  std::vector<Dyad> out = ds.dyads();
  for (auto& d : out) d.features = used.normalize(d.features);
  return {Dataset(std::move(out), true), used};
}

// ---------------------------------------------------------------------------
// Balanced split

Split make_balanced_training_set(const Dataset& ds, std::size_t n_per_class,
                                 std::uint64_t seed) {
  std::vector<std::size_t> conflict, peace;
  for (std::size_t n = 0; n < ds.size(); ++n) {
    (ds.dyads()[n].mid == 1 ? conflict : peace).push_back(n);
  }
  if (conflict.size() < n_per_class || peace.size() < n_per_class) {
    std::ostringstream msg;
    msg << "balanced training set needs " << n_per_class
        << " dyads per class; available: conflict=" << conflict.size()
        << " peace=" << peace.size();
    throw Error(ErrorCode::kInsufficientData, msg.str());
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> in_train(ds.size(), false);
  for (auto* pool : {&conflict, &peace}) {
    std::shuffle(pool->begin(), pool->end(), rng);
    for (std::size_t k = 0; k < n_per_class; ++k) in_train[(*pool)[k]] = true;
  }

  std::vector<Dyad> train, test;
  train.reserve(2 * n_per_class);
  test.reserve(ds.size() - 2 * n_per_class);
  for (std::size_t n = 0; n < ds.size(); ++n) {
    (in_train[n] ? train : test).push_back(ds.dyads()[n]);
  }
  return {Dataset(std::move(train), ds.normalized()),
          Dataset(std::move(test), ds.normalized())};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view cell, std::string_view column, std::string_view source,
               std::size_t line_no) {
  T value{};
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    std::ostringstream msg;
    msg << source << ":" << line_no << ": column '" << column
        << "': not a number: '" << cell << "'";
    throw Error(ErrorCode::kParse, msg.str());
  }
  return value;
}

void check_binary(double v, std::string_view column, const std::string& where) {
  if (v != 0.0 && v != 1.0) {
    throw Error(ErrorCode::kValidation,
                where + ": " + std::string(column) + " must be 0 or 1");
  }
}

void validate_at(const Dyad& d, const std::string& where) {
  const double dem = d[Variable::kDemocracy];
  if (!(dem >= -10.0 && dem <= 10.0)) {
    std::ostringstream msg;
    msg << where << ": democracy " << dem << " outside [-10, 10]";
    throw Error(ErrorCode::kValidation, msg.str());
  }
  for (Variable v : {Variable::kAllies, Variable::kContingency, Variable::kMajorPower}) {
    check_binary(d[v], name(v), where);
  }
  for (Variable v : {Variable::kDistance, Variable::kCapability, Variable::kDependency}) {
    if (!std::isfinite(d[v])) {
      throw Error(ErrorCode::kValidation, where + ": " + std::string(name(v)) + " is not finite");
    }
  }
  if (d[Variable::kDependency] < 0.0) {
    throw Error(ErrorCode::kValidation, where + ": dependency must be >= 0");
  }
  if (d.mid != 0 && d.mid != 1) {
    throw Error(ErrorCode::kValidation, where + ": mid must be 0 or 1");
  }
}

}  // namespace

void validate_raw(const Dyad& dyad) { validate_at(dyad, "dyad '" + dyad.dyad_id + "'"); }

Dataset parse_dyad_csv(std::istream& in, std::string_view source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kSchema, std::string(source_name) + ": missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Tolerate a UTF-8 byte-order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  const auto header = split_fields(line);
  const auto expected = split_fields(kCsvHeader);
  for (const auto& col : expected) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      throw Error(ErrorCode::kSchema,
                  std::string(source_name) + ": missing column '" + std::string(col) + "'");
    }
  }
  if (header != expected) {
    throw Error(ErrorCode::kSchema, std::string(source_name) +
                                        ": header must be exactly '" +
                                        std::string(kCsvHeader) + "'");
  }

  std::vector<Dyad> dyads;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_fields(line);
    if (cells.size() != expected.size()) {
      std::ostringstream msg;
      msg << source_name << ":" << line_no << ": expected " << expected.size()
          << " fields, found " << cells.size();
      throw Error(ErrorCode::kParse, msg.str());
    }
    Dyad d;
    d.dyad_id = std::string(cells[0]);
    d.year = parse_number<int>(cells[1], expected[1], source_name, line_no);
    for (int i = 0; i < kNumVariables; ++i) {
      d.features[i] = parse_number<double>(cells[2 + i], expected[2 + i], source_name, line_no);
    }
    const double mid = parse_number<double>(cells[9], expected[9], source_name, line_no);
    std::ostringstream where;
    where << source_name << ":" << line_no;
    if (mid != 0.0 && mid != 1.0) {
      throw Error(ErrorCode::kValidation, where.str() + ": mid must be 0 or 1");
    }
    d.mid = static_cast<int>(mid);
    validate_at(d, where.str());
    dyads.push_back(std::move(d));
  }
  return Dataset(std::move(dyads), false);
}

Dataset parse_dyad_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_dyad_csv(in, path.string());
}

void write_dyad_csv(const Dataset& ds, std::ostream& out) {
  out << kCsvHeader << '\n';
  out << std::setprecision(17);
  for (const auto& d : ds.dyads()) {
    out << d.dyad_id << ',' << d.year;
    for (double v : d.features) out << ',' << v;
    out << ',' << d.mid << '\n';
  }
}

void write_dyad_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_dyad_csv(ds, out);
}

std::string fingerprint(const Dataset& ds) {
  std::ostringstream rendered;
  write_dyad_csv(ds, rendered);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : rendered.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream hex;
  hex << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

}  // namespace midctl::data
