#include "midctl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "midctl/error.hpp"

namespace midctl::mlp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMap = Eigen::Map<const MatrixXd>;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// Vectorized forms built on Eigen's packet exp; the scalar std::tanh is the
// bottleneck of every forward pass otherwise. Below |a| = 1e-2 the series
// keeps full relative precision where 1 - exp(-2|a|) would cancel.
void tanh_inplace(MatrixXd& m) {
  auto a = m.array();
  const Eigen::ArrayXXd t = (-2.0 * a.abs()).exp();
  const Eigen::ArrayXXd big = a.sign() * (1.0 - t) / (1.0 + t);
  const Eigen::ArrayXXd a2 = a.square();
  const Eigen::ArrayXXd small = a * (1.0 + a2 * (-1.0 / 3.0 + a2 * (2.0 / 15.0 - a2 * (17.0 / 315.0))));
  m = (a.abs() < 1e-2).select(small, big).matrix();
}

void logistic_inplace(MatrixXd& m) {
  m = (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

void activate(Activation f, MatrixXd& m) {
  switch (f) {
    case Activation::kLinear:
      break;
    case Activation::kLogistic:
      logistic_inplace(m);
      break;
    case Activation::kTanh:
      tanh_inplace(m);
      break;
    case Activation::kSoftmax:
      for (Index r = 0; r < m.rows(); ++r) {
        const double top = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - top).exp().matrix();
        m.row(r) /= m.row(r).sum();
      }
      break;
  }
}

// Given activated values z and upstream gradient g = dE/dz, returns dE/da.
MatrixXd backprop(Activation f, const MatrixXd& z, const MatrixXd& g) {
  switch (f) {
    case Activation::kLinear:
      return g;
    case Activation::kLogistic:
      return (g.array() * z.array() * (1.0 - z.array())).matrix();
    case Activation::kTanh:
      return (g.array() * (1.0 - z.array().square())).matrix();
    case Activation::kSoftmax: {
      const VectorXd dot = (z.array() * g.array()).rowwise().sum();
      return (z.array() * (g.colwise() - dot).array()).matrix();
    }
  }
  return g;
}

struct Views {
  ConstMap w1;  // M x d, element (j, i)
  Eigen::Map<const VectorXd> b1;
  ConstMap w2t;  // M x K, element (j, k)
  Eigen::Map<const VectorXd> b2;
};

Views views(const Architecture& a, const WeightVector& w) {
  const Index d = a.inputs, m = a.hidden, k = a.outputs;
  const double* base = w.data();
  return {ConstMap(base, m, d), Eigen::Map<const VectorXd>(base + d * m, m),
          ConstMap(base + (d + 1) * m, m, k),
          Eigen::Map<const VectorXd>(base + (d + 1) * m + k * m, k)};
}

void check_weights(const Architecture& a, const WeightVector& w) {
  if (w.size() != a.num_weights()) {
    std::ostringstream msg;
    msg << "weight vector length mismatch: expected " << a.num_weights() << ", got "
        << w.size();
    throw Error(ErrorCode::kDimension, msg.str());
  }
}

void check_inputs(const Architecture& a, Index cols) {
  if (cols != a.inputs) {
    std::ostringstream msg;
    msg << "input dimension mismatch: expected " << a.inputs << ", got " << cols;
    throw Error(ErrorCode::kDimension, msg.str());
  }
}

void check_patterns(const Architecture& a, const data::Patterns& p) {
  check_inputs(a, p.inputs.cols());
  if (p.targets.size() != p.inputs.rows()) {
    throw Error(ErrorCode::kDimension, "pattern count and target count differ");
  }
  if (a.outputs != 1) {
    throw Error(ErrorCode::kConfig, "training supports single-output networks only");
  }
  for (Index n = 0; n < p.targets.size(); ++n) {
    const double t = p.targets(n);
    if (t != 0.0 && t != 1.0) {
      std::ostringstream msg;
      msg << "target at row " << n << " is " << t << ", expected 0 or 1";
      throw Error(ErrorCode::kValidation, msg.str());
    }
  }
}

struct Pass {
  MatrixXd hidden;  // n x M, activated
  MatrixXd pre;     // n x K, output pre-activation
  MatrixXd out;     // n x K
};

Pass run(const Architecture& a, const WeightVector& w, const MatrixXd& x) {
  const auto v = views(a, w);
  Pass p;
  p.hidden = x * v.w1.transpose();
  p.hidden.rowwise() += v.b1.transpose();
  activate(a.inner, p.hidden);
  p.pre = p.hidden * v.w2t;
  p.pre.rowwise() += v.b2.transpose();
  p.out = p.pre;
  activate(a.outer, p.out);
  return p;
}

// Writes d(error)/d(output pre-activation) per pattern (n x 1) and returns the
// error, for a single-output network.
double output_error(const Architecture& a, const Pass& pass, const VectorXd& t, double beta,
                    MatrixXd* delta) {
  const Index n = t.size();
  double e = 0.0;
  if (delta) delta->resize(n, 1);
  if (a.outer == Activation::kLogistic) {
    for (Index r = 0; r < n; ++r) {
      const double act = pass.pre(r, 0);
      e += t(r) * softplus(-act) + (1.0 - t(r)) * softplus(act);
      if (delta) (*delta)(r, 0) = beta * (pass.out(r, 0) - t(r));
    }
    return beta * e;
  }
  MatrixXd dy(n, 1);
  for (Index r = 0; r < n; ++r) {
    const double y = pass.out(r, 0);
    const double yc = std::clamp(y, kOutputEpsilon, 1.0 - kOutputEpsilon);
    e -= t(r) * std::log(yc) + (1.0 - t(r)) * std::log(1.0 - yc);
    const bool clamped = y != yc;
    dy(r, 0) = clamped ? 0.0 : beta * (-(t(r) / y) + (1.0 - t(r)) / (1.0 - y));
  }
  if (delta) *delta = backprop(a.outer, pass.out, dy);
  return beta * e;
}

// Accumulates into `grad` the weight gradient given output deltas (n x K).
void accumulate_gradient(const Architecture& a, const WeightVector& w, const MatrixXd& x,
                         const Pass& pass, const MatrixXd& delta_out, VectorXd& grad) {
  const Index d = a.inputs, m = a.hidden, k = a.outputs;
  const auto v = views(a, w);
  Eigen::Map<MatrixXd> g1(grad.data(), m, d);
  Eigen::Map<VectorXd> gb1(grad.data() + d * m, m);
  Eigen::Map<MatrixXd> g2t(grad.data() + (d + 1) * m, m, k);
  Eigen::Map<VectorXd> gb2(grad.data() + (d + 1) * m + k * m, k);

  g2t += pass.hidden.transpose() * delta_out;
  gb2 += delta_out.colwise().sum().transpose();
  const MatrixXd dz = delta_out * v.w2t.transpose();
  const MatrixXd delta_hidden = backprop(a.inner, pass.hidden, dz);
  g1 += delta_hidden.transpose() * x;
  gb1 += delta_hidden.colwise().sum().transpose();
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kLogistic: return "logistic";
    case Activation::kTanh: return "tanh";
    case Activation::kSoftmax: return "softmax";
  }
  return "unknown";
}

std::optional<Activation> parse_activation(std::string_view name) {
  for (auto a : {Activation::kLinear, Activation::kLogistic, Activation::kTanh,
                 Activation::kSoftmax}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

Index Architecture::num_weights() const {
  return static_cast<Index>(hidden) * (inputs + 1) + static_cast<Index>(outputs) * (hidden + 1);
}

void Architecture::validate() const {
  std::ostringstream msg;
  if (inputs < 1) msg << "inputs must be >= 1 (got " << inputs << ")";
  else if (hidden < 1 || hidden > kMaxHidden)
    msg << "hidden units must be in [1, " << kMaxHidden << "] (got " << hidden << ")";
  else if (outputs < 1) msg << "outputs must be >= 1 (got " << outputs << ")";
  if (!msg.str().empty()) throw Error(ErrorCode::kConfig, msg.str());
}

namespace layout {
Index first_layer(const Architecture& a, int input, int hidden_unit) {
  return static_cast<Index>(input) * a.hidden + hidden_unit;
}
Index hidden_bias(const Architecture& a, int hidden_unit) {
  return static_cast<Index>(a.inputs) * a.hidden + hidden_unit;
}
Index second_layer(const Architecture& a, int output, int hidden_unit) {
  return static_cast<Index>(a.inputs + 1) * a.hidden + static_cast<Index>(output) * a.hidden +
         hidden_unit;
}
Index output_bias(const Architecture& a, int output) {
  return static_cast<Index>(a.inputs + 1) * a.hidden +
         static_cast<Index>(a.outputs) * a.hidden + output;
}
}  // namespace layout

namespace {
std::vector<Index> range(Index begin, Index end) {
  std::vector<Index> r(static_cast<std::size_t>(end - begin));
  std::iota(r.begin(), r.end(), begin);
  return r;
}
}  // namespace

HyperParameters HyperParameters::single_group(const Architecture& a, double alpha) {
  HyperParameters hp;
  hp.groups.push_back({"all", range(0, a.num_weights())});
  hp.alpha = VectorXd::Constant(1, alpha);
  return hp;
}

HyperParameters HyperParameters::standard(const Architecture& a, double alpha) {
  const Index d = a.inputs, m = a.hidden, k = a.outputs;
  HyperParameters hp;
  hp.groups.push_back({"first_layer", range(0, d * m)});
  hp.groups.push_back({"hidden_bias", range(d * m, (d + 1) * m)});
  hp.groups.push_back({"second_layer", range((d + 1) * m, (d + 1) * m + k * m)});
  hp.groups.push_back({"output_bias", range((d + 1) * m + k * m, a.num_weights())});
  hp.alpha = VectorXd::Constant(4, alpha);
  return hp;
}

HyperParameters HyperParameters::ard(const Architecture& a, double alpha) {
  const Index d = a.inputs, m = a.hidden, k = a.outputs;
  HyperParameters hp;
  for (Index i = 0; i < d; ++i) {
    std::string name = "input:";
    name += a.inputs == data::kNumVariables ? std::string(data::kVariableNames[i])
                                            : std::to_string(i);
    hp.groups.push_back({name, range(i * m, (i + 1) * m)});
  }
  hp.groups.push_back({"hidden_bias", range(d * m, (d + 1) * m)});
  hp.groups.push_back({"second_layer", range((d + 1) * m, (d + 1) * m + k * m)});
  hp.groups.push_back({"output_bias", range((d + 1) * m + k * m, a.num_weights())});
  hp.alpha = VectorXd::Constant(static_cast<Index>(hp.groups.size()), alpha);
  return hp;
}

void HyperParameters::validate(Index num_weights) const {
  if (alpha.size() != static_cast<Index>(groups.size())) {
    throw Error(ErrorCode::kConfig, "one alpha per weight group is required");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::kConfig, "beta must be positive");
  }
  std::vector<int> seen(static_cast<std::size_t>(num_weights), 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (!(alpha(static_cast<Index>(g)) >= 0.0) || !std::isfinite(alpha(static_cast<Index>(g)))) {
      throw Error(ErrorCode::kConfig, "alpha for group '" + groups[g].name + "' must be >= 0");
    }
    for (Index i : groups[g].indices) {
      if (i < 0 || i >= num_weights) {
        throw Error(ErrorCode::kConfig,
                    "group '" + groups[g].name + "' references a weight out of range");
      }
      ++seen[static_cast<std::size_t>(i)];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw Error(ErrorCode::kConfig, "weight groups must partition the weight vector");
  }
}

VectorXd HyperParameters::per_weight_alpha(Index num_weights) const {
  VectorXd out = VectorXd::Zero(num_weights);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (Index i : groups[g].indices) out(i) = alpha(static_cast<Index>(g));
  }
  return out;
}

WeightVector initialize_weights(const Architecture& a, std::uint64_t seed) {
  a.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> first(0.0, 1.0 / std::sqrt(static_cast<double>(a.inputs)));
  std::normal_distribution<double> second(0.0, 1.0 / std::sqrt(static_cast<double>(a.hidden)));
  WeightVector w(a.num_weights());
  const Index split = static_cast<Index>(a.inputs + 1) * a.hidden;
  for (Index i = 0; i < w.size(); ++i) w(i) = i < split ? first(rng) : second(rng);
  return w;
}

VectorXd forward(const Architecture& a, const WeightVector& w, std::span<const double> x) {
  check_weights(a, w);
  check_inputs(a, static_cast<Index>(x.size()));
  const MatrixXd row = Eigen::Map<const MatrixXd>(x.data(), 1, a.inputs);
  return run(a, w, row).out.row(0).transpose();
}

void apply_activation(Activation f, MatrixXd& m) { activate(f, m); }

double predict(const Architecture& a, const WeightVector& w, std::span<const double> x) {
  return forward(a, w, x)(0);
}

MatrixXd forward_batch(const Architecture& a, const WeightVector& w, const MatrixXd& inputs) {
  check_weights(a, w);
  check_inputs(a, inputs.cols());
  return run(a, w, inputs).out;
}

double output_preactivation(const Architecture& a, const WeightVector& w,
                            std::span<const double> x) {
  check_weights(a, w);
  check_inputs(a, static_cast<Index>(x.size()));
  const MatrixXd row = Eigen::Map<const MatrixXd>(x.data(), 1, a.inputs);
  return run(a, w, row).pre(0, 0);
}

VectorXd output_preactivation_gradient(const Architecture& a, const WeightVector& w,
                                       std::span<const double> x) {
  check_weights(a, w);
  check_inputs(a, static_cast<Index>(x.size()));
  const MatrixXd row = Eigen::Map<const MatrixXd>(x.data(), 1, a.inputs);
  const Pass pass = run(a, w, row);
  MatrixXd unit = MatrixXd::Zero(1, a.outputs);
  unit(0, 0) = 1.0;
  VectorXd g = VectorXd::Zero(w.size());
  accumulate_gradient(a, w, row, pass, unit, g);
  return g;
}

double data_error(const Architecture& a, const WeightVector& w, double beta,
                  const data::Patterns& p) {
  check_weights(a, w);
  check_patterns(a, p);
  if (p.size() == 0) return 0.0;
  return output_error(a, run(a, w, p.inputs), p.targets, beta, nullptr);
}

VectorXd data_gradient(const Architecture& a, const WeightVector& w, double beta,
                       const data::Patterns& p) {
  check_weights(a, w);
  check_patterns(a, p);
  VectorXd g = VectorXd::Zero(w.size());
  if (p.size() == 0) return g;
  const Pass pass = run(a, w, p.inputs);
  MatrixXd delta;
  output_error(a, pass, p.targets, beta, &delta);
  accumulate_gradient(a, w, p.inputs, pass, delta, g);
  return g;
}

double neg_log_posterior(const Architecture& a, const WeightVector& w,
                         const HyperParameters& hp, const data::Patterns& p) {
  hp.validate(a.num_weights());
  const VectorXd alpha = hp.per_weight_alpha(w.size());
  return data_error(a, w, hp.beta, p) + 0.5 * (alpha.array() * w.array().square()).sum();
}

VectorXd gradient(const Architecture& a, const WeightVector& w, const HyperParameters& hp,
                  const data::Patterns& p) {
  hp.validate(a.num_weights());
  VectorXd g = data_gradient(a, w, hp.beta, p);
  g.array() += hp.per_weight_alpha(w.size()).array() * w.array();
  return g;
}

MatrixXd data_hessian(const Architecture& a, const WeightVector& w, double beta,
                      const data::Patterns& p) {
  check_weights(a, w);
  check_patterns(a, p);
  const Index n = p.size(), nw = w.size();
  MatrixXd h = MatrixXd::Zero(nw, nw);
  if (n == 0) return h;

  const Pass pass = run(a, w, p.inputs);
  // Fisher information of the Bernoulli likelihood with respect to the output
  // pre-activation: f'(a)^2 / (y (1 - y)), which is y (1 - y) for logistic.
  VectorXd curvature(n);
  for (Index r = 0; r < n; ++r) {
    const double y = pass.out(r, 0);
    if (a.outer == Activation::kLogistic) {
      curvature(r) = y * (1.0 - y);
      continue;
    }
    const double yc = std::clamp(y, kOutputEpsilon, 1.0 - kOutputEpsilon);
    double slope = 0.0;
    switch (a.outer) {
      case Activation::kLinear: slope = 1.0; break;
      case Activation::kTanh: slope = 1.0 - y * y; break;
      default: slope = 0.0; break;  // single-unit softmax is constant
    }
    curvature(r) = y == yc ? slope * slope / (yc * (1.0 - yc)) : 0.0;
  }

  // Rows of `jac` are d a_n / d w.
  MatrixXd jac(n, nw);
  const auto v = views(a, w);
  const Index d = a.inputs, m = a.hidden;
  MatrixXd dz = MatrixXd::Ones(n, 1) * v.w2t.col(0).transpose();  // n x M
  const MatrixXd delta_hidden = backprop(a.inner, pass.hidden, dz);
  for (Index i = 0; i < d; ++i) {
    jac.middleCols(i * m, m) = delta_hidden.array().colwise() * p.inputs.col(i).array();
  }
  jac.middleCols(d * m, m) = delta_hidden;
  jac.middleCols((d + 1) * m, m) = pass.hidden;
  jac.col(nw - 1).setOnes();

  const VectorXd weight = (beta * curvature.array()).sqrt();
  const MatrixXd scaled = weight.asDiagonal() * jac;
  h.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  return h.selfadjointView<Eigen::Lower>();
}

}  // namespace midctl::mlp
