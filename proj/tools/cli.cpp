#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "midctl/ard.hpp"
#include "midctl/control.hpp"
#include "midctl/data.hpp"
#include "midctl/error.hpp"
#include "midctl/eval.hpp"
#include "midctl/evidence.hpp"
#include "midctl/ga.hpp"
#include "midctl/hmc.hpp"
#include "midctl/model.hpp"
#include "midctl/model_file.hpp"
#include "service.hpp"

namespace midctl::cli {

namespace {

struct NetworkFlags {
  int hidden = 10;
  std::string inner = "tanh";
  std::string outer = "logistic";
  std::string arch_file;

  void add(CLI::App* sub) {
    sub->add_option("--hidden", hidden, "Hidden units")->capture_default_str();
    sub->add_option("--inner", inner, "Hidden activation")->capture_default_str();
    sub->add_option("--outer", outer, "Output activation")->capture_default_str();
    sub->add_option("--arch", arch_file, "Architecture JSON written by arch-search")
        ->check(CLI::ExistingFile);
  }

  mlp::Architecture resolve() const {
    mlp::Architecture a;
    if (!arch_file.empty()) {
      std::ifstream in(arch_file);
      nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::kParse, arch_file + ": not valid JSON");
      if (j.contains("architecture")) j = j["architecture"];
      a = io::architecture_from_json(j);
    } else {
      a.hidden = hidden;
      auto in = mlp::parse_activation(inner);
      auto out = mlp::parse_activation(outer);
      if (!in) throw Error(ErrorCode::kConfig, "unknown activation '" + inner + "'");
      if (!out) throw Error(ErrorCode::kConfig, "unknown activation '" + outer + "'");
      a.inner = *in;
      a.outer = *out;
    }
    a.validate();
    return a;
  }
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  return out;
}

data::Dataset subset(const data::Dataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<data::Dyad> rows;
  rows.reserve(idx.size());
  for (auto i : idx) rows.push_back(ds.dyads()[i]);
  return data::Dataset(std::move(rows), ds.normalized());
}

// Per-class random hold-out; both parts keep the source order.
std::pair<data::Dataset, data::Dataset> stratified_split(const data::Dataset& ds, double fraction,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fit, held;
  for (int label : {1, 0}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.dyads()[i].mid == label) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_held = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(idx.size())));
    if (n_held == 0 || n_held >= idx.size()) {
      throw Error(ErrorCode::kInsufficientData,
                  "cannot hold out " + std::to_string(n_held) + " of " +
                      std::to_string(idx.size()) + " dyads with mid=" + std::to_string(label));
    }
    held.insert(held.end(), idx.begin(), idx.begin() + static_cast<long>(n_held));
    fit.insert(fit.end(), idx.begin() + static_cast<long>(n_held), idx.end());
  }
  std::sort(fit.begin(), fit.end());
  std::sort(held.begin(), held.end());
  return {subset(ds, fit), subset(ds, held)};
}

std::vector<int> labels_of(const data::Dataset& ds) {
  std::vector<int> y;
  y.reserve(ds.size());
  for (const auto& d : ds.dyads()) y.push_back(d.mid);
  return y;
}

// --- synth ----------------------------------------------------------------

struct SynthFlags {
  std::size_t n = 20000;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t per_class = 0;
  std::string train_out;
  std::string test_out;
};

int run_synth(const SynthFlags& f, std::ostream& out) {
  const auto ds = data::generate_synthetic_population(f.n, f.seed);
  data::write_dyad_csv(ds, f.out);
  const auto conflicts = ds.count_label(1);
  out << "dyads " << ds.size() << "\nconflicts " << conflicts << "\nprevalence "
      << static_cast<double>(conflicts) / static_cast<double>(ds.size()) << "\n";
  if (f.per_class > 0) {
    if (f.train_out.empty() || f.test_out.empty()) {
      throw Error(ErrorCode::kConfig, "--per-class needs --train-out and --test-out");
    }
    const auto split = data::make_balanced_training_set(ds, f.per_class, f.seed);
    data::write_dyad_csv(split.train, f.train_out);
    data::write_dyad_csv(split.test, f.test_out);
    out << "train " << split.train.size() << "\ntest " << split.test.size() << "\n";
  }
  return kExitOk;
}

// --- train ----------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  std::string method = "gaussian";
  NetworkFlags net;
  std::string groups = "standard";
  double alpha = 0.01;
  int cycles = 5;
  int scg_iterations = 1000;
  bool no_moderation = false;
  double epsilon = hmc::HmcConfig{}.epsilon0;
  int leapfrog_steps = hmc::HmcConfig{}.leapfrog_steps;
  int samples = hmc::HmcConfig{}.n_samples;
  int burn_in = hmc::HmcConfig{}.burn_in;
  int thin = hmc::HmcConfig{}.thin;
  int chains = 1;
  bool stamp = false;
};

mlp::HyperParameters initial_hyperparameters(const std::string& groups,
                                             const mlp::Architecture& arch, double alpha) {
  if (groups == "single") return mlp::HyperParameters::single_group(arch, alpha);
  if (groups == "ard") return mlp::HyperParameters::ard(arch, alpha);
  return mlp::HyperParameters::standard(arch, alpha);
}

int run_train(const TrainFlags& f, std::ostream& out) {
  const auto arch = f.net.resolve();
  const auto raw = data::parse_dyad_csv(f.data);
  const auto [ds, norm] = data::normalize(raw, std::nullopt);
  const auto patterns = ds.patterns();

  evidence::EvidenceOptions opts;
  opts.cycles = f.cycles;
  opts.seed = f.seed;
  opts.scg.max_iterations = f.scg_iterations;
  auto fit = evidence::train_evidence(patterns, arch, initial_hyperparameters(f.groups, arch, f.alpha),
                                      opts, norm);
  evidence::EvidenceModel gaussian(arch, fit.model.w_map(), fit.model.hyperparameters(),
                                   fit.model.hessian(), fit.model.gamma(), norm, !f.no_moderation);

  TrainingMetadata meta{f.seed, data::fingerprint(raw), static_cast<long>(patterns.size()),
                        f.stamp ? utc_timestamp() : std::string()};

  for (const auto& c : fit.trace) {
    out << "cycle " << c.cycle << " objective " << c.objective << " scg_iterations "
        << c.scg_iterations << " gamma " << c.gamma.sum() << "\n";
  }

  if (f.method == "gaussian") {
    io::save_model(TrainedModel(std::move(gaussian), meta), f.out);
    out << "saved gaussian model to " << f.out << "\n";
    return kExitOk;
  }

  hmc::HmcConfig cfg;
  cfg.epsilon0 = f.epsilon;
  cfg.leapfrog_steps = f.leapfrog_steps;
  cfg.n_samples = f.samples;
  cfg.burn_in = f.burn_in;
  cfg.thin = f.thin;
  cfg.seed = f.seed;
  auto sampled = hmc::sample_posterior(patterns, arch, gaussian.hyperparameters(), cfg,
                                       gaussian.w_map(), norm, f.chains);
  out << "hmc acceptance_rate " << sampled.ensemble.acceptance_rate() << " samples "
      << sampled.ensemble.samples().size() << "\n";
  io::save_model(TrainedModel(std::move(sampled.ensemble), meta), f.out);
  out << "saved hmc model to " << f.out << "\n";
  return kExitOk;
}

// --- arch-search ----------------------------------------------------------

struct ArchSearchFlags {
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  int population = 20;
  int generations = 20;
  double validation_fraction = 0.3;
  int scg_iterations = 100;
  std::string fitness = "auc";
  bool parallel = false;
};

int run_arch_search(const ArchSearchFlags& f, std::ostream& out) {
  const auto raw = data::parse_dyad_csv(f.data);
  const auto [ds, norm] = data::normalize(raw, std::nullopt);
  const auto [fit_set, held] = stratified_split(ds, f.validation_fraction, f.seed);
  const auto train_p = fit_set.patterns();
  const auto val_p = held.patterns();

  ga::TrainingFitnessOptions fo;
  fo.kind = f.fitness == "auc" ? ga::FitnessKind::kValidationAuc
                               : ga::FitnessKind::kValidationCrossEntropy;
  fo.scg_iterations = f.scg_iterations;
  fo.seed = f.seed;
  ga::GaConfig cfg;
  cfg.population = f.population;
  cfg.generations = f.generations;
  cfg.parallel = f.parallel;
  cfg.seed = f.seed;
  const auto result = ga::evolve(ga::make_training_fitness(train_p, val_p, fo), cfg);

  for (const auto& g : result.history) {
    out << "generation " << g.index << " best " << g.best << " mean " << g.mean << " best_ever "
        << g.best_ever << "\n";
  }
  const auto j = io::architecture_to_json(result.best);
  out << "best " << result.best_chromosome.to_string() << " fitness " << result.best_fitness
      << "\n"
      << j.dump() << "\n";
  if (!f.out.empty()) open_output(f.out) << j.dump(1) << "\n";
  return kExitOk;
}

// --- evaluate -------------------------------------------------------------

struct EvaluateFlags {
  std::string model;
  std::string data;
  double threshold = 0.5;
  std::string report;
};

int run_evaluate(const EvaluateFlags& f, std::ostream& out) {
  const auto model = io::load_model(f.model);
  const auto raw = data::parse_dyad_csv(f.data);
  const auto [ds, norm] = data::normalize(raw, model.normalization());
  const auto scores = model.predict_all(ds);
  const auto labels = labels_of(ds);

  const auto cm = eval::confusion(scores, labels, f.threshold);
  out << "threshold " << f.threshold << "\n"
      << "                 pred_conflict  pred_peace\n"
      << "actual_conflict  " << std::setw(13) << cm.tc << "  " << std::setw(10) << cm.fp << "\n"
      << "actual_peace     " << std::setw(13) << cm.fc << "  " << std::setw(10) << cm.tp << "\n"
      << "tc " << cm.tc << " fp " << cm.fp << " tp " << cm.tp << " fc " << cm.fc << "\n"
      << "true_conflict_rate " << cm.true_positive_rate() << "\n"
      << "true_peace_rate " << cm.true_negative_rate() << "\n"
      << "accuracy " << cm.accuracy() << "\n";
  const auto roc = eval::roc_auc(scores, labels);
  out << "auc " << roc.auc << "\n";
  if (!f.report.empty()) {
    auto csv = open_output(f.report);
    csv << std::setprecision(17) << "fpr,tpr,threshold\n";
    for (const auto& p : roc.points) csv << p.fpr << "," << p.tpr << "," << p.threshold << "\n";
  }
  return kExitOk;
}

// --- ard ------------------------------------------------------------------

struct ArdFlags {
  std::string data;
  std::string out;
  std::string report;
  std::uint64_t seed = 0;
  NetworkFlags net;
  int cycles = 5;
  int restarts = 5;
  double alpha = 1.0;
  int scg_iterations = 1000;
};

int run_ard(const ArdFlags& f, std::ostream& out) {
  const auto arch = f.net.resolve();
  const auto raw = data::parse_dyad_csv(f.data);
  const auto [ds, norm] = data::normalize(raw, std::nullopt);
  ard::ArdOptions opts;
  opts.cycles = f.cycles;
  opts.restarts = f.restarts;
  opts.initial_alpha = f.alpha;
  opts.seed = f.seed;
  opts.scg.max_iterations = f.scg_iterations;
  const auto r = ard::train_ard(ds.patterns(), arch, opts, norm);

  out << "variable     relevance\n";
  for (int i : r.ranking) {
    out << std::left << std::setw(12) << r.names[static_cast<std::size_t>(i)] << " "
        << r.relevance(i) << "\n";
  }
  if (!f.report.empty()) {
    auto csv = open_output(f.report);
    csv << std::setprecision(17) << "variable,relevance,normalized,rank";
    for (std::size_t k = 0; k < r.restart_relevance.size(); ++k) csv << ",restart_" << k;
    csv << "\n";
    for (std::size_t pos = 0; pos < r.ranking.size(); ++pos) {
      const int i = r.ranking[pos];
      csv << r.names[static_cast<std::size_t>(i)] << "," << r.relevance(i) << ","
          << r.normalized(i) << "," << pos + 1;
      for (const auto& rr : r.restart_relevance) csv << "," << rr(i);
      csv << "\n";
    }
  }
  if (!f.out.empty()) {
    TrainingMetadata meta{f.seed, data::fingerprint(raw), static_cast<long>(ds.size()), ""};
    io::save_model(TrainedModel(r.model, meta), f.out);
    out << "saved gaussian ARD model to " << f.out << "\n";
  }
  return kExitOk;
}

// --- control --------------------------------------------------------------

struct ControlFlags {
  std::string model;
  std::string data;
  std::string strategy = "multi";
  double threshold = 0.5;
  std::string report;
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_control(const ControlFlags& f, std::ostream& out) {
  const auto strategy = control::Strategy::parse(f.strategy);
  const auto model = io::load_model(f.model);
  const auto raw = data::parse_dyad_csv(f.data);
  const auto [ds, norm] = data::normalize(raw, model.normalization());
  const auto report = control::control_campaign(model.predictor(), ds, strategy, f.threshold, {},
                                                f.seed, f.threads);
  out << "strategy " << strategy.to_string() << "\n"
      << "selected " << report.selected() << "\n"
      << "successes " << report.successes << "\n"
      << "avoidance_rate " << report.avoidance_rate() << "\n";
  if (strategy.kind == control::Strategy::Kind::kMulti ||
      strategy.variable == data::Variable::kAllies) {
    out << "rounded_allies_avoidance_rate " << report.rounded_avoidance_rate() << "\n";
  }
  for (const auto& s : report.summaries) {
    out << "mean_change " << data::name(s.variable) << " " << s.mean_change << "\n";
  }
  if (!f.report.empty()) {
    auto csv = open_output(f.report);
    control::write_campaign_csv(report, model.normalization(), csv);
  }
  return kExitOk;
}

// --- serve ----------------------------------------------------------------

struct ServeFlags {
  std::string model;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeFlags& f) {
  service::Service svc(io::load_model(f.model));
  return service::serve(svc, f.host, f.port);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian neural-network models of militarized interstate disputes", "midctl"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a synthetic dyad population");
  s_synth->add_option("--n", synth.n, "Number of dyads")->capture_default_str();
  s_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s_synth->add_option("--out", synth.out, "Population CSV")->required();
  s_synth->add_option("--per-class", synth.per_class, "Also write a balanced training split");
  s_synth->add_option("--train-out", synth.train_out, "Balanced training CSV");
  s_synth->add_option("--test-out", synth.test_out, "Remaining dyads CSV");

  TrainFlags train;
  auto* s_train = app.add_subcommand("train", "Train a Gaussian-approximation or HMC model");
  s_train->add_option("--data", train.data, "Training CSV")->required()->check(CLI::ExistingFile);
  s_train->add_option("--out", train.out, "Model file")->required();
  s_train->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  s_train->add_option("--method", train.method, "gaussian or hmc")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "hmc"}));
  train.net.add(s_train);
  s_train->add_option("--groups", train.groups, "Weight-decay groups: single, standard or ard")
      ->capture_default_str()
      ->check(CLI::IsMember({"single", "standard", "ard"}));
  s_train->add_option("--alpha", train.alpha, "Initial weight-decay coefficient")
      ->capture_default_str();
  s_train->add_option("--cycles", train.cycles, "Evidence re-estimation cycles")
      ->capture_default_str();
  s_train->add_option("--scg-iterations", train.scg_iterations, "SCG iterations per cycle")
      ->capture_default_str();
  s_train->add_flag("--no-moderation", train.no_moderation, "Plain MAP output for predictions");
  s_train->add_option("--epsilon", train.epsilon, "HMC base step size")->capture_default_str();
  s_train->add_option("--leapfrog-steps", train.leapfrog_steps, "HMC leapfrog steps")
      ->capture_default_str();
  s_train->add_option("--samples", train.samples, "HMC retained samples")->capture_default_str();
  s_train->add_option("--burn-in", train.burn_in, "HMC burn-in transitions")
      ->capture_default_str();
  s_train->add_option("--thin", train.thin, "HMC thinning interval")->capture_default_str();
  s_train->add_option("--chains", train.chains, "HMC chains")->capture_default_str();
  s_train->add_flag("--stamp", train.stamp, "Record a creation timestamp in the model file");

  ArchSearchFlags search;
  auto* s_search = app.add_subcommand("arch-search", "Genetic search over network architectures");
  s_search->add_option("--data", search.data, "Training CSV")->required()->check(CLI::ExistingFile);
  s_search->add_option("--out", search.out, "Architecture JSON");
  s_search->add_option("--seed", search.seed, "Random seed")->capture_default_str();
  s_search->add_option("--population", search.population, "Population size")
      ->capture_default_str();
  s_search->add_option("--generations", search.generations, "Generations")->capture_default_str();
  s_search->add_option("--validation-fraction", search.validation_fraction,
                       "Per-class hold-out fraction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  s_search->add_option("--scg-iterations", search.scg_iterations, "SCG budget per candidate")
      ->capture_default_str();
  s_search->add_option("--fitness", search.fitness, "auc or cross-entropy")
      ->capture_default_str()
      ->check(CLI::IsMember({"auc", "cross-entropy"}));
  s_search->add_flag("--parallel", search.parallel, "Evaluate candidates concurrently");

  EvaluateFlags evaluate;
  auto* s_eval = app.add_subcommand("evaluate", "Confusion matrix and ROC of a model on a CSV");
  s_eval->add_option("--model", evaluate.model, "Model file")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--data", evaluate.data, "Test CSV")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--threshold", evaluate.threshold, "Conflict threshold")
      ->capture_default_str();
  s_eval->add_option("--report", evaluate.report, "ROC points CSV");

  ArdFlags ardf;
  auto* s_ard = app.add_subcommand("ard", "Rank input relevance with per-input priors");
  s_ard->add_option("--data", ardf.data, "Training CSV")->required()->check(CLI::ExistingFile);
  s_ard->add_option("--out", ardf.out, "Model file of the first restart");
  s_ard->add_option("--report", ardf.report, "Relevance CSV");
  s_ard->add_option("--seed", ardf.seed, "Random seed")->capture_default_str();
  ardf.net.add(s_ard);
  s_ard->add_option("--cycles", ardf.cycles, "Evidence re-estimation cycles")->capture_default_str();
  s_ard->add_option("--restarts", ardf.restarts, "Independent restarts")->capture_default_str();
  s_ard->add_option("--alpha", ardf.alpha, "Initial weight-decay coefficient")
      ->capture_default_str();
  s_ard->add_option("--scg-iterations", ardf.scg_iterations, "SCG iterations per cycle")
      ->capture_default_str();

  ControlFlags ctl;
  auto* s_ctl = app.add_subcommand("control", "Search for peace-inducing interventions");
  s_ctl->add_option("--model", ctl.model, "Model file")->required()->check(CLI::ExistingFile);
  s_ctl->add_option("--data", ctl.data, "Test CSV")->required()->check(CLI::ExistingFile);
  s_ctl->add_option("--strategy", ctl.strategy, "multi or single:<variable>")
      ->capture_default_str();
  s_ctl->add_option("--threshold", ctl.threshold, "Conflict threshold")->capture_default_str();
  s_ctl->add_option("--report", ctl.report, "Campaign CSV");
  s_ctl->add_option("--seed", ctl.seed, "Random seed")->capture_default_str();
  s_ctl->add_option("--threads", ctl.threads, "Worker threads (0 = hardware)")
      ->capture_default_str();

  ServeFlags serve;
  auto* s_serve = app.add_subcommand("serve", "Serve the JSON API for a model");
  s_serve->add_option("--model", serve.model, "Model file")->required()->check(CLI::ExistingFile);
  s_serve->add_option("--host", serve.host, "Bind address")->capture_default_str();
  s_serve->add_option("--port", serve.port, "TCP port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.help() << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s_synth->parsed()) return run_synth(synth, out);
    if (s_train->parsed()) return run_train(train, out);
    if (s_search->parsed()) return run_arch_search(search, out);
    if (s_eval->parsed()) return run_evaluate(evaluate, out);
    if (s_ard->parsed()) return run_ard(ardf, out);
    if (s_ctl->parsed()) return run_control(ctl, out);
    if (s_serve->parsed()) return run_serve(serve);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"midctl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace midctl::cli
