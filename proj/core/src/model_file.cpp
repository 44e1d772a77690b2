#include "midctl/model_file.hpp"

#include <fstream>
#include <sstream>

#include "midctl/error.hpp"

namespace midctl::io {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json normalization_to_json(const data::NormalizationSpec& spec) {
  json out = json::array();
  for (int i = 0; i < data::kNumVariables; ++i) {
    const auto& b = spec.bounds[i];
    out.push_back({{"variable", data::kVariableNames[i]},
                   {"lo", b.lo},
                   {"hi", b.hi},
                   {"source", b.source == data::BoundSource::kFitted ? "fitted" : "theoretical"}});
  }
  return out;
}

data::NormalizationSpec normalization_from_json(const json& j) {
  if (!j.is_array() || j.size() != data::kNumVariables) {
    throw Error(ErrorCode::kSchema, "model normalization must list all seven variables");
  }
  data::NormalizationSpec spec;
  for (const auto& entry : j) {
    const auto v = data::parse_variable(entry.at("variable").get<std::string>());
    if (!v) throw Error(ErrorCode::kSchema, "unknown variable in model normalization");
    auto& b = spec.bounds[data::index(*v)];
    b.lo = entry.at("lo").get<double>();
    b.hi = entry.at("hi").get<double>();
    b.source = entry.at("source").get<std::string>() == "fitted" ? data::BoundSource::kFitted
                                                                 : data::BoundSource::kTheoretical;
  }
  return spec;
}

json hyperparameters_to_json(const mlp::HyperParameters& hp) {
  json groups = json::array();
  for (std::size_t g = 0; g < hp.groups.size(); ++g) {
    groups.push_back({{"name", hp.groups[g].name},
                      {"alpha", hp.alpha(static_cast<Eigen::Index>(g))},
                      {"indices", hp.groups[g].indices}});
  }
  return {{"beta", hp.beta}, {"groups", groups}};
}

mlp::HyperParameters hyperparameters_from_json(const json& j) {
  mlp::HyperParameters hp;
  hp.beta = j.at("beta").get<double>();
  const auto& groups = j.at("groups");
  hp.alpha.resize(static_cast<Eigen::Index>(groups.size()));
  Eigen::Index k = 0;
  for (const auto& g : groups) {
    hp.groups.push_back({g.at("name").get<std::string>(),
                         g.at("indices").get<std::vector<Eigen::Index>>()});
    hp.alpha(k++) = g.at("alpha").get<double>();
  }
  return hp;
}

}  // namespace

json architecture_to_json(const mlp::Architecture& a) {
  return {{"inputs", a.inputs},
          {"hidden", a.hidden},
          {"outputs", a.outputs},
          {"inner", mlp::to_string(a.inner)},
          {"outer", mlp::to_string(a.outer)}};
}

mlp::Architecture architecture_from_json(const json& j) {
  mlp::Architecture a;
  a.inputs = j.at("inputs").get<int>();
  a.hidden = j.at("hidden").get<int>();
  a.outputs = j.value("outputs", 1);
  const auto inner = mlp::parse_activation(j.at("inner").get<std::string>());
  const auto outer = mlp::parse_activation(j.at("outer").get<std::string>());
  if (!inner || !outer) throw Error(ErrorCode::kSchema, "unknown activation in architecture");
  a.inner = *inner;
  a.outer = *outer;
  a.validate();
  return a;
}

json to_json(const TrainedModel& m) {
  json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  j["method"] = std::string(to_string(m.method()));
  j["architecture"] = architecture_to_json(m.architecture());
  j["normalization"] = normalization_to_json(m.normalization());
  j["hyperparameters"] = hyperparameters_to_json(m.hyperparameters());
  if (const auto* g = m.gaussian()) {
    json hessian = json::array();
    for (Eigen::Index r = 0; r < g->hessian().rows(); ++r) {
      hessian.push_back(vector_to_json(g->hessian().row(r).transpose()));
    }
    j["gaussian"] = {{"w_map", vector_to_json(g->w_map())},
                     {"gamma", vector_to_json(g->gamma())},
                     {"hessian", hessian},
                     {"moderated", g->moderated()}};
  } else {
    const auto* e = m.ensemble();
    json samples = json::array();
    for (const auto& w : e->samples()) samples.push_back(vector_to_json(w));
    j["hmc"] = {{"acceptance_rate", e->acceptance_rate()}, {"samples", samples}};
  }
  const auto& meta = m.metadata();
  j["metadata"] = {{"seed", meta.seed},
                   {"dataset_fingerprint", meta.dataset_fingerprint},
                   {"patterns", meta.patterns},
                   {"created", meta.created}};
  return j;
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormatName) {
      throw Error(ErrorCode::kSchema, "not a midctl model file");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kSchema, "unsupported model format version");
    }
    const auto arch = architecture_from_json(j.at("architecture"));
    const auto norm = normalization_from_json(j.at("normalization"));
    const auto hp = hyperparameters_from_json(j.at("hyperparameters"));

    TrainingMetadata meta;
    const auto& mj = j.at("metadata");
    meta.seed = mj.at("seed").get<std::uint64_t>();
    meta.dataset_fingerprint = mj.at("dataset_fingerprint").get<std::string>();
    meta.patterns = mj.at("patterns").get<long>();
    meta.created = mj.value("created", "");

    const auto method = j.at("method").get<std::string>();
    if (method == "gaussian") {
      const auto& g = j.at("gaussian");
      const auto w = vector_from_json(g.at("w_map"));
      const auto& rows = g.at("hessian");
      Eigen::MatrixXd h(static_cast<Eigen::Index>(rows.size()), w.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = vector_from_json(rows[r]);
        if (row.size() != w.size()) throw Error(ErrorCode::kSchema, "Hessian row length mismatch");
        h.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      return TrainedModel(evidence::EvidenceModel(arch, w, hp, h, vector_from_json(g.at("gamma")),
                                                  norm, g.value("moderated", true)),
                          meta);
    }
    if (method == "hmc") {
      const auto& h = j.at("hmc");
      std::vector<mlp::WeightVector> samples;
      for (const auto& s : h.at("samples")) samples.push_back(vector_from_json(s));
      return TrainedModel(
          hmc::PosteriorEnsemble(arch, std::move(samples), h.at("acceptance_rate").get<double>(),
                                 hp, norm),
          meta);
    }
    throw Error(ErrorCode::kSchema, "unknown model method '" + method + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    // Inconsistent sizes or settings inside the document are schema problems too.
    if (e.code() == ErrorCode::kSchema) throw;
    throw Error(ErrorCode::kSchema, std::string("malformed model file: ") + e.what());
  }
}

std::string dump(const TrainedModel& m) { return to_json(m).dump(1) + "\n"; }

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << dump(m);
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace midctl::io
