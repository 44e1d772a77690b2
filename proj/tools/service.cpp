#include "service.hpp"

#include <cmath>
#include <iostream>

#include <httplib.h>

#include "midctl/ard.hpp"
#include "midctl/error.hpp"
#include "midctl/model_file.hpp"

namespace midctl::service {

using nlohmann::json;
using data::Variable;

namespace {

struct BadRequest {
  std::string field;
  std::string message;
};

Response bad_request(const BadRequest& e) {
  json body = {{"error", e.message}};
  if (!e.field.empty()) body["field"] = e.field;
  return {400, body};
}

json parse_body(std::string_view body) {
  json j = json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest{"", "request body must be a JSON object"};
  return j;
}

// Reads the seven raw-scale variables and applies the data-module range rules.
data::FeatureRow raw_features(const json& j) {
  data::FeatureRow raw{};
  for (int i = 0; i < data::kNumVariables; ++i) {
    const std::string field(data::kVariableNames[i]);
    if (!j.contains(field)) throw BadRequest{field, "missing field"};
    const auto& v = j.at(field);
    if (!v.is_number()) throw BadRequest{field, "must be a number"};
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw BadRequest{field, "must be finite"};
    const auto var = static_cast<Variable>(i);
    if (var == Variable::kDemocracy && (x < -10.0 || x > 10.0)) {
      throw BadRequest{field, "must lie in [-10, 10]"};
    }
    if (data::is_binary(var) && x != 0.0 && x != 1.0) throw BadRequest{field, "must be 0 or 1"};
    if (var == Variable::kDependency && x < 0.0) throw BadRequest{field, "must be >= 0"};
    raw[i] = x;
  }
  return raw;
}

json features_json(const data::FeatureRow& raw) {
  json out = json::object();
  for (int i = 0; i < data::kNumVariables; ++i) out[std::string(data::kVariableNames[i])] = raw[i];
  return out;
}

// Raw-scale view of a normalized row: unchanged entries echo the request.
data::FeatureRow to_raw(const data::FeatureRow& scaled, const data::FeatureRow& scaled_original,
                        const data::FeatureRow& raw_original,
                        const data::NormalizationSpec& norm) {
  data::FeatureRow out = raw_original;
  for (int i = 0; i < data::kNumVariables; ++i) {
    if (scaled[i] != scaled_original[i]) {
      out[i] = norm.denormalize(static_cast<Variable>(i), scaled[i]);
    }
  }
  return out;
}

}  // namespace

Service::Service(TrainedModel model, control::ControlConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {}

Response Service::predict(std::string_view body) const {
  try {
    const auto raw = raw_features(parse_body(body));
    return {200, {{"p_conflict", model_.predict_raw(raw)}}};
  } catch (const BadRequest& e) {
    return bad_request(e);
  }
}

Response Service::control(std::string_view body) const {
  try {
    const json j = parse_body(body);
    const auto raw = raw_features(j);

    control::Strategy strategy = control::Strategy::multi();
    if (j.contains("strategy")) {
      if (!j["strategy"].is_string()) throw BadRequest{"strategy", "must be a string"};
      try {
        strategy = control::Strategy::parse(j["strategy"].get<std::string>());
      } catch (const Error& e) {
        throw BadRequest{"strategy", e.what()};
      }
    }
    double threshold = 0.5;
    if (j.contains("threshold")) {
      if (!j["threshold"].is_number()) throw BadRequest{"threshold", "must be a number"};
      threshold = j["threshold"].get<double>();
      if (!(threshold > 0.0 && threshold <= 1.0)) throw BadRequest{"threshold", "must lie in (0, 1]"};
    }
    control::ControlConfig cfg = cfg_;
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw BadRequest{"seed", "must be a non-negative integer"};
      cfg.sa.seed = j["seed"].get<std::uint64_t>();
    } else {
      cfg.sa.seed = 0;
    }

    const auto& norm = model_.normalization();
    control::ControlProblem prob;
    prob.predict = model_.predictor();
    prob.dyad = norm.normalize(raw);
    prob.threshold = threshold;
    const auto out = control::control_dyad(prob, strategy, cfg);

    json body_out = {
        {"p_before", out.p_before},
        {"p_after", out.p_after},
        {"success", out.success},
        {"activated", out.activated},
        {"strategy", strategy.to_string()},
        {"evaluations", out.evaluations},
        {"original", features_json(raw)},
        {"adjusted", features_json(to_raw(out.adjusted, out.original, raw, norm))},
        {"rounded_allies_variant", nullptr},
    };
    if (out.rounded_allies) {
      body_out["rounded_allies_variant"] = {
          {"features", features_json(to_raw(out.rounded_allies->features, out.original, raw, norm))},
          {"p_after", out.rounded_allies->p},
          {"success", out.rounded_allies->success}};
    }
    if (!out.diagnostics.empty()) body_out["diagnostics"] = out.diagnostics;
    return {200, body_out};
  } catch (const BadRequest& e) {
    return bad_request(e);
  }
}

Response Service::ard() const {
  const auto& arch = model_.architecture();
  const auto relevance = ard::input_relevances(model_.hyperparameters(), arch.inputs);
  if (relevance.size() == 0) {
    return {409, {{"error", "model was not trained with per-input (ARD) hyperparameter groups"}}};
  }
  const double total = relevance.sum();
  json rows = json::array();
  for (int i : ard::rank(relevance)) {
    rows.push_back({{"variable", model_.hyperparameters().groups[static_cast<std::size_t>(i)].name.substr(6)},
                    {"relevance", relevance(i)},
                    {"normalized", relevance(i) / total}});
  }
  return {200, {{"relevances", rows}}};
}

Response Service::model_info() const {
  const auto& meta = model_.metadata();
  json info = {{"method", std::string(to_string(model_.method()))},
               {"architecture", io::architecture_to_json(model_.architecture())},
               {"metadata",
                {{"seed", meta.seed},
                 {"dataset_fingerprint", meta.dataset_fingerprint},
                 {"patterns", meta.patterns},
                 {"created", meta.created}}}};
  if (const auto* e = model_.ensemble()) {
    info["samples"] = e->samples().size();
    info["acceptance_rate"] = e->acceptance_rate();
  }
  return {200, info};
}

Response Service::handle(std::string_view method, std::string_view path,
                         std::string_view body) const {
  if (method == "POST" && path == "/api/predict") return predict(body);
  if (method == "POST" && path == "/api/control") return control(body);
  if (method == "GET" && path == "/api/ard") return ard();
  if (method == "GET" && path == "/api/model") return model_info();
  return {404, {{"error", "no route for " + std::string(method) + " " + std::string(path)}}};
}

void Service::mount(httplib::Server& server) const {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/api/predict", route);
  server.Post("/api/control", route);
  server.Get("/api/ard", route);
  server.Get("/api/model", route);
  server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404) {
      const Response r = handle(req.method, req.path, req.body);
      res.set_content(r.body.dump(), "application/json");
    }
  });
}

int serve(const Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  std::cerr << "midctl: serving " << to_string(service.model().method()) << " model on http://"
            << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return 0;
}

}  // namespace midctl::service
