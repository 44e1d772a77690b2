#include "midctl/model.hpp"

#include "midctl/error.hpp"

namespace midctl {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string_view to_string(Method m) { return m == Method::kGaussian ? "gaussian" : "hmc"; }

TrainedModel::TrainedModel(evidence::EvidenceModel model, TrainingMetadata meta)
    : impl_(std::move(model)), meta_(std::move(meta)) {}

TrainedModel::TrainedModel(hmc::PosteriorEnsemble model, TrainingMetadata meta)
    : impl_(std::move(model)), meta_(std::move(meta)) {}

Method TrainedModel::method() const {
  return std::holds_alternative<evidence::EvidenceModel>(impl_) ? Method::kGaussian : Method::kHmc;
}

const mlp::Architecture& TrainedModel::architecture() const {
  return std::visit([](const auto& m) -> const mlp::Architecture& { return m.architecture(); },
                    impl_);
}

const mlp::HyperParameters& TrainedModel::hyperparameters() const {
  return std::visit(
      [](const auto& m) -> const mlp::HyperParameters& { return m.hyperparameters(); }, impl_);
}

const data::NormalizationSpec& TrainedModel::normalization() const {
  return std::visit(
      [](const auto& m) -> const data::NormalizationSpec& { return m.normalization(); }, impl_);
}

const evidence::EvidenceModel* TrainedModel::gaussian() const {
  return std::get_if<evidence::EvidenceModel>(&impl_);
}

const hmc::PosteriorEnsemble* TrainedModel::ensemble() const {
  return std::get_if<hmc::PosteriorEnsemble>(&impl_);
}

double TrainedModel::predict(const data::FeatureRow& x) const {
  return std::visit(overloaded{
                        [&](const evidence::EvidenceModel& m) { return m.predict(x); },
                        [&](const hmc::PosteriorEnsemble& m) { return m.predict_mean(x); },
                    },
                    impl_);
}

double TrainedModel::predict_raw(const data::FeatureRow& raw) const {
  return predict(normalization().normalize(raw));
}

std::vector<double> TrainedModel::predict_all(const data::Dataset& ds) const {
  if (!ds.normalized()) throw Error(ErrorCode::kConfig, "prediction needs a normalized dataset");
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& d : ds.dyads()) out.push_back(predict(d.features));
  return out;
}

control::Predictor TrainedModel::predictor() const {
  return [this](const data::FeatureRow& x) { return predict(x); };
}

}  // namespace midctl
