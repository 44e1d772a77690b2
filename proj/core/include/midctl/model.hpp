#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "midctl/control.hpp"
#include "midctl/data.hpp"
#include "midctl/evidence.hpp"
#include "midctl/hmc.hpp"

namespace midctl {

enum class Method { kGaussian, kHmc };

std::string_view to_string(Method m);

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  long patterns = 0;
  std::string created;  // empty unless a timestamp was requested

  bool operator==(const TrainingMetadata&) const = default;
};

// A trained classifier of either kind together with its normalization.
class TrainedModel {
 public:
  TrainedModel(evidence::EvidenceModel model, TrainingMetadata meta);
  TrainedModel(hmc::PosteriorEnsemble model, TrainingMetadata meta);

  Method method() const;
  const mlp::Architecture& architecture() const;
  const mlp::HyperParameters& hyperparameters() const;
  const data::NormalizationSpec& normalization() const;
  const TrainingMetadata& metadata() const { return meta_; }

  const evidence::EvidenceModel* gaussian() const;
  const hmc::PosteriorEnsemble* ensemble() const;

  // P(conflict) for a normalized feature row.
  double predict(const data::FeatureRow& normalized) const;
  double predict_raw(const data::FeatureRow& raw) const;
  std::vector<double> predict_all(const data::Dataset& normalized) const;
  control::Predictor predictor() const;

 private:
  std::variant<evidence::EvidenceModel, hmc::PosteriorEnsemble> impl_;
  TrainingMetadata meta_;
};

}  // namespace midctl
