#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "midctl/model.hpp"

namespace midctl::io {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "midctl-model";

nlohmann::json architecture_to_json(const mlp::Architecture& a);
mlp::Architecture architecture_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainedModel& m);
TrainedModel model_from_json(const nlohmann::json& j);

// Pretty-printed JSON; doubles are written with round-trip precision so a
// loaded model predicts bit-for-bit like the saved one.
std::string dump(const TrainedModel& m);
void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace midctl::io
