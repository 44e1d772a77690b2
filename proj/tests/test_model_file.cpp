#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "midctl/error.hpp"
#include "midctl/model_file.hpp"
#include "support.hpp"

namespace midctl::io {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

data::NormalizationSpec fitted_norm() {
  auto n = data::NormalizationSpec::theoretical_defaults();
  n.bounds[3] = {1.0123456789, 3.98765, data::BoundSource::kFitted};
  n.bounds[5] = {0.0, 0.1999999999999, data::BoundSource::kFitted};
  return n;
}

TrainingMetadata meta() { return {42, "fnv:0123abcd", 1000, ""}; }

TrainedModel gaussian_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  mlp::Architecture a;
  a.hidden = 4;
  const auto n = a.num_weights();
  const VectorXd w = testing::random_weights(rng, n);
  const MatrixXd b = testing::random_weights(rng, n * n).reshaped(n, n);
  const MatrixXd h = b * b.transpose() / static_cast<double>(n);
  const auto hp = mlp::HyperParameters::ard(a, 0.37);
  VectorXd gamma = VectorXd::LinSpaced(static_cast<Eigen::Index>(hp.groups.size()), 0.1, 3.3);
  return TrainedModel(evidence::EvidenceModel(a, w, hp, h, gamma, fitted_norm()), meta());
}

TrainedModel hmc_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  mlp::Architecture a;
  a.hidden = 3;
  std::vector<mlp::WeightVector> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(testing::random_weights(rng, a.num_weights()));
  return TrainedModel(hmc::PosteriorEnsemble(a, samples, 0.8125, mlp::HyperParameters::standard(a, 0.01),
                                             fitted_norm()),
                      meta());
}

void expect_identical_predictions(const TrainedModel& a, const TrainedModel& b) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    data::FeatureRow x;
    for (auto& v : x) v = u(rng);
    ASSERT_EQ(a.predict(x), b.predict(x)) << "input " << i;
  }
}

class ModelFile : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("midctl_model_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(ModelFile, GaussianRoundTripIsExact) {
  const auto m = gaussian_model(1);
  save_model(m, dir_ / "g.json");
  const auto back = load_model(dir_ / "g.json");
  EXPECT_EQ(back.method(), Method::kGaussian);
  EXPECT_EQ(back.architecture(), m.architecture());
  EXPECT_EQ(back.normalization(), m.normalization());
  EXPECT_EQ(back.metadata(), m.metadata());
  EXPECT_EQ(back.gaussian()->w_map(), m.gaussian()->w_map());
  EXPECT_EQ(back.gaussian()->hessian(), m.gaussian()->hessian());
  EXPECT_EQ(back.hyperparameters().alpha, m.hyperparameters().alpha);
  expect_identical_predictions(m, back);
  EXPECT_EQ(dump(back), dump(m));
}

TEST_F(ModelFile, HmcRoundTripIsExact) {
  const auto m = hmc_model(2);
  save_model(m, dir_ / "h.json");
  const auto back = load_model(dir_ / "h.json");
  EXPECT_EQ(back.method(), Method::kHmc);
  EXPECT_EQ(back.ensemble()->samples(), m.ensemble()->samples());
  EXPECT_EQ(back.ensemble()->acceptance_rate(), 0.8125);
  expect_identical_predictions(m, back);
  EXPECT_EQ(dump(back), dump(m));
}

TEST_F(ModelFile, RawPredictionUsesStoredNormalization) {
  const auto m = gaussian_model(3);
  const data::FeatureRow raw = {-4.0, 1.0, 0.0, 2.5, 1.2, 0.05, 1.0};
  EXPECT_EQ(m.predict_raw(raw), m.predict(m.normalization().normalize(raw)));
}

TEST(ModelFileSchema, RejectsMalformedDocuments) {
  const auto good = to_json(hmc_model(4));
  auto expect_schema = [](const nlohmann::json& j) {
    try {
      model_from_json(j);
      ADD_FAILURE() << "accepted " << j.dump().substr(0, 80);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchema) << e.what();
    }
  };
  auto j = good;
  j["format"] = "something-else";
  expect_schema(j);
  j = good;
  j["version"] = 99;
  expect_schema(j);
  j = good;
  j["method"] = "dropout";
  expect_schema(j);
  j = good;
  j.erase("architecture");
  expect_schema(j);
  j = good;
  j["architecture"]["inner"] = "relu";
  expect_schema(j);
  j = good;
  j["normalization"].erase(0);
  expect_schema(j);
  j = good;
  j["hmc"]["samples"][0] = nlohmann::json::array({1.0, 2.0});
  expect_schema(j);
}

TEST(ModelFileSchema, IoAndParseErrors) {
  try {
    load_model("/nonexistent/model.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  const auto path = std::filesystem::temp_directory_path() / "midctl_bad_model.json";
  std::ofstream(path) << "{ not json";
  try {
    load_model(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace midctl::io
