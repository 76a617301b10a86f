#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

// Smooth quadratic latency surface, strictly positive.
TrainingSet quadratic_set(int n, std::uint64_t seed) {
  Rng rng(seed);
  TrainingSet data;
  for (int i = 0; i < n; ++i) {
    const double x = uniform_real(rng, -2.0, 2.0);
    const double nuisance = uniform_real01(rng);
    data.rows.push_back({x, nuisance});
    data.targets.push_back(x * x + 10.0);
  }
  return data;
}

GbdtConfig small_config(std::vector<int> stages) {
  GbdtConfig config;
  config.n_stages_grid = std::move(stages);
  config.min_split_grid = {2, 5};
  return config;
}

TEST(TrainGbdt, BaseValueIsInverseSquareWeightedMean) {
  TrainingSet data{{{0.0}, {0.0}}, {1.0, 2.0}};
  const GbdtModel model = train_gbdt(data, 1, small_config({1}));
  // (1·1 + 0.25·2) / (1 + 0.25)
  EXPECT_NEAR(model.base_value, 1.2, 1e-12);
}

TEST(TrainGbdt, ConstantTargetsPredictTheConstant) {
  TrainingSet data;
  Rng rng(3);
  for (int i = 0; i < 25; ++i) {
    data.rows.push_back({uniform_real01(rng)});
    data.targets.push_back(6.25);
  }
  const GbdtModel model = train_gbdt(data, 5, small_config({1, 10}));
  for (const auto& row : data.rows) {
    EXPECT_NEAR(predict(model, row), 6.25, 1e-12);
  }
}

TEST(GbdtPredict, AppliesBaseAndScaledStageSum) {
  GbdtModel model;
  model.base_value = 10.0;
  model.learning_rate = 0.1;
  model.n_features = 1;
  RegressionTree stage;
  stage.nodes.push_back(TreeNode{-1, 0.0, -1, -1, -2.0});
  model.stages.push_back(stage);
  EXPECT_DOUBLE_EQ(predict(model, std::vector<double>{0.0}), 9.8);
  EXPECT_THROW(predict(model, std::vector<double>{0.0, 0.0}), Error);
}

TEST(TrainGbdt, MoreStagesFitTheTrainingDataBetter) {
  const TrainingSet data = quadratic_set(150, 8);
  const GbdtModel coarse = train_gbdt(data, 4, small_config({1}));
  const GbdtModel fine = train_gbdt(data, 4, small_config({60}));

  auto training_mape = [&data](const GbdtModel& model) {
    std::vector<double> p;
    for (const auto& row : data.rows) p.push_back(predict(model, row));
    return mape(p, data.targets);
  };
  EXPECT_LT(training_mape(fine), training_mape(coarse));
  EXPECT_LT(training_mape(fine), 0.03);
}

TEST(TrainGbdt, DeterministicGivenSeed) {
  const TrainingSet data = quadratic_set(60, 9);
  const GbdtConfig config = small_config({1, 10, 25});
  const GbdtModel a = train_gbdt(data, 21, config);
  const GbdtModel b = train_gbdt(data, 21, config);
  EXPECT_EQ(a.n_stages, b.n_stages);
  EXPECT_EQ(a.min_samples_split, b.min_samples_split);
  for (const auto& row : data.rows) {
    EXPECT_DOUBLE_EQ(predict(a, row), predict(b, row));
  }
}

TEST(TrainGbdt, ChosenHyperparametersComeFromTheGrids) {
  const TrainingSet data = quadratic_set(50, 10);
  const GbdtConfig config = small_config({1, 10});
  const GbdtModel model = train_gbdt(data, 2, config);
  EXPECT_TRUE(model.n_stages == 1 || model.n_stages == 10);
  EXPECT_TRUE(model.min_samples_split == 2 || model.min_samples_split == 5);
  EXPECT_EQ(static_cast<int>(model.stages.size()), model.n_stages);
  EXPECT_DOUBLE_EQ(model.learning_rate, 0.1);
  EXPECT_EQ(model.n_features, 2);
}

TEST(TrainGbdt, SingleSampleFallsBackToSmallestModel) {
  TrainingSet data{{{1.0}}, {4.0}};
  const GbdtModel model = train_gbdt(data, 6);
  EXPECT_EQ(model.n_stages, 1);
  EXPECT_EQ(model.min_samples_split, 7);
  EXPECT_NEAR(predict(model, data.rows[0]), 4.0, 1e-9);
}

TEST(TrainGbdt, ScalingTargetsByFourScalesPredictionsExactly) {
  const TrainingSet base = quadratic_set(60, 11);
  TrainingSet scaled = base;
  for (double& y : scaled.targets) y *= 4.0;

  const GbdtConfig config = small_config({1, 10, 25});
  const GbdtModel m1 = train_gbdt(base, 33, config);
  const GbdtModel m4 = train_gbdt(scaled, 33, config);
  EXPECT_EQ(m1.n_stages, m4.n_stages);
  EXPECT_EQ(m1.min_samples_split, m4.min_samples_split);
  Rng rng(77);
  for (int i = 0; i < 40; ++i) {
    const std::vector<double> q{uniform_real(rng, -2.0, 2.0), uniform_real01(rng)};
    EXPECT_DOUBLE_EQ(predict(m4, q), 4.0 * predict(m1, q));
  }
}

TEST(TrainGbdt, RejectsEmptyGrids) {
  const TrainingSet data = quadratic_set(10, 12);
  GbdtConfig config;
  config.n_stages_grid.clear();
  EXPECT_THROW(train_gbdt(data, 1, config), Error);
}

}  // namespace
}  // namespace latpred
