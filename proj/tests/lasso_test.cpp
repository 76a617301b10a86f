#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "latpred/features.hpp"
#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

TEST(Mape, MatchesDefinition) {
  EXPECT_DOUBLE_EQ(mape(std::vector<double>{110}, std::vector<double>{100}), 0.10);
  EXPECT_DOUBLE_EQ(mape(std::vector<double>{90, 120}, std::vector<double>{100, 100}), 0.15);
  EXPECT_DOUBLE_EQ(mape(std::vector<double>{5, 7}, std::vector<double>{5, 7}), 0.0);
}

TEST(Mspe, MatchesDefinition) {
  EXPECT_DOUBLE_EQ(mspe(std::vector<double>{110}, std::vector<double>{100}), 0.01);
  EXPECT_DOUBLE_EQ(mspe(std::vector<double>{90, 120}, std::vector<double>{100, 100}), 0.025);
  EXPECT_DOUBLE_EQ(mspe(std::vector<double>{5}, std::vector<double>{5}), 0.0);
}

TEST(Mape, RejectsBadInput) {
  EXPECT_THROW(mape(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  EXPECT_THROW(mape(std::vector<double>{1}, std::vector<double>{0}), Error);
  EXPECT_THROW(mspe(std::vector<double>{1}, std::vector<double>{-2}), Error);
  EXPECT_THROW(mape(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(TrainingSet, CheckRejectsDefects) {
  TrainingSet ok{{{1, 2}, {3, 4}}, {1.0, 2.0}};
  EXPECT_NO_THROW(ok.check());

  TrainingSet empty;
  EXPECT_THROW(empty.check(), Error);

  TrainingSet ragged{{{1, 2}, {3}}, {1.0, 2.0}};
  EXPECT_THROW(ragged.check(), Error);

  TrainingSet nonpositive{{{1}, {2}}, {1.0, 0.0}};
  EXPECT_THROW(nonpositive.check(), Error);

  TrainingSet mismatched{{{1}}, {1.0, 2.0}};
  EXPECT_THROW(mismatched.check(), Error);

  TrainingSet inf_feature{{{std::numeric_limits<double>::infinity()}}, {1.0}};
  EXPECT_THROW(inf_feature.check(), Error);
}

// y = 2 + 3 x1, x2 carries no signal.
TrainingSet linear_set(int n = 60) {
  Rng rng(91);
  TrainingSet data;
  for (int i = 0; i < n; ++i) {
    const double x1 = uniform_real(rng, 0.0, 4.0);
    const double x2 = uniform_real(rng, -1.0, 1.0);
    data.rows.push_back({x1, x2});
    data.targets.push_back(2.0 + 3.0 * x1);
  }
  return data;
}

TEST(FitLasso, RecoversNoiselessLinearModel) {
  const LassoModel model = fit_lasso(linear_set(), 1e-7);
  ASSERT_EQ(model.weights.size(), 2u);
  EXPECT_NEAR(model.weights[0], 3.0, 1e-3);
  EXPECT_NEAR(model.weights[1], 0.0, 1e-3);
  EXPECT_NEAR(model.intercept, 2.0, 1e-3);
}

TEST(FitLasso, WeightsAreNeverNegative) {
  // Generator weight is negative; the constraint must clamp it to zero.
  TrainingSet data;
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const double x = uniform_real(rng, 0.0, 1.0);
    data.rows.push_back({x});
    data.targets.push_back(10.0 - 5.0 * x);
  }
  for (double alpha : default_alpha_grid()) {
    const LassoModel model = fit_lasso(data, alpha);
    for (double w : model.weights) EXPECT_GE(w, 0.0);
  }
}

TEST(FitLasso, ObjectiveIsMonotoneNonIncreasing) {
  LassoFitInfo info;
  const LassoModel model = fit_lasso(linear_set(), 1e-3, {}, &info);
  ASSERT_GE(info.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < info.objective_trace.size(); ++i) {
    EXPECT_LE(info.objective_trace[i], info.objective_trace[i - 1] + 1e-15);
  }
  EXPECT_TRUE(info.converged);
  EXPECT_GT(info.sweeps, 0);
  EXPECT_NEAR(info.objective_trace.back(), lasso_objective(model, linear_set()), 1e-9);
}

TEST(FitLasso, HugeAlphaShrinksToWeightedMeanIntercept) {
  TrainingSet data{{{0.5}, {-0.5}}, {1.0, 2.0}};
  const LassoModel model = fit_lasso(data, 1e2);
  EXPECT_DOUBLE_EQ(model.weights[0], 0.0);
  // 1/y^2-weighted mean of {1, 2} = (1 + 0.5) / (1 + 0.25).
  EXPECT_NEAR(model.intercept, 1.2, 1e-9);
}

TEST(FitLasso, NoSignalPredictsTheCommonTarget) {
  // Identical targets and all-zero features: the offset carries the value.
  TrainingSet data{{{0, 0}, {0, 0}, {0, 0}}, {7.5, 7.5, 7.5}};
  const LassoModel model = fit_lasso(data, 1e-3);
  EXPECT_EQ(model.weights, (std::vector<double>{0.0, 0.0}));
  EXPECT_NEAR(predict(model, std::vector<double>{0, 0}), 7.5, 1e-9);
}

TEST(FitLasso, KktResidualVanishesAtConvergence) {
  const TrainingSet data = linear_set();
  for (double alpha : {1e-5, 1e-3, 1e-1, 1e1}) {
    const LassoModel model = fit_lasso(data, alpha);
    EXPECT_LT(lasso_kkt_violation(model, data), 1e-5) << "alpha " << alpha;
  }
}

TEST(FitLasso, ScaleCovariance) {
  const TrainingSet base = linear_set();
  TrainingSet scaled = base;
  for (double& y : scaled.targets) y *= 4.0;

  LassoConfig base_config;
  LassoConfig scaled_config;
  scaled_config.tolerance = base_config.tolerance * 4.0;

  const LassoModel m1 = fit_lasso(base, 1e-3, base_config);
  const LassoModel m4 = fit_lasso(scaled, 1e-3 / 4.0, scaled_config);
  ASSERT_EQ(m1.weights.size(), m4.weights.size());
  for (std::size_t j = 0; j < m1.weights.size(); ++j) {
    EXPECT_DOUBLE_EQ(m4.weights[j], 4.0 * m1.weights[j]);
  }
  EXPECT_DOUBLE_EQ(m4.intercept, 4.0 * m1.intercept);
}

TEST(DefaultAlphaGrid, PowersOfTenSpanningTheRange) {
  const auto grid = default_alpha_grid();
  ASSERT_EQ(grid.size(), 8u);
  EXPECT_DOUBLE_EQ(grid.front(), 1e-5);
  EXPECT_DOUBLE_EQ(grid.back(), 1e2);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_NEAR(grid[i] / grid[i - 1], 10.0, 1e-9);
  }
}

TEST(TrainLasso, PicksSmallAlphaOnCleanSignalAndRecovers) {
  const TrainingSet data = linear_set(100);
  const LassoModel model = train_lasso(data, /*seed=*/7);
  EXPECT_NEAR(model.weights[0], 3.0, 1e-3);
  EXPECT_NEAR(model.intercept, 2.0, 1e-3);
  EXPECT_LE(model.alpha, 1e-3);

  std::vector<double> predictions;
  for (const auto& row : data.rows) predictions.push_back(predict(model, row));
  EXPECT_LT(mape(predictions, data.targets), 0.005);
}

TEST(TrainLasso, TiesPreferTheLargerAlpha) {
  // All-zero features: every alpha yields the same CV error, so the sparsest
  // (largest) grid point must win.
  TrainingSet data;
  for (int i = 0; i < 20; ++i) {
    data.rows.push_back({0.0, 0.0});
    data.targets.push_back(5.0);
  }
  const LassoModel model = train_lasso(data, 3);
  EXPECT_DOUBLE_EQ(model.alpha, 1e2);
}

TEST(TrainLasso, DeterministicGivenSeed) {
  const TrainingSet data = linear_set(40);
  const LassoModel a = train_lasso(data, 11);
  const LassoModel b = train_lasso(data, 11);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_DOUBLE_EQ(a.intercept, b.intercept);
  EXPECT_DOUBLE_EQ(a.alpha, b.alpha);
}

TEST(TrainLasso, SingleRowTrainsWithoutCv) {
  TrainingSet data{{{1.0}}, {3.0}};
  const LassoModel model = train_lasso(data, 0);
  EXPECT_GE(model.alpha, 0.0);
  EXPECT_GT(predict(model, std::vector<double>{1.0}), 0.0);
}

TEST(LassoPredict, AppliesWeightsAndClampsAtZero) {
  LassoModel model;
  model.weights = {3.0, 0.0};
  model.intercept = 0.0;
  EXPECT_DOUBLE_EQ(predict(model, std::vector<double>{1, 7}), 3.0);
  EXPECT_THROW(predict(model, std::vector<double>{1}), Error);  // width mismatch

  model.intercept = -10.0;
  EXPECT_DOUBLE_EQ(predict(model, std::vector<double>{1, 7}), 0.0);  // clamped
}

TEST(FeatureImportance, SortsByWeightWithStableTies) {
  LassoModel model;
  model.schema = KernelKind::kFullyConnected;  // [input_c, filters, parameter_size, flops]
  model.weights = {0.0, 5.0, 1.0, 0.0};
  const auto ranked = feature_importance(model);
  ASSERT_EQ(ranked.size(), 4u);
  EXPECT_EQ(ranked[0].first, "filters");
  EXPECT_EQ(ranked[1].first, "parameter_size");
  EXPECT_EQ(ranked[2].first, "input_c");  // zero-weight ties keep schema order
  EXPECT_EQ(ranked[3].first, "flops");
  EXPECT_DOUBLE_EQ(ranked[0].second, 5.0);
}

}  // namespace
}  // namespace latpred
