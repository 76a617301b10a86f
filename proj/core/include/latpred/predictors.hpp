#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latpred/gpu_compile.hpp"

// Per-kernel latency regressors. All three model families minimize squared
// percentage error — realized as ordinary squared error with 1/y² sample
// weights — and are selected and reported on MAPE. Training is deterministic
// given (data, seed) and single-threaded; trained models are immutable, so
// concurrent prediction is safe.

namespace latpred {

// Mean absolute / squared percentage error. Actuals must be positive.
double mape(std::span<const double> predictions, std::span<const double> actuals);
double mspe(std::span<const double> predictions, std::span<const double> actuals);

struct TrainingSet {
  std::vector<std::vector<double>> rows;  // standardized feature rows
  std::vector<double> targets;            // latencies in ms, all > 0

  std::size_t size() const { return targets.size(); }
  std::size_t width() const { return rows.empty() ? 0 : rows[0].size(); }
  // Throws Error on empty data, ragged rows, non-finite features or
  // non-positive targets.
  void check() const;
};

// ---------------------------------------------------------------------------
// Lasso

struct LassoModel {
  std::vector<double> weights;  // nonnegative
  // Unpenalized offset. Latency is strictly positive while standardized
  // features are zero-mean, so a through-origin fit cannot be exact even on
  // noiseless linear data; the offset carries that irreducible constant.
  double intercept = 0.0;
  double alpha = 0.0;
  KernelKind schema = KernelKind::kConv2D;
};

struct LassoConfig {
  double tolerance = 1e-8;  // max coefficient change per sweep
  int max_sweeps = 10000;
};

struct LassoFitInfo {
  int sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after each sweep
};

// Cyclic coordinate descent with nonnegative soft-threshold updates on the
// 1/y²-weighted quadratic for one fixed alpha.
LassoModel fit_lasso(const TrainingSet& data, double alpha, const LassoConfig& config = {},
                     LassoFitInfo* info = nullptr);

// (1/N)·Σ((b + wᵀx̂ − y)/y)² + α·‖w‖₁
double lasso_objective(const LassoModel& model, const TrainingSet& data);

// Largest violation of the stationarity conditions: active coordinates must
// have smooth gradient ≈ −α, inactive ones gradient ≥ −α, intercept gradient
// ≈ 0. Zero for an exact optimum.
double lasso_kkt_violation(const LassoModel& model, const TrainingSet& data);

// Powers of ten spanning [1e-5, 1e2].
std::vector<double> default_alpha_grid();

// Alpha chosen by 5-fold cross-validated MAPE (ties prefer the larger,
// sparser alpha), then refit on the full data.
LassoModel train_lasso(const TrainingSet& data, std::uint64_t seed,
                       const std::vector<double>& alpha_grid = default_alpha_grid(),
                       const LassoConfig& config = {});

double predict(const LassoModel& model, std::span<const double> row);

// Features ranked by descending weight; equal weights keep schema order.
std::vector<std::pair<std::string, double>> feature_importance(const LassoModel& model);

// ---------------------------------------------------------------------------
// Regression trees

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf prediction
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct TreeFitConfig {
  int min_samples_split = 2;
  int max_depth = -1;  // -1: unlimited
};

// Exhaustive axis-aligned splits minimizing weighted squared error. Samples
// are given as indices into rows (duplicates allowed, e.g. bootstrap).
// Deterministic: features are scanned in order and the first best split wins.
RegressionTree fit_tree(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& targets, const std::vector<double>& weights,
                        const std::vector<std::size_t>& samples, const TreeFitConfig& config);

double predict(const RegressionTree& tree, std::span<const double> row);

// ---------------------------------------------------------------------------
// Random forest

struct RandomForestModel {
  std::vector<RegressionTree> trees;
  int n_trees = 1;
  int min_samples_split = 2;
  std::uint64_t rng_seed = 0;
  int n_features = 0;
  KernelKind schema = KernelKind::kConv2D;
};

struct RfConfig {
  std::vector<int> n_trees_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> min_split_grid = {2, 5, 10, 20, 50};
  int max_depth = -1;
};

// Bootstrapped trees on 1/y²-weighted squared error; (n_trees,
// min_samples_split) by 5-fold cross-validated MAPE. Prediction is the plain
// mean over trees.
RandomForestModel train_rf(const TrainingSet& data, std::uint64_t seed,
                           const RfConfig& config = {});

double predict(const RandomForestModel& model, std::span<const double> row);

// ---------------------------------------------------------------------------
// Gradient-boosted trees

struct GbdtModel {
  std::vector<RegressionTree> stages;
  int n_stages = 1;
  int min_samples_split = 2;
  double learning_rate = 0.1;
  double base_value = 0.0;  // 1/y²-weighted mean of the training targets
  int n_features = 0;
  KernelKind schema = KernelKind::kConv2D;
};

struct GbdtConfig {
  std::vector<int> n_stages_grid = {1, 10, 25, 50, 100, 200};
  std::vector<int> min_split_grid = {2, 3, 4, 5, 6, 7};
  double learning_rate = 0.1;
  int max_depth = 6;
};

// Stagewise fit to the negative gradient of the weighted squared loss, i.e.
// each stage's tree regresses the current residuals under 1/y² weights.
// (n_stages, min_samples_split) by 5-fold cross-validated MAPE.
GbdtModel train_gbdt(const TrainingSet& data, std::uint64_t seed, const GbdtConfig& config = {});

// base_value + learning_rate · Σ stage outputs
double predict(const GbdtModel& model, std::span<const double> row);

// ---------------------------------------------------------------------------
// Cross-validation plumbing

// Indices 0..n-1, shuffled with the given seed, cut into k contiguous blocks
// (sizes differ by at most one). Requires 2 <= k <= n.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed);

}  // namespace latpred
