#include <algorithm>
#include <cmath>

#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

constexpr std::uint64_t kFoldStream = 0x67622d666f6c6473ull;

std::vector<double> percentage_weights(const std::vector<double>& targets) {
  std::vector<double> z(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) z[i] = 1.0 / (targets[i] * targets[i]);
  return z;
}

double weighted_mean(const std::vector<double>& values, const std::vector<double>& weights) {
  double m = 0.0, w = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    m += weights[i] * values[i];
    w += weights[i];
  }
  return m / w;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

GbdtModel train_gbdt(const TrainingSet& data, std::uint64_t seed, const GbdtConfig& config) {
  data.check();
  if (config.n_stages_grid.empty() || config.min_split_grid.empty()) {
    throw Error("gbdt: empty hyperparameter grid");
  }

  std::vector<int> stages_grid = config.n_stages_grid;
  std::sort(stages_grid.begin(), stages_grid.end());
  std::vector<int> split_grid = config.min_split_grid;
  std::sort(split_grid.begin(), split_grid.end(), std::greater<>());
  const int max_stages = stages_grid.back();

  int best_stages = stages_grid.front();
  int best_split = split_grid.front();

  const std::size_t n = data.size();
  if (n >= 2) {
    const int k = static_cast<int>(std::min<std::size_t>(5, n));
    const auto folds = kfold_indices(n, k, derive_seed(seed, kFoldStream));

    std::vector<std::vector<double>> cv_sum(split_grid.size(),
                                            std::vector<double>(stages_grid.size(), 0.0));

    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<bool> held(n, false);
      for (std::size_t i : folds[f]) held[i] = true;

      std::vector<std::vector<double>> train_rows;
      std::vector<double> train_targets;
      for (std::size_t i = 0; i < n; ++i) {
        if (held[i]) continue;
        train_rows.push_back(data.rows[i]);
        train_targets.push_back(data.targets[i]);
      }
      const std::vector<double> weights = percentage_weights(train_targets);
      const std::vector<std::size_t> samples = all_indices(train_targets.size());

      std::vector<double> val_actual;
      val_actual.reserve(folds[f].size());
      for (std::size_t i : folds[f]) val_actual.push_back(data.targets[i]);

      for (std::size_t si = 0; si < split_grid.size(); ++si) {
        const double base = weighted_mean(train_targets, weights);
        std::vector<double> fit(train_targets.size(), base);
        std::vector<double> val_pred(folds[f].size(), base);
        std::vector<double> residuals(train_targets.size());

        // One boosting run per min_samples_split; every n_stages candidate is
        // a prefix of it, so validation scores fall out stage by stage.
        std::size_t grid_at = 0;
        for (int stage = 0; stage < max_stages && grid_at < stages_grid.size(); ++stage) {
          for (std::size_t i = 0; i < residuals.size(); ++i) {
            residuals[i] = train_targets[i] - fit[i];
          }
          const RegressionTree tree =
              fit_tree(train_rows, residuals, weights, samples,
                       TreeFitConfig{split_grid[si], config.max_depth});
          for (std::size_t i = 0; i < fit.size(); ++i) {
            fit[i] += config.learning_rate * predict(tree, train_rows[i]);
          }
          for (std::size_t v = 0; v < folds[f].size(); ++v) {
            val_pred[v] += config.learning_rate * predict(tree, data.rows[folds[f][v]]);
          }
          while (grid_at < stages_grid.size() && stages_grid[grid_at] == stage + 1) {
            cv_sum[si][grid_at] += mape(val_pred, val_actual);
            ++grid_at;
          }
        }
      }
    }

    bool first = true;
    double best_mape = 0.0;
    for (std::size_t gi = 0; gi < stages_grid.size(); ++gi) {
      for (std::size_t si = 0; si < split_grid.size(); ++si) {
        const double cv = cv_sum[si][gi] / static_cast<double>(folds.size());
        if (first || cv < best_mape) {
          first = false;
          best_mape = cv;
          best_stages = stages_grid[gi];
          best_split = split_grid[si];
        }
      }
    }
  }

  GbdtModel model;
  model.n_stages = best_stages;
  model.min_samples_split = best_split;
  model.learning_rate = config.learning_rate;
  model.n_features = static_cast<int>(data.width());

  const std::vector<double> weights = percentage_weights(data.targets);
  model.base_value = weighted_mean(data.targets, weights);
  const std::vector<std::size_t> samples = all_indices(n);
  std::vector<double> fit(n, model.base_value);
  std::vector<double> residuals(n);
  for (int stage = 0; stage < best_stages; ++stage) {
    for (std::size_t i = 0; i < n; ++i) residuals[i] = data.targets[i] - fit[i];
    RegressionTree tree = fit_tree(data.rows, residuals, weights, samples,
                                   TreeFitConfig{best_split, config.max_depth});
    for (std::size_t i = 0; i < n; ++i) {
      fit[i] += config.learning_rate * predict(tree, data.rows[i]);
    }
    model.stages.push_back(std::move(tree));
  }
  return model;
}

double predict(const GbdtModel& model, std::span<const double> row) {
  if (static_cast<int>(row.size()) != model.n_features) {
    throw Error("gbdt predict: schema mismatch");
  }
  double sum = 0.0;
  for (const auto& stage : model.stages) sum += predict(stage, row);
  return model.base_value + model.learning_rate * sum;
}

}  // namespace latpred
