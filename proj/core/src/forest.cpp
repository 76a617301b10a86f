#include <algorithm>
#include <cmath>

#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

constexpr std::uint64_t kFoldStream = 0x72662d666f6c6473ull;
constexpr std::uint64_t kCvStream = 0x72662d63762d7472ull;
constexpr std::uint64_t kFinalStream = 0x72662d66696e616cull;

std::vector<double> percentage_weights(const std::vector<double>& targets) {
  std::vector<double> z(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) z[i] = 1.0 / (targets[i] * targets[i]);
  return z;
}

RegressionTree bootstrap_tree(const std::vector<std::vector<double>>& rows,
                              const std::vector<double>& targets,
                              const std::vector<double>& weights, int min_samples_split,
                              int max_depth, std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  const std::size_t n = targets.size();
  std::vector<std::size_t> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
  }
  return fit_tree(rows, targets, weights, samples,
                  TreeFitConfig{min_samples_split, max_depth});
}

// Grid in tie-break order: fewer trees first, then larger (more regularized)
// min_samples_split.
std::vector<int> descending(std::vector<int> values) {
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

}  // namespace

RandomForestModel train_rf(const TrainingSet& data, std::uint64_t seed, const RfConfig& config) {
  data.check();
  if (config.n_trees_grid.empty() || config.min_split_grid.empty()) {
    throw Error("random forest: empty hyperparameter grid");
  }

  std::vector<int> trees_grid = config.n_trees_grid;
  std::sort(trees_grid.begin(), trees_grid.end());
  const std::vector<int> split_grid = descending(config.min_split_grid);
  const int max_trees = trees_grid.back();

  int best_trees = trees_grid.front();
  int best_split = split_grid.front();

  const std::size_t n = data.size();
  if (n >= 2) {
    const int k = static_cast<int>(std::min<std::size_t>(5, n));
    const auto folds = kfold_indices(n, k, derive_seed(seed, kFoldStream));

    // cv_sum[split_index][trees_index]
    std::vector<std::vector<double>> cv_sum(split_grid.size(),
                                            std::vector<double>(trees_grid.size(), 0.0));

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
      const std::vector<double> train_weights = percentage_weights(train_targets);

      std::vector<double> val_actual;
      val_actual.reserve(folds[f].size());
      for (std::size_t i : folds[f]) val_actual.push_back(data.targets[i]);

      for (std::size_t si = 0; si < split_grid.size(); ++si) {
        const std::uint64_t mss_seed =
            derive_seed(derive_seed(seed, kCvStream, f), static_cast<std::uint64_t>(split_grid[si]));

        // Growing the forest once and reading off prefix means evaluates
        // every n_trees value with the trees it would actually contain.
        std::vector<double> prediction_sum(folds[f].size(), 0.0);
        std::size_t grid_at = 0;
        for (int t = 0; t < max_trees; ++t) {
          const RegressionTree tree =
              bootstrap_tree(train_rows, train_targets, train_weights, split_grid[si],
                             config.max_depth, derive_seed(mss_seed, static_cast<std::uint64_t>(t)));
          for (std::size_t v = 0; v < folds[f].size(); ++v) {
            prediction_sum[v] += predict(tree, data.rows[folds[f][v]]);
          }
          while (grid_at < trees_grid.size() && trees_grid[grid_at] == t + 1) {
            std::vector<double> mean(prediction_sum.size());
            for (std::size_t v = 0; v < mean.size(); ++v) {
              mean[v] = prediction_sum[v] / static_cast<double>(t + 1);
            }
            cv_sum[si][grid_at] += mape(mean, val_actual);
            ++grid_at;
          }
        }
      }
    }

    bool first = true;
    double best_mape = 0.0;
    for (std::size_t ti = 0; ti < trees_grid.size(); ++ti) {
      for (std::size_t si = 0; si < split_grid.size(); ++si) {
        const double cv = cv_sum[si][ti] / static_cast<double>(folds.size());
        if (first || cv < best_mape) {
          first = false;
          best_mape = cv;
          best_trees = trees_grid[ti];
          best_split = split_grid[si];
        }
      }
    }
  }

  RandomForestModel model;
  model.n_trees = best_trees;
  model.min_samples_split = best_split;
  model.rng_seed = seed;
  model.n_features = static_cast<int>(data.width());
  const std::vector<double> weights = percentage_weights(data.targets);
  const std::uint64_t final_seed = derive_seed(seed, kFinalStream);
  for (int t = 0; t < best_trees; ++t) {
    model.trees.push_back(bootstrap_tree(data.rows, data.targets, weights, best_split,
                                         config.max_depth,
                                         derive_seed(final_seed, static_cast<std::uint64_t>(t))));
  }
  return model;
}

double predict(const RandomForestModel& model, std::span<const double> row) {
  if (static_cast<int>(row.size()) != model.n_features) {
    throw Error("random forest predict: schema mismatch");
  }
  if (model.trees.empty()) throw Error("random forest predict: no trees");
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += predict(tree, row);
  return sum / static_cast<double>(model.trees.size());
}

}  // namespace latpred
