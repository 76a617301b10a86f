#include <algorithm>
#include <cmath>

#include "latpred/features.hpp"
#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

constexpr std::uint64_t kFoldStream = 0x6c617373666f6cull;

// Shared state for coordinate descent: 1/y² weights and running residuals
// r_i = y_i - intercept - w·x_i.
struct CdState {
  std::vector<double> z;  // 1/y_i²
  std::vector<double> r;
  double n = 0.0;
};

double weighted_residual_objective(const CdState& s, const TrainingSet& data,
                                   const LassoModel& m) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) loss += s.z[i] * s.r[i] * s.r[i];
  loss /= s.n;
  double l1 = 0.0;
  for (double w : m.weights) l1 += w;
  return loss + m.alpha * l1;
}

}  // namespace

LassoModel fit_lasso(const TrainingSet& data, double alpha, const LassoConfig& config,
                     LassoFitInfo* info) {
  data.check();
  if (!(alpha >= 0.0)) throw Error("lasso: alpha must be nonnegative");
  const std::size_t n = data.size();
  const std::size_t d = data.width();

  LassoModel model;
  model.alpha = alpha;
  model.weights.assign(d, 0.0);

  CdState s;
  s.n = static_cast<double>(n);
  s.z.resize(n);
  s.r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.z[i] = 1.0 / (data.targets[i] * data.targets[i]);
    s.r[i] = data.targets[i];  // intercept and weights start at zero
  }

  // Per-coordinate curvature A_j = Σ z_i x_ij²; constant across sweeps.
  std::vector<double> curvature(d, 0.0);
  double z_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z_total += s.z[i];
    for (std::size_t j = 0; j < d; ++j) {
      curvature[j] += s.z[i] * data.rows[i][j] * data.rows[i][j];
    }
  }

  if (info != nullptr) *info = LassoFitInfo{};
  const double l1_step = s.n * alpha / 2.0;

  int sweep = 0;
  for (; sweep < config.max_sweeps; ++sweep) {
    double max_change = 0.0;

    // Intercept: unpenalized, exact minimizer given current weights.
    {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += s.z[i] * s.r[i];
      const double delta = g / z_total;
      model.intercept += delta;
      for (std::size_t i = 0; i < n; ++i) s.r[i] -= delta;
      max_change = std::max(max_change, std::abs(delta));
    }

    for (std::size_t j = 0; j < d; ++j) {
      if (curvature[j] <= 0.0) continue;  // constant column, stays at zero
      // B_j = Σ z_i x_ij (r_i + x_ij w_j): gradient information with
      // coordinate j backed out.
      double b = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        b += s.z[i] * data.rows[i][j] * (s.r[i] + data.rows[i][j] * model.weights[j]);
      }
      const double updated = std::max(0.0, (b - l1_step) / curvature[j]);
      const double delta = updated - model.weights[j];
      if (delta != 0.0) {
        model.weights[j] = updated;
        for (std::size_t i = 0; i < n; ++i) s.r[i] -= delta * data.rows[i][j];
      }
      max_change = std::max(max_change, std::abs(delta));
    }

    if (info != nullptr) {
      info->objective_trace.push_back(weighted_residual_objective(s, data, model));
    }
    if (max_change < config.tolerance) {
      ++sweep;
      if (info != nullptr) info->converged = true;
      break;
    }
  }
  if (info != nullptr) info->sweeps = sweep;
  return model;
}

double lasso_objective(const LassoModel& model, const TrainingSet& data) {
  std::vector<double> predictions(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    // Raw affine output, not the clamped prediction: the objective is defined
    // on the linear model.
    double value = model.intercept;
    for (std::size_t j = 0; j < data.width(); ++j) value += model.weights[j] * data.rows[i][j];
    predictions[i] = value;
  }
  double l1 = 0.0;
  for (double w : model.weights) l1 += w;
  return mspe(predictions, data.targets) + model.alpha * l1;
}

double lasso_kkt_violation(const LassoModel& model, const TrainingSet& data) {
  data.check();
  const std::size_t n = data.size();
  const std::size_t d = data.width();
  if (model.weights.size() != d) throw Error("lasso: schema mismatch");

  std::vector<double> z(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = 1.0 / (data.targets[i] * data.targets[i]);
    double value = model.intercept;
    for (std::size_t j = 0; j < d; ++j) value += model.weights[j] * data.rows[i][j];
    r[i] = data.targets[i] - value;
  }

  double worst = 0.0;
  {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += -2.0 * z[i] * r[i];
    worst = std::abs(g / static_cast<double>(n));
  }
  for (std::size_t j = 0; j < d; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += -2.0 * z[i] * r[i] * data.rows[i][j];
    g /= static_cast<double>(n);
    // Stationarity: active coordinates sit exactly against the penalty;
    // inactive ones must not want to grow.
    const double violation =
        model.weights[j] > 0.0 ? std::abs(g + model.alpha) : std::max(0.0, -(g + model.alpha));
    worst = std::max(worst, violation);
  }
  return worst;
}

std::vector<double> default_alpha_grid() {
  return {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2};
}

LassoModel train_lasso(const TrainingSet& data, std::uint64_t seed,
                       const std::vector<double>& alpha_grid, const LassoConfig& config) {
  data.check();
  if (alpha_grid.empty()) throw Error("lasso: empty alpha grid");

  // Largest alpha first: on ties the sparser model wins.
  std::vector<double> grid = alpha_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());

  double best_alpha = grid.front();
  if (data.size() >= 2) {
    const int k = static_cast<int>(std::min<std::size_t>(5, data.size()));
    const auto folds = kfold_indices(data.size(), k, derive_seed(seed, kFoldStream));

    double best_mape = 0.0;
    bool first = true;
    for (double alpha : grid) {
      double total = 0.0;
      for (const auto& fold : folds) {
        std::vector<bool> held(data.size(), false);
        for (std::size_t i : fold) held[i] = true;

        TrainingSet train;
        for (std::size_t i = 0; i < data.size(); ++i) {
          if (held[i]) continue;
          train.rows.push_back(data.rows[i]);
          train.targets.push_back(data.targets[i]);
        }
        const LassoModel m = fit_lasso(train, alpha, config);

        std::vector<double> p, a;
        p.reserve(fold.size());
        a.reserve(fold.size());
        for (std::size_t i : fold) {
          p.push_back(predict(m, data.rows[i]));
          a.push_back(data.targets[i]);
        }
        total += mape(p, a);
      }
      const double cv = total / static_cast<double>(folds.size());
      if (first || cv < best_mape) {
        first = false;
        best_mape = cv;
        best_alpha = alpha;
      }
    }
  }

  return fit_lasso(data, best_alpha, config);
}

double predict(const LassoModel& model, std::span<const double> row) {
  if (row.size() != model.weights.size()) throw Error("lasso predict: schema mismatch");
  double value = model.intercept;
  for (std::size_t j = 0; j < row.size(); ++j) value += model.weights[j] * row[j];
  return std::max(0.0, value);
}

std::vector<std::pair<std::string, double>> feature_importance(const LassoModel& model) {
  const auto names = schema_feature_names(model.schema);
  if (names.size() != model.weights.size()) throw Error("lasso: schema mismatch");
  std::vector<std::size_t> order(names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&model](std::size_t a, std::size_t b) {
    return model.weights[a] > model.weights[b];
  });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.emplace_back(names[i], model.weights[i]);
  return out;
}

}  // namespace latpred
