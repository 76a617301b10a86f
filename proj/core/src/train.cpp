#include <cmath>

#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace latpred {

double mape(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) throw Error("mape: length mismatch");
  if (actuals.empty()) throw Error("mape: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (!(actuals[i] > 0.0)) throw Error("mape: actuals must be positive");
    sum += std::abs((predictions[i] - actuals[i]) / actuals[i]);
  }
  return sum / static_cast<double>(actuals.size());
}

double mspe(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) throw Error("mspe: length mismatch");
  if (actuals.empty()) throw Error("mspe: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (!(actuals[i] > 0.0)) throw Error("mspe: actuals must be positive");
    const double e = (predictions[i] - actuals[i]) / actuals[i];
    sum += e * e;
  }
  return sum / static_cast<double>(actuals.size());
}

void TrainingSet::check() const {
  if (targets.empty()) throw Error("training set: empty data");
  if (rows.size() != targets.size()) throw Error("training set: rows/targets length mismatch");
  const std::size_t d = rows[0].size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw Error("training set: ragged feature rows");
    for (double v : rows[i]) {
      if (!std::isfinite(v)) throw Error("training set: non-finite feature value");
    }
    if (!(targets[i] > 0.0) || !std::isfinite(targets[i])) {
      throw Error("training set: targets must be positive and finite");
    }
  }
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw Error("kfold: need 2 <= k <= n");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  shuffle<std::size_t>(rng, perm);

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    const std::size_t lo = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(k);
    const std::size_t hi = n * (static_cast<std::size_t>(f) + 1) / static_cast<std::size_t>(k);
    folds[static_cast<std::size_t>(f)].assign(perm.begin() + static_cast<std::ptrdiff_t>(lo),
                                              perm.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return folds;
}

}  // namespace latpred
