#include <algorithm>
#include <cmath>

#include "latpred/predictors.hpp"

namespace latpred {
namespace {

// Splits with less improvement than this are noise; also the zero-variance
// stopping level. Both thresholds compare weighted sums of squared relative
// errors, which are invariant under rescaling the targets, so they do not
// break scale covariance.
constexpr double kMinGain = 1e-12;
constexpr double kMinSse = 1e-12;

struct Accum {
  double w = 0.0;  // Σ weight
  double m = 0.0;  // Σ weight · target
  double s = 0.0;  // Σ weight · target²

  void add(double weight, double target) {
    w += weight;
    m += weight * target;
    s += weight * target * target;
  }
  double sse() const { return w > 0.0 ? std::max(0.0, s - m * m / w) : 0.0; }
  double mean() const { return m / w; }
};

struct WorkItem {
  std::vector<std::size_t> samples;
  int node = 0;
  int depth = 0;
};

}  // namespace

RegressionTree fit_tree(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& targets, const std::vector<double>& weights,
                        const std::vector<std::size_t>& samples, const TreeFitConfig& config) {
  if (samples.empty()) throw Error("tree: no samples");
  if (rows.size() != targets.size() || rows.size() != weights.size()) {
    throw Error("tree: rows/targets/weights length mismatch");
  }
  const std::size_t d = rows.empty() ? 0 : rows[0].size();

  RegressionTree tree;
  tree.nodes.emplace_back();
  std::vector<WorkItem> stack;
  stack.push_back(WorkItem{samples, 0, 0});

  std::vector<std::size_t> order;
  while (!stack.empty()) {
    WorkItem item = std::move(stack.back());
    stack.pop_back();

    Accum total;
    for (std::size_t i : item.samples) total.add(weights[i], targets[i]);

    TreeNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
    node.value = total.mean();

    const bool at_depth_limit = config.max_depth >= 0 && item.depth >= config.max_depth;
    if (static_cast<int>(item.samples.size()) < config.min_samples_split || at_depth_limit ||
        total.sse() <= kMinSse) {
      continue;  // leaf
    }

    // Exhaustive search over (feature, threshold). Features ascending,
    // thresholds ascending; the first strictly-best gain wins, which pins
    // tie-breaking.
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      order = item.samples;
      std::stable_sort(order.begin(), order.end(), [&rows, j](std::size_t a, std::size_t b) {
        return rows[a][j] < rows[b][j];
      });

      Accum left;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        left.add(weights[order[k]], targets[order[k]]);
        const double lo = rows[order[k]][j];
        const double hi = rows[order[k + 1]][j];
        if (!(lo < hi)) continue;  // same value, no boundary here

        double threshold = (lo + hi) / 2.0;
        if (!(threshold < hi)) threshold = lo;  // midpoint rounded up to hi

        Accum right;
        right.w = total.w - left.w;
        right.m = total.m - left.m;
        right.s = total.s - left.s;
        const double gain = total.sse() - left.sse() - right.sse();
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(j);
          best_threshold = threshold;
        }
      }
    }

    if (best_feature < 0 || best_gain <= kMinGain) continue;

    std::vector<std::size_t> left_samples, right_samples;
    for (std::size_t i : item.samples) {
      (rows[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_samples
                                                                         : right_samples)
          .push_back(i);
    }

    const int left_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    // emplace may reallocate; re-resolve the node reference.
    TreeNode& parent = tree.nodes[static_cast<std::size_t>(item.node)];
    parent.feature = best_feature;
    parent.threshold = best_threshold;
    parent.left = left_index;
    parent.right = right_index;

    stack.push_back(WorkItem{std::move(right_samples), right_index, item.depth + 1});
    stack.push_back(WorkItem{std::move(left_samples), left_index, item.depth + 1});
  }
  return tree;
}

double predict(const RegressionTree& tree, std::span<const double> row) {
  if (tree.nodes.empty()) throw Error("tree predict: empty tree");
  std::size_t at = 0;
  while (tree.nodes[at].feature >= 0) {
    const TreeNode& n = tree.nodes[at];
    const std::size_t j = static_cast<std::size_t>(n.feature);
    if (j >= row.size()) throw Error("tree predict: schema mismatch");
    at = static_cast<std::size_t>(row[j] <= n.threshold ? n.left : n.right);
  }
  return tree.nodes[at].value;
}

}  // namespace latpred
