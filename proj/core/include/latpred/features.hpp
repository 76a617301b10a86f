#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latpred/gpu_compile.hpp"
#include "latpred/graph.hpp"

// Per-kernel feature extraction. Each kernel class has a fixed, ordered
// feature schema; one regressor is trained per class, so rows never mix
// schemas. A fused kernel is described entirely by its dominant base
// operation: the linked elementwise tail rides along for free.

namespace latpred {

struct FeatureVector {
  KernelKind schema = KernelKind::kConv2D;
  std::vector<double> values;  // schema order
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Ordered feature names for a schema.
std::span<const std::string> schema_feature_names(KernelKind kind);
std::size_t schema_size(KernelKind kind);

// Index of "flops" within a schema, or -1 where the schema has none.
int schema_flops_index(KernelKind kind);

// Extracts the feature row for one kernel from a shape-inferred graph.
// Throws Error when shapes are missing or the base node's kind cannot
// produce the kernel's class.
FeatureVector extract_features(const Kernel& kernel, const ComputationalGraph& graph);

// Multiply-accumulates counted twice, matching the schemas' flops entries.
std::int64_t kernel_flops(const Kernel& kernel, const ComputationalGraph& graph);

// Per-feature affine normalization to zero mean and unit variance, fitted
// column-wise on raw rows. Population variance; near-constant columns are
// guarded by an epsilon floor on the deviation so transform never divides by
// zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stdev;
  friend bool operator==(const Standardizer&, const Standardizer&) = default;

  static constexpr double kMinStdev = 1e-12;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows);
std::vector<double> standardize(const Standardizer& s, std::span<const double> row);
std::vector<std::vector<double>> standardize_rows(const Standardizer& s,
                                                  const std::vector<std::vector<double>>& rows);

}  // namespace latpred
