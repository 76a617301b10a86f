#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latpred/features.hpp"
#include "latpred/gpu_compile.hpp"
#include "latpred/measurements.hpp"

// Synthetic ground-truth cost functions. These stand in for device
// measurements so the train → predict → evaluate loop can be verified against
// a known generator: linear oracles make Lasso recovery exact, the smooth
// oracle exercises the tree ensembles, and multiplicative log-normal noise
// models run-to-run variance without ever producing nonpositive latencies.

namespace latpred {

enum class OracleKind { kLinear, kPiecewise, kSmooth };

struct OracleSpec {
  OracleKind kind = OracleKind::kLinear;
  double noise_sigma = 0.0;  // stddev of log-latency perturbation, >= 0
  std::uint64_t seed = 0;
  double overhead_ms = 0.0;  // constant added to each end-to-end latency
};

// A deterministic positive cost function over feature vectors, one parameter
// set per kernel kind. Construction validates that latencies are structurally
// positive (nonnegative weights with positive mass on always-positive
// features, positive bases).
class CostOracle {
 public:
  static CostOracle from_spec(const OracleSpec& spec);
  // Explicit linear weights (schema order) per kind; kinds not present throw
  // on use. Weights must be nonnegative with at least one strictly positive
  // entry per kind.
  static CostOracle linear(std::map<KernelKind, std::vector<double>> weights);

  OracleKind kind() const { return kind_; }

  // Noiseless ground-truth latency in ms; strictly positive.
  double latency_of(const FeatureVector& features) const;

  // Generator weights of a linear oracle (raw feature space). Throws for
  // other kinds.
  std::span<const double> linear_weights(KernelKind kind) const;

 private:
  CostOracle() = default;

  struct PiecewiseRule {
    int feature = 0;
    double threshold = 0.0;
    double step_ms = 0.0;  // added when feature > threshold
  };
  struct PiecewiseParams {
    double base_ms = 1.0;
    std::vector<PiecewiseRule> rules;
  };
  struct SmoothParams {
    // latency = c0 + c1·u + c2·u² + c3·v + c4·u·v, u = flops/1e9,
    // v = Σ size-features/1e7; all coefficients positive.
    double c0 = 1.0, c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  };

  OracleKind kind_ = OracleKind::kLinear;
  std::map<KernelKind, std::vector<double>> linear_;
  std::map<KernelKind, PiecewiseParams> piecewise_;
  std::map<KernelKind, SmoothParams> smooth_;
};

struct GraphRecord {
  std::string ref;  // stable reference recorded in the measurement set
  ComputationalGraph graph;
};

// Runs each graph through the backend lowering (GPU compile when gpu is set,
// CPU sequence otherwise), prices every kernel with the oracle, applies
// per-kernel multiplicative log-normal noise exp(noise_sigma · N(0,1)) from a
// per-(graph, kernel) derived stream, and sums. Deterministic per spec.seed
// regardless of graph-level parallelism.
MeasurementSet generate_dataset(const std::vector<GraphRecord>& graphs,
                                const ScenarioKey& scenario, const OracleSpec& spec,
                                const std::optional<GpuInfo>& gpu, bool fusion = true);

// Same, with a caller-built oracle (e.g. explicit linear weights).
MeasurementSet generate_dataset(const std::vector<GraphRecord>& graphs,
                                const ScenarioKey& scenario, const CostOracle& oracle,
                                double noise_sigma, std::uint64_t seed, double overhead_ms,
                                const std::optional<GpuInfo>& gpu, bool fusion = true);

}  // namespace latpred
