#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "latpred/bundle.hpp"
#include "latpred/gpu_compile.hpp"
#include "latpred/graph.hpp"
#include "latpred/measurements.hpp"

// End-to-end latency composition: an architecture's predicted latency is the
// scenario's overhead constant plus the sum of per-kernel predictions over
// the kernels the backend would execute.

namespace latpred {

struct KernelPrediction {
  std::string id;  // base node id
  KernelKind kind = KernelKind::kConv2D;
  double ms = 0.0;
};

struct LatencyPrediction {
  double total_ms = 0.0;
  double overhead_ms = 0.0;
  std::vector<KernelPrediction> per_kernel;  // execution order
};

// Mean over architectures of (end-to-end − Σ per-op): the framework time not
// attributable to any kernel. Negative differences are measurement noise and
// average in as-is. Throws on empty input.
double estimate_overhead(const std::vector<std::pair<double, std::vector<double>>>& measured);
double estimate_overhead(const MeasurementSet& set);

// Predicts one graph under one scenario. GPU scenarios compile the graph
// (fusion on by default) and require gpu info; CPU scenarios predict the raw
// operation sequence. Shapes are inferred internally. Throws Error when the
// bundle lacks the scenario or a kernel kind the graph needs.
LatencyPrediction predict_end_to_end(const ComputationalGraph& graph, const ScenarioKey& scenario,
                                     const PredictorBundle& bundle,
                                     const std::optional<GpuInfo>& gpu, bool fusion = true);

struct EvalReport {
  double end_to_end_mape = 0.0;
  std::size_t architecture_count = 0;
  // Kernel-level MAPE per kind, over kernels with measured counterparts
  // (matched by base node id), with the sample count per kind.
  std::map<KernelKind, std::pair<double, std::size_t>> per_kind;
};

// Evaluates a bundle against measurements; graphs are looked up by
// graph_ref. Throws on empty sets or missing graphs.
EvalReport evaluate(const PredictorBundle& bundle, const MeasurementSet& measurements,
                    const std::map<std::string, ComputationalGraph>& graphs,
                    const std::optional<GpuInfo>& gpu, bool fusion = true);

}  // namespace latpred
