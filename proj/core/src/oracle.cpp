#include <cmath>
#include <cstddef>
#include <utility>

#include "latpred/oracle.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

constexpr std::uint64_t kLinearStream = 0x6f72632d6c696eull;
constexpr std::uint64_t kPiecewiseStream = 0x6f72632d7063ull;
constexpr std::uint64_t kSmoothStream = 0x6f72632d736dull;
constexpr std::uint64_t kNoiseStream = 0x6f72632d6e6f6973ull;

bool is_size_feature(const std::string& name) {
  return name.size() >= 5 && name.compare(name.size() - 5, 5, "_size") == 0;
}

// Square-resolution training data makes width features copies of their
// height twins; the generator leaves them at exactly zero so the generating
// weights stay identifiable from such data.
bool is_width_twin(const std::string& name) {
  return name == "input_w" || name == "output_w" || name == "kernel_w";
}

// Characteristic magnitude of a feature, used to place weights and
// thresholds so every feature contributes at a comparable ms scale.
double feature_scale(const std::string& name) {
  if (name == "flops") return 3e-9;
  if (is_size_feature(name)) return 2e-7;
  return 2e-4;
}

// Uniform draw in [0.5, 1.5): a bounded positive jitter factor.
double jitter(Rng& rng) { return 0.5 + uniform_real01(rng); }

}  // namespace

CostOracle CostOracle::from_spec(const OracleSpec& spec) {
  CostOracle oracle;
  oracle.kind_ = spec.kind;
  for (KernelKind kind : all_kernel_kinds()) {
    const auto names = schema_feature_names(kind);
    switch (spec.kind) {
      case OracleKind::kLinear: {
        Rng rng(derive_seed(spec.seed, kLinearStream, static_cast<std::uint64_t>(kind)));
        std::vector<double> weights;
        weights.reserve(names.size());
        for (const auto& name : names) {
          const double w = feature_scale(name) * jitter(rng);
          weights.push_back(is_width_twin(name) ? 0.0 : w);
        }
        oracle.linear_.emplace(kind, std::move(weights));
        break;
      }
      case OracleKind::kPiecewise: {
        Rng rng(derive_seed(spec.seed, kPiecewiseStream, static_cast<std::uint64_t>(kind)));
        PiecewiseParams params;
        params.base_ms = 0.5 * jitter(rng);
        // Steps on the most latency-relevant column: flops when the schema
        // has one, otherwise its first size feature.
        int feature = schema_flops_index(kind);
        if (feature < 0) {
          for (std::size_t i = 0; i < names.size(); ++i) {
            if (is_size_feature(names[i])) {
              feature = static_cast<int>(i);
              break;
            }
          }
        }
        const double scale = names[static_cast<std::size_t>(feature)] == "flops" ? 1e8 : 1e5;
        for (double at : {0.25, 1.0, 4.0}) {
          PiecewiseRule rule;
          rule.feature = feature;
          rule.threshold = scale * at * jitter(rng);
          rule.step_ms = 0.8 * jitter(rng);
          params.rules.push_back(rule);
        }
        oracle.piecewise_.emplace(kind, params);
        break;
      }
      case OracleKind::kSmooth: {
        Rng rng(derive_seed(spec.seed, kSmoothStream, static_cast<std::uint64_t>(kind)));
        SmoothParams params;
        params.c0 = 0.4 * jitter(rng);
        params.c1 = 2.0 * jitter(rng);
        params.c2 = 0.6 * jitter(rng);
        params.c3 = 1.5 * jitter(rng);
        params.c4 = 0.8 * jitter(rng);
        oracle.smooth_.emplace(kind, params);
        break;
      }
    }
  }
  return oracle;
}

CostOracle CostOracle::linear(std::map<KernelKind, std::vector<double>> weights) {
  for (const auto& [kind, w] : weights) {
    if (w.size() != schema_size(kind)) {
      throw Error("oracle: weight vector for " + std::string(kernel_kind_name(kind)) +
                  " does not match its schema width");
    }
    bool any_positive = false;
    for (double v : w) {
      if (v < 0.0) throw Error("oracle: linear weights must be nonnegative");
      if (v > 0.0) any_positive = true;
    }
    if (!any_positive) {
      throw Error("oracle: linear weights for " + std::string(kernel_kind_name(kind)) +
                  " are all zero");
    }
  }
  CostOracle oracle;
  oracle.kind_ = OracleKind::kLinear;
  oracle.linear_ = std::move(weights);
  return oracle;
}

double CostOracle::latency_of(const FeatureVector& features) const {
  const auto names = schema_feature_names(features.schema);
  if (features.values.size() != names.size()) {
    throw Error("oracle: feature vector does not match its schema width");
  }
  switch (kind_) {
    case OracleKind::kLinear: {
      const auto it = linear_.find(features.schema);
      if (it == linear_.end()) {
        throw Error("oracle: no linear weights for kernel kind " +
                    std::string(kernel_kind_name(features.schema)));
      }
      double ms = 0.0;
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        ms += it->second[i] * features.values[i];
      }
      return ms;
    }
    case OracleKind::kPiecewise: {
      const auto& params = piecewise_.at(features.schema);
      double ms = params.base_ms;
      for (const auto& rule : params.rules) {
        if (features.values[static_cast<std::size_t>(rule.feature)] > rule.threshold) {
          ms += rule.step_ms;
        }
      }
      return ms;
    }
    default: {
      const auto& params = smooth_.at(features.schema);
      const int flops = schema_flops_index(features.schema);
      const double u =
          flops < 0 ? 0.0 : features.values[static_cast<std::size_t>(flops)] / 1e9;
      double v = 0.0;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (is_size_feature(names[i])) v += features.values[i];
      }
      v /= 1e7;
      return params.c0 + params.c1 * u + params.c2 * u * u + params.c3 * v + params.c4 * u * v;
    }
  }
}

std::span<const double> CostOracle::linear_weights(KernelKind kind) const {
  if (kind_ != OracleKind::kLinear) throw Error("oracle: not a linear oracle");
  const auto it = linear_.find(kind);
  if (it == linear_.end()) {
    throw Error("oracle: no linear weights for kernel kind " +
                std::string(kernel_kind_name(kind)));
  }
  return it->second;
}

MeasurementSet generate_dataset(const std::vector<GraphRecord>& graphs,
                                const ScenarioKey& scenario, const OracleSpec& spec,
                                const std::optional<GpuInfo>& gpu, bool fusion) {
  return generate_dataset(graphs, scenario, CostOracle::from_spec(spec), spec.noise_sigma,
                          spec.seed, spec.overhead_ms, gpu, fusion);
}

MeasurementSet generate_dataset(const std::vector<GraphRecord>& graphs,
                                const ScenarioKey& scenario, const CostOracle& oracle,
                                double noise_sigma, std::uint64_t seed, double overhead_ms,
                                const std::optional<GpuInfo>& gpu, bool fusion) {
  if (noise_sigma < 0.0) throw Error("generate: noise sigma must be nonnegative");
  if (overhead_ms < 0.0) throw Error("generate: overhead must be nonnegative");
  if (scenario.accelerator == Accelerator::kGpu && !gpu) {
    throw Error("generate: gpu scenario requires gpu information");
  }

  MeasurementSet out;
  out.scenario = scenario;
  out.architectures.reserve(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const ComputationalGraph graph = infer_shapes(graphs[gi].graph);
    const KernelSequence sequence = scenario.accelerator == Accelerator::kGpu
                                        ? compile(graph, *gpu, fusion)
                                        : compile_cpu(graph);

    ArchitectureMeasurement arch;
    arch.graph_ref = graphs[gi].ref;
    double total = overhead_ms;
    for (std::size_t ki = 0; ki < sequence.kernels.size(); ++ki) {
      const Kernel& kernel = sequence.kernels[ki];
      double ms = oracle.latency_of(extract_features(kernel, graph));
      if (noise_sigma > 0.0) {
        // One independent stream per (graph, kernel) position keeps the draw
        // stable no matter how callers batch or order the graphs.
        Rng noise(derive_seed(seed, kNoiseStream, gi, ki));
        ms *= std::exp(noise_sigma * normal01(noise));
      }
      arch.kernels.push_back({kernel.base_node, ms});
      total += ms;
    }
    arch.end_to_end_ms = total;
    out.architectures.push_back(std::move(arch));
  }
  return out;
}

}  // namespace latpred
