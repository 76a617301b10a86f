#include <unordered_map>

#include "latpred/features.hpp"
#include "latpred/latency.hpp"

namespace latpred {

double estimate_overhead(const std::vector<std::pair<double, std::vector<double>>>& measured) {
  if (measured.empty()) throw Error("estimate_overhead: empty input");
  double sum = 0.0;
  for (const auto& [end_to_end, per_op] : measured) {
    double ops = 0.0;
    for (double ms : per_op) ops += ms;
    sum += end_to_end - ops;
  }
  return sum / static_cast<double>(measured.size());
}

double estimate_overhead(const MeasurementSet& set) {
  std::vector<std::pair<double, std::vector<double>>> measured;
  measured.reserve(set.architectures.size());
  for (const auto& arch : set.architectures) {
    std::vector<double> per_op;
    per_op.reserve(arch.kernels.size());
    for (const auto& k : arch.kernels) per_op.push_back(k.ms);
    measured.emplace_back(arch.end_to_end_ms, std::move(per_op));
  }
  return estimate_overhead(measured);
}

namespace {

KernelSequence lower_for_scenario(const ComputationalGraph& graph, const ScenarioKey& scenario,
                                  const std::optional<GpuInfo>& gpu, bool fusion) {
  if (scenario.accelerator == Accelerator::kGpu) {
    if (!gpu) throw Error("predict: gpu scenario requires gpu info");
    return compile(graph, *gpu, fusion);
  }
  return compile_cpu(graph);
}

}  // namespace

LatencyPrediction predict_end_to_end(const ComputationalGraph& graph, const ScenarioKey& scenario,
                                     const PredictorBundle& bundle,
                                     const std::optional<GpuInfo>& gpu, bool fusion) {
  const ScenarioPredictors* predictors = bundle.find(scenario);
  if (predictors == nullptr) {
    throw Error("predict: bundle has no scenario '" + scenario_to_string(scenario) + "'");
  }

  const ComputationalGraph shaped = infer_shapes(graph);
  const KernelSequence sequence = lower_for_scenario(shaped, scenario, gpu, fusion);

  LatencyPrediction out;
  out.overhead_ms = predictors->overhead_ms;
  out.total_ms = predictors->overhead_ms;
  for (const auto& kernel : sequence.kernels) {
    const PredictorEntry* entry = predictors->find(kernel.kind);
    if (entry == nullptr) {
      throw Error(std::string("predict: no predictor for kernel kind '") +
                  kernel_kind_name(kernel.kind) + "' in scenario '" +
                  scenario_to_string(scenario) + "'");
    }
    const FeatureVector features = extract_features(kernel, shaped);
    const std::vector<double> row = standardize(entry->standardizer, features.values);
    const double ms = predict_any(entry->model, row);
    out.per_kernel.push_back(KernelPrediction{kernel.base_node, kernel.kind, ms});
    out.total_ms += ms;
  }
  return out;
}

EvalReport evaluate(const PredictorBundle& bundle, const MeasurementSet& measurements,
                    const std::map<std::string, ComputationalGraph>& graphs,
                    const std::optional<GpuInfo>& gpu, bool fusion) {
  if (measurements.architectures.empty()) throw Error("evaluate: empty test set");

  std::vector<double> predicted_totals, measured_totals;
  std::map<KernelKind, std::pair<std::vector<double>, std::vector<double>>> per_kind;

  for (const auto& arch : measurements.architectures) {
    auto it = graphs.find(arch.graph_ref);
    if (it == graphs.end()) {
      throw Error("evaluate: no graph for reference '" + arch.graph_ref + "'");
    }
    const LatencyPrediction prediction =
        predict_end_to_end(it->second, measurements.scenario, bundle, gpu, fusion);
    predicted_totals.push_back(prediction.total_ms);
    measured_totals.push_back(arch.end_to_end_ms);

    if (arch.kernels.empty()) continue;
    std::unordered_map<std::string_view, double> measured_by_id;
    for (const auto& k : arch.kernels) measured_by_id.emplace(k.id, k.ms);
    for (const auto& kp : prediction.per_kernel) {
      auto m = measured_by_id.find(kp.id);
      if (m == measured_by_id.end()) continue;
      auto& [pred, act] = per_kind[kp.kind];
      pred.push_back(kp.ms);
      act.push_back(m->second);
    }
  }

  EvalReport report;
  report.architecture_count = measurements.architectures.size();
  report.end_to_end_mape = mape(predicted_totals, measured_totals);
  for (const auto& [kind, series] : per_kind) {
    report.per_kind[kind] = {mape(series.first, series.second), series.first.size()};
  }
  return report;
}

}  // namespace latpred
