// Microbenchmarks for the hot paths of the prediction pipeline: graph
// lowering, feature extraction, model inference, and the end-to-end composer.
// Sizes mirror what a NAS search loop would push through the toolkit.

#include <cstdint>
#include <map>
#include <vector>

#include <benchmark/benchmark.h>

#include "latpred/bundle.hpp"
#include "latpred/features.hpp"
#include "latpred/gpu_compile.hpp"
#include "latpred/graph.hpp"
#include "latpred/latency.hpp"
#include "latpred/nas.hpp"
#include "latpred/oracle.hpp"
#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

const GpuInfo kGpu{GpuVendorClass::kAdreno6xx};

ComputationalGraph sampled_graph(std::uint64_t seed) {
  return infer_shapes(lower_to_graph(sample_architecture(seed)));
}

void BM_SampleAndLower(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lower_to_graph(sample_architecture(seed++)));
  }
}
BENCHMARK(BM_SampleAndLower);

void BM_InferShapes(benchmark::State& state) {
  const ComputationalGraph graph = lower_to_graph(sample_architecture(7));
  for (auto _ : state) {
    benchmark::DoNotOptimize(infer_shapes(graph));
  }
}
BENCHMARK(BM_InferShapes);

void BM_GpuCompile(benchmark::State& state) {
  const ComputationalGraph shaped = sampled_graph(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compile(shaped, kGpu));
  }
}
BENCHMARK(BM_GpuCompile);

void BM_ExtractFeatures(benchmark::State& state) {
  const ComputationalGraph shaped = sampled_graph(7);
  const KernelSequence sequence = compile(shaped, kGpu);
  for (auto _ : state) {
    for (const Kernel& kernel : sequence.kernels) {
      benchmark::DoNotOptimize(extract_features(kernel, shaped));
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(sequence.kernels.size()));
}
BENCHMARK(BM_ExtractFeatures);

// Shared synthetic training data: conv feature rows priced by a linear
// oracle, standardized.
struct ConvData {
  TrainingSet data;
  Standardizer standardizer;
};

ConvData make_conv_data(std::size_t want) {
  const CostOracle oracle = CostOracle::from_spec(OracleSpec{OracleKind::kSmooth, 0.0, 11, 0.0});
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  for (std::uint64_t seed = 1; rows.size() < want; ++seed) {
    const ComputationalGraph shaped = sampled_graph(seed);
    for (const Kernel& kernel : compile_cpu(shaped).kernels) {
      if (kernel.kind != KernelKind::kConv2D) continue;
      FeatureVector features = extract_features(kernel, shaped);
      targets.push_back(oracle.latency_of(features));
      rows.push_back(std::move(features.values));
      if (rows.size() == want) break;
    }
  }
  ConvData out;
  out.standardizer = fit_standardizer(rows);
  out.data = TrainingSet{standardize_rows(out.standardizer, rows), std::move(targets)};
  return out;
}

void BM_FitLasso(benchmark::State& state) {
  const ConvData conv = make_conv_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_lasso(conv.data, 1e-3));
  }
}
BENCHMARK(BM_FitLasso)->Arg(64)->Arg(256);

void BM_TrainGbdt(benchmark::State& state) {
  const ConvData conv = make_conv_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_gbdt(conv.data, 5));
  }
}
BENCHMARK(BM_TrainGbdt)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PredictLasso(benchmark::State& state) {
  const ConvData conv = make_conv_data(256);
  const LassoModel model = train_lasso(conv.data, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(model, conv.data.rows[i++ % conv.data.size()]));
  }
}
BENCHMARK(BM_PredictLasso);

void BM_PredictGbdt(benchmark::State& state) {
  const ConvData conv = make_conv_data(256);
  const GbdtModel model = train_gbdt(conv.data, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(model, conv.data.rows[i++ % conv.data.size()]));
  }
}
BENCHMARK(BM_PredictGbdt);

// End-to-end path as a NAS loop would drive it: graph in, latency out,
// using a trained-once bundle.
void BM_PredictEndToEnd(benchmark::State& state) {
  const ScenarioKey scenario = parse_scenario("sd855:gpu::f32");
  std::vector<GraphRecord> records;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    records.push_back(GraphRecord{"g" + std::to_string(seed), lower_to_graph(sample_architecture(seed))});
  }
  const MeasurementSet measurements =
      generate_dataset(records, scenario, OracleSpec{OracleKind::kLinear, 0.0, 11, 1.0}, kGpu);

  std::map<KernelKind, std::vector<std::vector<double>>> rows;
  std::map<KernelKind, std::vector<double>> targets;
  std::map<std::string, ComputationalGraph> shaped;
  for (const auto& record : records) shaped.emplace(record.ref, infer_shapes(record.graph));
  for (const auto& arch : measurements.architectures) {
    std::map<std::string, double> by_id;
    for (const auto& k : arch.kernels) by_id.emplace(k.id, k.ms);
    for (const Kernel& kernel : compile(shaped.at(arch.graph_ref), kGpu).kernels) {
      rows[kernel.kind].push_back(extract_features(kernel, shaped.at(arch.graph_ref)).values);
      targets[kernel.kind].push_back(by_id.at(kernel.base_node));
    }
  }
  PredictorBundle bundle;
  ScenarioPredictors& predictors = bundle.find_or_add(scenario);
  predictors.overhead_ms = 1.0;
  for (const auto& [kind, kind_rows] : rows) {
    const Standardizer standardizer = fit_standardizer(kind_rows);
    LassoModel model =
        train_lasso(TrainingSet{standardize_rows(standardizer, kind_rows), targets[kind]}, 3);
    model.schema = kind;
    predictors.entries.push_back(PredictorEntry{kind, standardizer, std::move(model)});
  }

  const ComputationalGraph graph = lower_to_graph(sample_architecture(99));
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_end_to_end(graph, scenario, bundle, kGpu));
  }
}
BENCHMARK(BM_PredictEndToEnd)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace latpred

BENCHMARK_MAIN();
