// latpred: command-line surface binding the library into the
// ingest -> compile -> train -> predict -> evaluate workflow.
//
// Subcommands: compile, train, predict, sample-nas, gen-data, eval, features.
// Machine-readable JSON goes to stdout (or -o FILE); human-readable summaries
// and the resolved configuration go to stderr, so every run can be reproduced
// from (inputs, logged config, seed).
//
// Exit codes: 0 success, 1 data/contract error, 2 usage error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "latpred/bundle.hpp"
#include "latpred/features.hpp"
#include "latpred/gpu_compile.hpp"
#include "latpred/graph.hpp"
#include "latpred/latency.hpp"
#include "latpred/measurements.hpp"
#include "latpred/nas.hpp"
#include "latpred/oracle.hpp"
#include "latpred/predictors.hpp"
#include "latpred/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace latpred {
namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

// Raised for problems with how the tool was invoked, as opposed to problems
// with the data it was pointed at.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Configuration: defaults may come from a JSON file named by --config or the
// LATPRED_CONFIG environment variable; individual flags override them.

struct Config {
  std::uint64_t seed = 0;
  std::string algo = "lasso";   // lasso | rf | gbdt
  std::string gpu;              // default --gpu value; empty means none
  bool fusion = true;
  std::string source = "builtin";
};

Config load_config(const std::string& explicit_path) {
  std::string path = explicit_path;
  std::string source = "--config";
  if (path.empty()) {
    if (const char* env = std::getenv("LATPRED_CONFIG"); env != nullptr && *env != '\0') {
      path = env;
      source = "LATPRED_CONFIG";
    } else {
      return {};
    }
  }
  std::ifstream in(path);
  if (!in) throw Error("config: cannot read '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw Error("config '" + path + "': expected a JSON object");
  Config config;
  config.source = source + ":" + path;
  for (const auto& [key, value] : doc.items()) {
    if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "algo") {
      config.algo = value.get<std::string>();
    } else if (key == "gpu") {
      config.gpu = value.get<std::string>();
    } else if (key == "fusion") {
      config.fusion = value.get<bool>();
    } else {
      throw Error("config '" + path + "': unknown key '" + key + "'");
    }
  }
  return config;
}

// Effective per-invocation settings after merging config defaults and flags.
struct Resolved {
  std::uint64_t seed = 0;
  std::string algo;
  std::optional<GpuInfo> gpu;
  std::string gpu_name;
  bool fusion = true;
};

Resolved resolve(const Config& config, const std::optional<std::uint64_t>& seed_flag,
                 const std::string& algo_flag, const std::string& gpu_flag, bool no_fusion) {
  Resolved r;
  r.seed = seed_flag.value_or(config.seed);
  r.algo = algo_flag.empty() ? config.algo : algo_flag;
  if (r.algo != "lasso" && r.algo != "rf" && r.algo != "gbdt") {
    throw UsageError("unknown --algo '" + r.algo + "' (expected lasso, rf or gbdt)");
  }
  r.gpu_name = gpu_flag.empty() ? config.gpu : gpu_flag;
  if (!r.gpu_name.empty()) {
    r.gpu = parse_gpu(r.gpu_name);
    if (!r.gpu) throw UsageError("unknown gpu vendor '" + r.gpu_name + "'");
  }
  r.fusion = no_fusion ? false : config.fusion;
  return r;
}

void log_config(const std::string& command, const Config& config, const Resolved& r) {
  json line{{"command", command},
            {"seed", r.seed},
            {"algo", r.algo},
            {"gpu", r.gpu_name},
            {"fusion", r.fusion},
            {"config_source", config.source}};
  std::cerr << "config: " << line.dump() << "\n";
}

// ---------------------------------------------------------------------------
// Small shared helpers.

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

KernelSequence lower(const ComputationalGraph& shaped, const std::optional<GpuInfo>& gpu,
                     bool fusion) {
  return gpu ? compile(shaped, *gpu, fusion) : compile_cpu(shaped);
}

ComputationalGraph load_validated_graph(const std::string& path) {
  const ComputationalGraph graph = parse_graph_file(path);
  const auto violations = validate(graph);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "graph '" << path << "' failed validation:";
    for (const auto& v : violations) msg << "\n  " << v.subject << ": " << v.message;
    throw Error(msg.str());
  }
  return graph;
}

// The gpu flag is mandatory for gpu scenarios: there is no sensible default
// vendor, and the compiled kernel sequence depends on it.
void require_gpu_for(const ScenarioKey& scenario, const Resolved& r) {
  if (scenario.accelerator == Accelerator::kGpu && !r.gpu) {
    throw UsageError("scenario '" + scenario_to_string(scenario) + "' targets a gpu; pass --gpu");
  }
}

std::optional<GpuInfo> scenario_gpu(const ScenarioKey& scenario, const Resolved& r) {
  return scenario.accelerator == Accelerator::kGpu ? r.gpu : std::nullopt;
}

// Sorted *.json graph files of a directory (manifest excluded); the key is
// the file name, which is what measurement graph_refs store.
std::vector<std::pair<std::string, fs::path>> graph_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("'" + dir + "' is not a directory");
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json" || entry.path().extension() != ".json") continue;
    files.emplace_back(name, entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no graph files in '" + dir + "'");
  return files;
}

json kernel_to_json(const Kernel& kernel) {
  return json{{"base_node", kernel.base_node},
              {"kind", kernel_kind_name(kernel.kind)},
              {"linked_nodes", kernel.linked_nodes}};
}

// ---------------------------------------------------------------------------
// compile: deduce the kernel sequence a backend would execute.

struct CompileOpts {
  std::string graph_path;
  std::string out;
};

int cmd_compile(const CompileOpts& o, const Resolved& r) {
  const ComputationalGraph graph = load_validated_graph(o.graph_path);
  const ComputationalGraph shaped = infer_shapes(graph);
  const bool fusion = r.gpu && r.fusion;
  const KernelSequence sequence = lower(shaped, r.gpu, fusion);

  json doc{{"backend", r.gpu ? "gpu" : "cpu"},
           {"fusion", fusion},
           {"node_count", graph.nodes.size()},
           {"kernel_count", sequence.kernels.size()},
           {"kernels", json::array()}};
  if (r.gpu) doc["vendor_class"] = gpu_vendor_class_name(r.gpu->vendor_class);
  for (const Kernel& kernel : sequence.kernels) doc["kernels"].push_back(kernel_to_json(kernel));
  write_output(doc.dump(2) + "\n", o.out);

  std::cerr << sequence.kernels.size() << " kernels from " << graph.nodes.size() << " nodes ("
            << (r.gpu ? gpu_vendor_class_name(r.gpu->vendor_class) : "cpu")
            << (fusion ? ", fused" : ", unfused") << ")\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// features: per-kernel feature rows for a graph.

int cmd_features(const CompileOpts& o, const Resolved& r) {
  const ComputationalGraph shaped = infer_shapes(load_validated_graph(o.graph_path));
  const KernelSequence sequence = lower(shaped, r.gpu, r.gpu && r.fusion);

  json rows = json::array();
  for (const Kernel& kernel : sequence.kernels) {
    const FeatureVector features = extract_features(kernel, shaped);
    const auto names = schema_feature_names(features.schema);
    json row{{"id", kernel.base_node},
             {"kind", kernel_kind_name(features.schema)},
             {"features", json::object()}};
    for (std::size_t j = 0; j < names.size(); ++j) row["features"][names[j]] = features.values[j];
    rows.push_back(std::move(row));
  }
  write_output(json{{"kernels", rows}}.dump(2) + "\n", o.out);
  std::cerr << rows.size() << " feature rows\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// sample-nas: write graphs sampled from the architecture space.

struct SampleOpts {
  int count = 10;
  std::string out_dir;
};

int cmd_sample_nas(const SampleOpts& o, const Resolved& r) {
  if (o.count <= 0) throw UsageError("--count must be positive");
  fs::create_directories(o.out_dir);

  json manifest{{"seed", r.seed}, {"count", o.count}, {"files", json::array()}};
  for (int i = 0; i < o.count; ++i) {
    // Per-index derived seeds keep output independent of iteration order.
    const auto arch_seed = derive_seed(r.seed, static_cast<std::uint64_t>(i));
    const ComputationalGraph graph = lower_to_graph(sample_architecture(arch_seed));
    char name[32];
    std::snprintf(name, sizeof(name), "arch_%04d.json", i);
    write_graph_file(graph, (fs::path(o.out_dir) / name).string());
    manifest["files"].push_back(name);
  }
  std::ofstream out(fs::path(o.out_dir) / "manifest.json");
  if (!out) throw Error("cannot write manifest in '" + o.out_dir + "'");
  out << manifest.dump(2) << "\n";

  std::cerr << "wrote " << o.count << " graphs to " << o.out_dir << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// gen-data: price a directory of graphs with a synthetic oracle.

struct GenDataOpts {
  std::string graphs_dir;
  std::string scenario;
  std::string oracle = "linear";
  double sigma = 0.0;
  double overhead = 0.0;
  std::string out;
};

OracleKind parse_oracle_kind(const std::string& name) {
  if (name == "linear") return OracleKind::kLinear;
  if (name == "piecewise") return OracleKind::kPiecewise;
  if (name == "smooth") return OracleKind::kSmooth;
  throw UsageError("unknown --oracle '" + name + "' (expected linear, piecewise or smooth)");
}

int cmd_gen_data(const GenDataOpts& o, const Resolved& r) {
  const ScenarioKey scenario = parse_scenario(o.scenario);
  const OracleKind oracle_kind = parse_oracle_kind(o.oracle);
  require_gpu_for(scenario, r);

  std::vector<GraphRecord> records;
  for (const auto& [name, path] : graph_files(o.graphs_dir)) {
    records.push_back(GraphRecord{name, parse_graph_file(path.string())});
  }
  const OracleSpec spec{oracle_kind, o.sigma, r.seed, o.overhead};
  const MeasurementSet set =
      generate_dataset(records, scenario, spec, scenario_gpu(scenario, r), r.fusion);

  if (o.out.empty() || o.out == "-") {
    std::cout << serialize_measurements(set);
  } else {
    write_measurements_file(set, o.out);
  }
  std::cerr << records.size() << " architectures measured under '" << o.scenario << "' ("
            << o.oracle << " oracle, sigma " << o.sigma << ", overhead " << o.overhead
            << " ms)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train: fit one predictor per kernel kind from per-kernel measurements.

struct TrainOpts {
  std::string measurements;
  std::string graphs_dir;
  std::string scenario;  // optional cross-check against the file
  std::string out;
};

AnyModel train_model(const std::string& algo, const TrainingSet& data, std::uint64_t seed,
                     KernelKind kind) {
  if (algo == "lasso") {
    LassoModel model = train_lasso(data, seed);
    model.schema = kind;
    return model;
  }
  if (algo == "rf") {
    RandomForestModel model = train_rf(data, seed);
    model.schema = kind;
    return model;
  }
  GbdtModel model = train_gbdt(data, seed);
  model.schema = kind;
  return model;
}

int cmd_train(const TrainOpts& o, const Resolved& r) {
  const MeasurementSet set = parse_measurements_file(o.measurements);
  if (!o.scenario.empty() && parse_scenario(o.scenario) != set.scenario) {
    throw Error("scenario mismatch: file has '" + scenario_to_string(set.scenario) +
                "', --scenario says '" + o.scenario + "'");
  }
  if (set.architectures.empty()) throw Error("measurement set is empty");
  require_gpu_for(set.scenario, r);
  const std::optional<GpuInfo> gpu = scenario_gpu(set.scenario, r);

  struct KindData {
    std::vector<std::vector<double>> rows;  // raw features
    std::vector<double> targets;
  };
  std::map<KernelKind, KindData> by_kind;
  std::map<std::string, ComputationalGraph> shaped_cache;
  std::size_t matched = 0, unmatched = 0;

  for (const auto& arch : set.architectures) {
    auto [it, inserted] = shaped_cache.try_emplace(arch.graph_ref);
    if (inserted) {
      it->second =
          infer_shapes(parse_graph_file((fs::path(o.graphs_dir) / arch.graph_ref).string()));
    }
    const ComputationalGraph& shaped = it->second;

    std::map<std::string, double> measured_by_id;
    for (const auto& k : arch.kernels) measured_by_id.emplace(k.id, k.ms);

    for (const Kernel& kernel : lower(shaped, gpu, r.fusion).kernels) {
      const auto m = measured_by_id.find(kernel.base_node);
      if (m == measured_by_id.end()) {
        ++unmatched;
        continue;
      }
      KindData& data = by_kind[kernel.kind];
      data.rows.push_back(extract_features(kernel, shaped).values);
      data.targets.push_back(m->second);
      ++matched;
    }
  }
  for (const auto& [kind, data] : by_kind) {
    if (data.rows.empty()) {
      throw Error(std::string("no measurements for kernel kind '") + kernel_kind_name(kind) +
                  "'");
    }
  }
  if (matched == 0) throw Error("no kernel measurements matched the compiled graphs");

  PredictorBundle bundle;
  ScenarioPredictors& predictors = bundle.find_or_add(set.scenario);
  predictors.overhead_ms = estimate_overhead(set);

  std::cerr << std::left << std::setw(18) << "kind" << std::right << std::setw(8) << "rows"
            << std::setw(14) << "train mape" << "\n";
  for (const auto& [kind, data] : by_kind) {
    const Standardizer standardizer = fit_standardizer(data.rows);
    TrainingSet training{standardize_rows(standardizer, data.rows), data.targets};
    training.check();
    const auto kind_seed = derive_seed(r.seed, static_cast<std::uint64_t>(kind));
    AnyModel model = train_model(r.algo, training, kind_seed, kind);

    std::vector<double> fitted;
    fitted.reserve(training.size());
    for (const auto& row : training.rows) fitted.push_back(predict_any(model, row));
    const double train_mape = mape(fitted, training.targets);

    std::cerr << std::left << std::setw(18) << kernel_kind_name(kind) << std::right
              << std::setw(8) << data.targets.size() << std::setw(13) << std::fixed
              << std::setprecision(2) << train_mape * 100.0 << "%\n";

    predictors.entries.push_back(PredictorEntry{kind, standardizer, std::move(model)});
  }
  std::cerr << "overhead " << std::setprecision(4) << predictors.overhead_ms << " ms; "
            << matched << " kernels matched";
  if (unmatched > 0) std::cerr << ", " << unmatched << " without measurements";
  std::cerr << "\n";

  write_bundle_file(bundle, o.out);
  std::cerr << "wrote bundle to " << o.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// predict: end-to-end latency of one graph under one scenario.

struct PredictOpts {
  std::string graph_path;
  std::string bundle_path;
  std::string scenario;
  std::string out;
};

int cmd_predict(const PredictOpts& o, const Resolved& r) {
  const ScenarioKey scenario = parse_scenario(o.scenario);
  require_gpu_for(scenario, r);

  const PredictorBundle bundle = parse_bundle_file(o.bundle_path);
  const ComputationalGraph graph = load_validated_graph(o.graph_path);
  const LatencyPrediction prediction =
      predict_end_to_end(graph, scenario, bundle, scenario_gpu(scenario, r), r.fusion);

  json doc{{"scenario", scenario_to_string(scenario)},
           {"total_ms", prediction.total_ms},
           {"overhead_ms", prediction.overhead_ms},
           {"per_kernel", json::array()}};
  for (const KernelPrediction& k : prediction.per_kernel) {
    doc["per_kernel"].push_back(
        json{{"id", k.id}, {"kind", kernel_kind_name(k.kind)}, {"ms", k.ms}});
  }
  write_output(doc.dump(2) + "\n", o.out);

  std::cerr << std::fixed << std::setprecision(3) << "total " << prediction.total_ms << " ms = "
            << prediction.overhead_ms << " ms overhead + " << prediction.per_kernel.size()
            << " kernels\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval: compare a bundle's predictions against measurements.

struct EvalOpts {
  std::string bundle_path;
  std::string measurements;
  std::string graphs_dir;
  std::string out;
};

int cmd_eval(const EvalOpts& o, const Resolved& r) {
  const MeasurementSet set = parse_measurements_file(o.measurements);
  require_gpu_for(set.scenario, r);
  const PredictorBundle bundle = parse_bundle_file(o.bundle_path);

  std::map<std::string, ComputationalGraph> graphs;
  for (const auto& arch : set.architectures) {
    if (graphs.count(arch.graph_ref)) continue;
    graphs.emplace(arch.graph_ref,
                   parse_graph_file((fs::path(o.graphs_dir) / arch.graph_ref).string()));
  }
  const EvalReport report =
      evaluate(bundle, set, graphs, scenario_gpu(set.scenario, r), r.fusion);

  json doc{{"scenario", scenario_to_string(set.scenario)},
           {"architecture_count", report.architecture_count},
           {"end_to_end_mape", report.end_to_end_mape},
           {"per_kind", json::object()}};
  for (const auto& [kind, entry] : report.per_kind) {
    doc["per_kind"][kernel_kind_name(kind)] = json{{"mape", entry.first},
                                                   {"count", entry.second}};
  }
  write_output(doc.dump(2) + "\n", o.out);

  std::cerr << std::fixed << std::setprecision(2) << "end-to-end mape "
            << report.end_to_end_mape * 100.0 << "% over " << report.architecture_count
            << " architectures\n";
  for (const auto& [kind, entry] : report.per_kind) {
    std::cerr << "  " << std::left << std::setw(18) << kernel_kind_name(kind) << std::right
              << std::setw(7) << std::setprecision(2) << entry.first * 100.0 << "%  ("
              << entry.second << " kernels)\n";
  }
  return kOk;
}

}  // namespace
}  // namespace latpred

int main(int argc, char** argv) {
  using namespace latpred;

  CLI::App app{"latency predictor toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "latpred 0.1.0");

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::string algo_flag, gpu_flag;
  bool no_fusion = false;
  app.add_option("--config", config_path,
                 "JSON config file with defaults (seed, algo, gpu, fusion); defaults to "
                 "$LATPRED_CONFIG");

  // Shared per-command options; registered on each subcommand so they read
  // naturally after the subcommand name.
  const auto add_common = [&](CLI::App* sub, bool with_algo) {
    sub->add_option("--seed", seed_flag, "seed for every random draw");
    sub->add_option("--gpu", gpu_flag,
                    "gpu vendor class or device name (e.g. adreno6xx, adreno640, mali-g76)");
    sub->add_flag("--no-fusion", no_fusion, "disable the gpu fusion pass");
    if (with_algo) sub->add_option("--algo", algo_flag, "predictor family: lasso, rf or gbdt");
  };

  CompileOpts compile_opts;
  CLI::App* compile_cmd = app.add_subcommand("compile", "deduce the executed kernel sequence");
  compile_cmd->add_option("graph", compile_opts.graph_path, "graph JSON file")->required();
  compile_cmd->add_option("-o,--out", compile_opts.out, "output file (default stdout)");
  add_common(compile_cmd, false);

  CompileOpts features_opts;
  CLI::App* features_cmd = app.add_subcommand("features", "per-kernel feature rows");
  features_cmd->add_option("graph", features_opts.graph_path, "graph JSON file")->required();
  features_cmd->add_option("-o,--out", features_opts.out, "output file (default stdout)");
  add_common(features_cmd, false);

  SampleOpts sample_opts;
  CLI::App* sample_cmd =
      app.add_subcommand("sample-nas", "sample architectures and write their graphs");
  sample_cmd->add_option("--count", sample_opts.count, "number of architectures")->required();
  sample_cmd->add_option("-o,--out", sample_opts.out_dir, "output directory")->required();
  add_common(sample_cmd, false);

  GenDataOpts gen_opts;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-data", "price graphs with a synthetic oracle");
  gen_cmd->add_option("--graphs", gen_opts.graphs_dir, "directory of graph files")->required();
  gen_cmd->add_option("--scenario", gen_opts.scenario,
                      "measurement scenario, e.g. sd855:cpu:1L:f32")->required();
  gen_cmd->add_option("--oracle", gen_opts.oracle, "linear, piecewise or smooth");
  gen_cmd->add_option("--sigma", gen_opts.sigma, "log-normal noise sigma");
  gen_cmd->add_option("--overhead", gen_opts.overhead, "per-run overhead in ms");
  gen_cmd->add_option("-o,--out", gen_opts.out, "measurements file (default stdout)");
  add_common(gen_cmd, false);

  TrainOpts train_opts;
  CLI::App* train_cmd = app.add_subcommand("train", "fit per-kernel-kind predictors");
  train_cmd->add_option("--measurements", train_opts.measurements, "measurements JSON file")
      ->required();
  train_cmd->add_option("--graphs", train_opts.graphs_dir, "directory of graph files")
      ->required();
  train_cmd->add_option("--scenario", train_opts.scenario,
                        "cross-check against the file's scenario");
  train_cmd->add_option("-o,--out", train_opts.out, "bundle output file")->required();
  add_common(train_cmd, true);

  PredictOpts predict_opts;
  CLI::App* predict_cmd = app.add_subcommand("predict", "end-to-end latency of one graph");
  predict_cmd->add_option("graph", predict_opts.graph_path, "graph JSON file")->required();
  predict_cmd->add_option("bundle", predict_opts.bundle_path, "trained bundle file")->required();
  predict_cmd->add_option("--scenario", predict_opts.scenario, "scenario key")->required();
  predict_cmd->add_option("-o,--out", predict_opts.out, "output file (default stdout)");
  add_common(predict_cmd, false);

  EvalOpts eval_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a bundle against measurements");
  eval_cmd->add_option("--bundle", eval_opts.bundle_path, "trained bundle file")->required();
  eval_cmd->add_option("--measurements", eval_opts.measurements, "measurements JSON file")
      ->required();
  eval_cmd->add_option("--graphs", eval_opts.graphs_dir, "directory of graph files")->required();
  eval_cmd->add_option("-o,--out", eval_opts.out, "output file (default stdout)");
  add_common(eval_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    const Config config = load_config(config_path);
    const Resolved resolved = resolve(config, seed_flag, algo_flag, gpu_flag, no_fusion);

    if (compile_cmd->parsed()) {
      log_config("compile", config, resolved);
      return cmd_compile(compile_opts, resolved);
    }
    if (features_cmd->parsed()) {
      log_config("features", config, resolved);
      return cmd_features(features_opts, resolved);
    }
    if (sample_cmd->parsed()) {
      log_config("sample-nas", config, resolved);
      return cmd_sample_nas(sample_opts, resolved);
    }
    if (gen_cmd->parsed()) {
      log_config("gen-data", config, resolved);
      return cmd_gen_data(gen_opts, resolved);
    }
    if (train_cmd->parsed()) {
      log_config("train", config, resolved);
      return cmd_train(train_opts, resolved);
    }
    if (predict_cmd->parsed()) {
      log_config("predict", config, resolved);
      return cmd_predict(predict_opts, resolved);
    }
    if (eval_cmd->parsed()) {
      log_config("eval", config, resolved);
      return cmd_eval(eval_opts, resolved);
    }
    std::cerr << "error: no subcommand\n";
    return kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
