#include <algorithm>
#include <fstream>
#include <sstream>

#include "latpred/bundle.hpp"
#include "nlohmann/json.hpp"

namespace latpred {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error(message); }

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  }
  return nodes;
}

RegressionTree tree_from_json(const json& j) {
  if (!j.is_array()) fail("bundle: tree must be a node array");
  RegressionTree tree;
  for (const auto& jn : j) {
    if (!jn.is_array() || jn.size() != 5) {
      fail("bundle: tree node must be [feature, threshold, left, right, value]");
    }
    TreeNode n;
    n.feature = jn[0].get<int>();
    n.threshold = jn[1].get<double>();
    n.left = jn[2].get<int>();
    n.right = jn[3].get<int>();
    n.value = jn[4].get<double>();
    tree.nodes.push_back(n);
  }
  if (tree.nodes.empty()) fail("bundle: empty tree");
  const int count = static_cast<int>(tree.nodes.size());
  for (const auto& n : tree.nodes) {
    const bool leaf = n.feature < 0;
    if (!leaf && (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count)) {
      fail("bundle: tree child index out of range");
    }
  }
  return tree;
}

json standardizer_to_json(const Standardizer& s) {
  return json{{"mean", s.mean}, {"stdev", s.stdev}};
}

Standardizer standardizer_from_json(const json& j) {
  if (!j.is_object() || !j.contains("mean") || !j.contains("stdev")) {
    fail("bundle: standardizer needs 'mean' and 'stdev'");
  }
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stdev = j.at("stdev").get<std::vector<double>>();
  if (s.mean.size() != s.stdev.size()) fail("bundle: standardizer width mismatch");
  return s;
}

json model_to_json(const AnyModel& model) {
  json j;
  if (const auto* lasso = std::get_if<LassoModel>(&model)) {
    j["weights"] = lasso->weights;
    j["intercept"] = lasso->intercept;
    j["alpha"] = lasso->alpha;
  } else if (const auto* rf = std::get_if<RandomForestModel>(&model)) {
    j["n_trees"] = rf->n_trees;
    j["min_samples_split"] = rf->min_samples_split;
    j["rng_seed"] = rf->rng_seed;
    j["n_features"] = rf->n_features;
    json trees = json::array();
    for (const auto& t : rf->trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
  } else {
    const auto& gbdt = std::get<GbdtModel>(model);
    j["n_stages"] = gbdt.n_stages;
    j["min_samples_split"] = gbdt.min_samples_split;
    j["learning_rate"] = gbdt.learning_rate;
    j["base_value"] = gbdt.base_value;
    j["n_features"] = gbdt.n_features;
    json stages = json::array();
    for (const auto& t : gbdt.stages) stages.push_back(tree_to_json(t));
    j["stages"] = std::move(stages);
  }
  return j;
}

AnyModel model_from_json(ModelKind kind, KernelKind schema, const json& j) {
  if (!j.is_object()) fail("bundle: model payload must be an object");
  switch (kind) {
    case ModelKind::kLasso: {
      LassoModel m;
      m.weights = j.at("weights").get<std::vector<double>>();
      m.intercept = j.at("intercept").get<double>();
      m.alpha = j.at("alpha").get<double>();
      m.schema = schema;
      for (double w : m.weights) {
        if (w < 0.0) fail("bundle: negative lasso weight");
      }
      return m;
    }
    case ModelKind::kRf: {
      RandomForestModel m;
      m.n_trees = j.at("n_trees").get<int>();
      m.min_samples_split = j.at("min_samples_split").get<int>();
      m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
      m.n_features = j.at("n_features").get<int>();
      m.schema = schema;
      for (const auto& jt : j.at("trees")) m.trees.push_back(tree_from_json(jt));
      if (static_cast<int>(m.trees.size()) != m.n_trees) fail("bundle: tree count mismatch");
      return m;
    }
    case ModelKind::kGbdt: {
      GbdtModel m;
      m.n_stages = j.at("n_stages").get<int>();
      m.min_samples_split = j.at("min_samples_split").get<int>();
      m.learning_rate = j.at("learning_rate").get<double>();
      m.base_value = j.at("base_value").get<double>();
      m.n_features = j.at("n_features").get<int>();
      m.schema = schema;
      for (const auto& jt : j.at("stages")) m.stages.push_back(tree_from_json(jt));
      if (static_cast<int>(m.stages.size()) != m.n_stages) fail("bundle: stage count mismatch");
      return m;
    }
  }
  fail("bundle: unhandled model kind");
}

std::size_t model_width(const AnyModel& model) {
  if (const auto* lasso = std::get_if<LassoModel>(&model)) return lasso->weights.size();
  if (const auto* rf = std::get_if<RandomForestModel>(&model)) {
    return static_cast<std::size_t>(rf->n_features);
  }
  return static_cast<std::size_t>(std::get<GbdtModel>(model).n_features);
}

void check_entry(const PredictorEntry& entry) {
  const std::size_t want = schema_size(entry.kind);
  if (entry.standardizer.mean.size() != want) {
    fail(std::string("bundle: standardizer width does not match schema for ") +
         kernel_kind_name(entry.kind));
  }
  if (model_width(entry.model) != want) {
    fail(std::string("bundle: model width does not match schema for ") +
         kernel_kind_name(entry.kind));
  }
}

}  // namespace

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLasso: return "lasso";
    case ModelKind::kRf: return "rf";
    case ModelKind::kGbdt: return "gbdt";
  }
  return "lasso";
}

double predict_any(const AnyModel& model, std::span<const double> row) {
  return std::visit([row](const auto& m) { return predict(m, row); }, model);
}

ModelKind model_kind_of(const AnyModel& model) {
  if (std::holds_alternative<LassoModel>(model)) return ModelKind::kLasso;
  if (std::holds_alternative<RandomForestModel>(model)) return ModelKind::kRf;
  return ModelKind::kGbdt;
}

const PredictorEntry* ScenarioPredictors::find(KernelKind kind) const {
  for (const auto& e : entries) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

const ScenarioPredictors* PredictorBundle::find(const ScenarioKey& key) const {
  for (const auto& s : scenarios) {
    if (s.scenario == key) return &s;
  }
  return nullptr;
}

ScenarioPredictors& PredictorBundle::find_or_add(const ScenarioKey& key) {
  for (auto& s : scenarios) {
    if (s.scenario == key) return s;
  }
  scenarios.push_back(ScenarioPredictors{key, 0.0, {}});
  return scenarios.back();
}

PredictorBundle parse_bundle(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("malformed bundle document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") || !doc.contains("scenarios")) {
    fail("bundle needs 'format_version' and 'scenarios'");
  }
  if (doc.at("format_version").get<int>() != PredictorBundle::kFormatVersion) {
    fail("bundle: unsupported format_version");
  }

  PredictorBundle bundle;
  for (const auto& js : doc.at("scenarios")) {
    ScenarioPredictors sp;
    sp.scenario = parse_scenario(js.at("scenario").get<std::string>());
    sp.overhead_ms = js.at("overhead_ms").get<double>();
    for (const auto& je : js.at("entries")) {
      PredictorEntry entry;
      const std::string kind_name = je.at("kind").get<std::string>();
      const auto kind = kernel_kind_from_name(kind_name);
      if (!kind) fail("bundle: unknown kernel kind '" + kind_name + "'");
      entry.kind = *kind;
      entry.standardizer = standardizer_from_json(je.at("standardizer"));

      const std::string mk = je.at("model_kind").get<std::string>();
      ModelKind model_kind;
      if (mk == "lasso") model_kind = ModelKind::kLasso;
      else if (mk == "rf") model_kind = ModelKind::kRf;
      else if (mk == "gbdt") model_kind = ModelKind::kGbdt;
      else fail("bundle: unknown model kind '" + mk + "'");

      entry.model = model_from_json(model_kind, entry.kind, je.at("model"));
      check_entry(entry);
      sp.entries.push_back(std::move(entry));
    }
    bundle.scenarios.push_back(std::move(sp));
  }
  return bundle;
}

PredictorBundle parse_bundle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open bundle file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_bundle(buffer.str());
}

std::string serialize_bundle(const PredictorBundle& bundle) {
  json doc;
  doc["format_version"] = PredictorBundle::kFormatVersion;
  json scenarios = json::array();
  for (const auto& sp : bundle.scenarios) {
    json js;
    js["scenario"] = scenario_to_string(sp.scenario);
    js["overhead_ms"] = sp.overhead_ms;
    json entries = json::array();
    for (const auto& e : sp.entries) {
      check_entry(e);
      json je;
      je["kind"] = kernel_kind_name(e.kind);
      je["standardizer"] = standardizer_to_json(e.standardizer);
      je["model_kind"] = model_kind_name(model_kind_of(e.model));
      je["model"] = model_to_json(e.model);
      entries.push_back(std::move(je));
    }
    js["entries"] = std::move(entries);
    scenarios.push_back(std::move(js));
  }
  doc["scenarios"] = std::move(scenarios);
  return doc.dump(2) + "\n";
}

void write_bundle_file(const PredictorBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write bundle file '" + path + "'");
  out << serialize_bundle(bundle);
}

}  // namespace latpred
