#pragma once

#include <string>
#include <variant>
#include <vector>

#include "latpred/features.hpp"
#include "latpred/measurements.hpp"
#include "latpred/predictors.hpp"

// Trained-predictor container: per (scenario, kernel kind) one standardizer
// and one model, plus a per-scenario overhead constant. Serialized as a
// versioned JSON bundle with explicit tree node arrays.

namespace latpred {

enum class ModelKind { kLasso, kRf, kGbdt };

const char* model_kind_name(ModelKind kind);

using AnyModel = std::variant<LassoModel, RandomForestModel, GbdtModel>;

double predict_any(const AnyModel& model, std::span<const double> row);
ModelKind model_kind_of(const AnyModel& model);

struct PredictorEntry {
  KernelKind kind = KernelKind::kConv2D;
  Standardizer standardizer;
  AnyModel model;
};

struct ScenarioPredictors {
  ScenarioKey scenario;
  double overhead_ms = 0.0;
  std::vector<PredictorEntry> entries;  // sorted by kind

  const PredictorEntry* find(KernelKind kind) const;
};

struct PredictorBundle {
  static constexpr int kFormatVersion = 1;
  std::vector<ScenarioPredictors> scenarios;

  const ScenarioPredictors* find(const ScenarioKey& key) const;
  ScenarioPredictors& find_or_add(const ScenarioKey& key);
};

// Throws Error on unknown versions, unknown kinds, or entries whose model or
// standardizer width disagrees with the kind's feature schema.
PredictorBundle parse_bundle(const std::string& json_text);
PredictorBundle parse_bundle_file(const std::string& path);
std::string serialize_bundle(const PredictorBundle& bundle);
void write_bundle_file(const PredictorBundle& bundle, const std::string& path);

}  // namespace latpred
