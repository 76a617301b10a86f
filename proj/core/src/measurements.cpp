#include <fstream>
#include <sstream>

#include "latpred/measurements.hpp"
#include "nlohmann/json.hpp"

namespace latpred {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error(message); }

}  // namespace

ScenarioKey parse_scenario(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  if (parts.size() != 4) {
    fail("scenario '" + text + "': expected device:accelerator:core_combo:dtype");
  }

  ScenarioKey key;
  key.device = parts[0];
  if (key.device.empty()) fail("scenario '" + text + "': empty device");

  if (parts[1] == "cpu") key.accelerator = Accelerator::kCpu;
  else if (parts[1] == "gpu") key.accelerator = Accelerator::kGpu;
  else fail("scenario '" + text + "': accelerator must be cpu or gpu");

  key.core_combo = parts[2];

  if (parts[3] == "f32") key.dtype = Dtype::kF32;
  else if (parts[3] == "i8") key.dtype = Dtype::kI8;
  else fail("scenario '" + text + "': dtype must be f32 or i8");

  if (key.accelerator == Accelerator::kGpu) {
    if (!key.core_combo.empty()) fail("scenario '" + text + "': gpu scenarios take no core combo");
    if (key.dtype != Dtype::kF32) fail("scenario '" + text + "': gpu scenarios are f32 only");
  } else if (key.core_combo.empty()) {
    fail("scenario '" + text + "': cpu scenarios need a core combo (e.g. 1L)");
  }
  return key;
}

std::string scenario_to_string(const ScenarioKey& key) {
  std::string out = key.device;
  out += key.accelerator == Accelerator::kCpu ? ":cpu:" : ":gpu:";
  out += key.core_combo;
  out += key.dtype == Dtype::kF32 ? ":f32" : ":i8";
  return out;
}

MeasurementSet parse_measurements(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("malformed measurement document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("scenario") || !doc.contains("architectures")) {
    fail("measurement document needs 'scenario' and 'architectures'");
  }

  MeasurementSet set;
  if (!doc.at("scenario").is_string()) fail("measurements: 'scenario' must be a string");
  set.scenario = parse_scenario(doc.at("scenario").get<std::string>());

  const json& archs = doc.at("architectures");
  if (!archs.is_array()) fail("measurements: 'architectures' must be an array");
  for (const auto& ja : archs) {
    if (!ja.is_object() || !ja.contains("graph_ref") || !ja.contains("end_to_end_ms")) {
      fail("measurements: each architecture needs 'graph_ref' and 'end_to_end_ms'");
    }
    ArchitectureMeasurement arch;
    arch.graph_ref = ja.at("graph_ref").get<std::string>();
    if (!ja.at("end_to_end_ms").is_number()) fail("measurements: 'end_to_end_ms' must be a number");
    arch.end_to_end_ms = ja.at("end_to_end_ms").get<double>();
    if (ja.contains("kernels")) {
      const json& kernels = ja.at("kernels");
      if (!kernels.is_array()) fail("measurements: 'kernels' must be an array");
      for (const auto& jk : kernels) {
        if (!jk.is_object() || !jk.contains("id") || !jk.contains("ms")) {
          fail("measurements: each kernel needs 'id' and 'ms'");
        }
        arch.kernels.push_back(
            KernelMeasurement{jk.at("id").get<std::string>(), jk.at("ms").get<double>()});
      }
    }
    set.architectures.push_back(std::move(arch));
  }
  return set;
}

MeasurementSet parse_measurements_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open measurement file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_measurements(buffer.str());
}

std::string serialize_measurements(const MeasurementSet& set) {
  json doc;
  doc["scenario"] = scenario_to_string(set.scenario);
  json archs = json::array();
  for (const auto& arch : set.architectures) {
    json ja;
    ja["graph_ref"] = arch.graph_ref;
    ja["end_to_end_ms"] = arch.end_to_end_ms;
    json kernels = json::array();
    for (const auto& k : arch.kernels) {
      kernels.push_back(json{{"id", k.id}, {"ms", k.ms}});
    }
    ja["kernels"] = std::move(kernels);
    archs.push_back(std::move(ja));
  }
  doc["architectures"] = std::move(archs);
  return doc.dump(2) + "\n";
}

void write_measurements_file(const MeasurementSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write measurement file '" + path + "'");
  out << serialize_measurements(set);
}

}  // namespace latpred
