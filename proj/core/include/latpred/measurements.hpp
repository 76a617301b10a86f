#pragma once

#include <string>
#include <vector>

#include "latpred/graph.hpp"

// Measurement-set container and file format. Synthetic oracle data and real
// device profiles share this shape, so the training pipeline does not care
// where numbers came from.

namespace latpred {

enum class Accelerator { kCpu, kGpu };
enum class Dtype { kF32, kI8 };

struct ScenarioKey {
  std::string device;
  Accelerator accelerator = Accelerator::kCpu;
  std::string core_combo;  // e.g. "1L", "1L+4S"; empty for gpu
  Dtype dtype = Dtype::kF32;

  friend bool operator==(const ScenarioKey&, const ScenarioKey&) = default;
  friend auto operator<=>(const ScenarioKey&, const ScenarioKey&) = default;
};

// "device:accelerator:core_combo:dtype", e.g. "sd855:cpu:1L:f32" or
// "sd855:gpu::f32". GPU scenarios must have an empty core combo and f32
// (integer quantization is a CPU-only study); CPU scenarios name their core
// combo. Throws Error on violations.
ScenarioKey parse_scenario(const std::string& text);
std::string scenario_to_string(const ScenarioKey& key);

struct KernelMeasurement {
  std::string id;  // base node id of the kernel
  double ms = 0.0;
  friend bool operator==(const KernelMeasurement&, const KernelMeasurement&) = default;
};

struct ArchitectureMeasurement {
  std::string graph_ref;  // file name or other stable reference
  double end_to_end_ms = 0.0;
  std::vector<KernelMeasurement> kernels;
  friend bool operator==(const ArchitectureMeasurement&, const ArchitectureMeasurement&) = default;
};

struct MeasurementSet {
  ScenarioKey scenario;
  std::vector<ArchitectureMeasurement> architectures;
  friend bool operator==(const MeasurementSet&, const MeasurementSet&) = default;
};

MeasurementSet parse_measurements(const std::string& json_text);
MeasurementSet parse_measurements_file(const std::string& path);
std::string serialize_measurements(const MeasurementSet& set);
void write_measurements_file(const MeasurementSet& set, const std::string& path);

}  // namespace latpred
