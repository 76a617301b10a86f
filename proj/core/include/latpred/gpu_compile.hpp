#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latpred/graph.hpp"

// Simulation of the mobile-GPU delegate's compilation steps: the single-pass
// elementwise fusion over a topologically ordered node list, and the
// per-convolution kernel selection (grouped / Winograd / direct). Deducing the
// kernel sequence this way is what lets per-kernel cost models add up to an
// end-to-end latency.

namespace latpred {

enum class GpuVendorClass { kAdreno6xx, kAdrenoOther, kAmd, kOther };

struct GpuInfo {
  GpuVendorClass vendor_class = GpuVendorClass::kOther;
  friend bool operator==(const GpuInfo&, const GpuInfo&) = default;
};

const char* gpu_vendor_class_name(GpuVendorClass vendor_class);

// Accepts class names ("adreno6xx", "adreno-other", "amd", "other") and
// device-style names ("adreno640", "mali-g76", "powervr-ge8320"). Adreno
// model numbers in [600, 699] map to kAdreno6xx, other Adreno models to
// kAdrenoOther; Mali and PowerVR map to kOther. Unrecognized strings yield
// nullopt rather than a default, so callers can reject typos.
std::optional<GpuInfo> parse_gpu(std::string_view name);

// Executed kernel classes. Every graph operation lowers to exactly one of
// these; convolutions may lower to kWinograd or kGroupedConv2D depending on
// shape and vendor. Unfused activation and copy operations run as elementwise
// kernels.
enum class KernelKind {
  kConv2D,
  kWinograd,
  kGroupedConv2D,
  kDepthwiseConv2D,
  kFullyConnected,
  kMean,
  kConcat,
  kSplit,
  kPooling,
  kPadding,
  kElementwise,
};

const char* kernel_kind_name(KernelKind kind);
std::optional<KernelKind> kernel_kind_from_name(std::string_view name);

// All feature schemas, in serialization order.
std::vector<KernelKind> all_kernel_kinds();

// A node can absorb downstream work only if it produces a single tensor and
// is an activation, copy, or elementwise operation.
bool is_linkable(const OperationNode& node);

// One scheduled unit after fusion. `node` is the surviving operation with its
// source list rewired to the absorbed producers' inputs; `members` lists the
// original node ids in execution order (the survivor last). The first member
// dominates: it determines the unit's kind for any further fusion decisions
// and, later, the kernel's class and features.
struct FusedNode {
  OperationNode node;
  std::vector<std::string> members;
  OpKind effective_kind = OpKind::kCopy;
  friend bool operator==(const FusedNode&, const FusedNode&) = default;
};

struct FusedGraph {
  std::vector<FusedNode> nodes;
  friend bool operator==(const FusedGraph&, const FusedGraph&) = default;
};

// Single forward pass over the node list. A node is merged into its consumer
// when (1) it produces exactly one tensor, (2) that tensor has exactly one
// consuming reference (a node using it twice counts twice), (3) the consumer
// reads it at source index 0, and (4) that source is already computed at this
// point of the walk. Merging rewires the consumer's inputs and hands it the
// producer's effective kind, which is what makes a second application of the
// pass a no-op.
FusedGraph merge_nodes(const ComputationalGraph& graph);
FusedGraph merge_nodes(const FusedGraph& graph);

// Grouped-kernel eligibility. The destination side is measured per group; the
// source side deliberately uses the whole input-channel count, mirroring the
// delegate's behavior.
bool check_grouped_conv2d(const GpuInfo& gpu, const ConvAttrs& attrs, const TensorShape& input);

// Winograd (4x4 tile, 3x3 filter) eligibility: ungrouped 3x3 stride-1
// convolutions only, with vendor-specific minimum channel depths and a
// minimum number of output tiles.
bool check_winograd(const GpuInfo& gpu, const ConvAttrs& attrs, const TensorShape& input,
                    const TensorShape& output);

// Grouped takes precedence over Winograd, which takes precedence over the
// direct kernel.
KernelKind select_conv2d_kernel(const GpuInfo& gpu, const ConvAttrs& attrs,
                                const TensorShape& input, const TensorShape& output);

struct Kernel {
  std::string base_node;                 // dominant member; features come from it
  KernelKind kind = KernelKind::kConv2D;
  std::vector<std::string> linked_nodes;  // absorbed elementwise tail, execution order
  friend bool operator==(const Kernel&, const Kernel&) = default;
};

struct KernelSequence {
  std::vector<Kernel> kernels;  // topological order
  friend bool operator==(const KernelSequence&, const KernelSequence&) = default;
};

// Lowers a shape-inferred graph to the kernels the GPU delegate would run.
// With fusion disabled every node becomes its own kernel (kernel selection
// still applies). Throws Error if shapes are missing.
KernelSequence compile(const ComputationalGraph& graph, const GpuInfo& gpu, bool fusion = true);

// CPU backends run one kernel per node: no fusion pass, no convolution
// specialization.
KernelSequence compile_cpu(const ComputationalGraph& graph);

}  // namespace latpred
