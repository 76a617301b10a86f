#include "latpred/gpu_compile.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace latpred {
namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

struct KernelKindInfo {
  KernelKind kind;
  const char* name;
};

constexpr KernelKindInfo kKernelKinds[] = {
    {KernelKind::kConv2D, "conv2d"},
    {KernelKind::kWinograd, "winograd"},
    {KernelKind::kGroupedConv2D, "grouped_conv2d"},
    {KernelKind::kDepthwiseConv2D, "depthwise_conv2d"},
    {KernelKind::kFullyConnected, "fully_connected"},
    {KernelKind::kMean, "mean"},
    {KernelKind::kConcat, "concat"},
    {KernelKind::kSplit, "split"},
    {KernelKind::kPooling, "pooling"},
    {KernelKind::kPadding, "padding"},
    {KernelKind::kElementwise, "elementwise"},
};

bool kind_is_linkable(OpKind kind) {
  return kind == OpKind::kActivation || kind == OpKind::kCopy || kind == OpKind::kElementwise;
}

}  // namespace

const char* gpu_vendor_class_name(GpuVendorClass vendor_class) {
  switch (vendor_class) {
    case GpuVendorClass::kAdreno6xx: return "adreno6xx";
    case GpuVendorClass::kAdrenoOther: return "adreno-other";
    case GpuVendorClass::kAmd: return "amd";
    case GpuVendorClass::kOther: return "other";
  }
  return "other";
}

std::optional<GpuInfo> parse_gpu(std::string_view name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) {
    if (c == ' ' || c == '-' || c == '_') continue;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s.empty()) return std::nullopt;

  if (s == "adreno6xx") return GpuInfo{GpuVendorClass::kAdreno6xx};
  if (s == "adrenoother" || s == "adreno") return GpuInfo{GpuVendorClass::kAdrenoOther};
  if (s == "amd" || s.rfind("radeon", 0) == 0) return GpuInfo{GpuVendorClass::kAmd};
  if (s == "other") return GpuInfo{GpuVendorClass::kOther};

  if (s.rfind("adreno", 0) == 0) {
    const std::string rest = s.substr(6);
    if (!rest.empty() && std::all_of(rest.begin(), rest.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        })) {
      const int model = std::stoi(rest);
      return GpuInfo{model >= 600 && model <= 699 ? GpuVendorClass::kAdreno6xx
                                                  : GpuVendorClass::kAdrenoOther};
    }
    return std::nullopt;
  }
  if (s.rfind("mali", 0) == 0 || s.rfind("powervr", 0) == 0) {
    return GpuInfo{GpuVendorClass::kOther};
  }
  return std::nullopt;
}

const char* kernel_kind_name(KernelKind kind) {
  for (const auto& info : kKernelKinds) {
    if (info.kind == kind) return info.name;
  }
  return "unknown";
}

std::optional<KernelKind> kernel_kind_from_name(std::string_view name) {
  for (const auto& info : kKernelKinds) {
    if (name == info.name) return info.kind;
  }
  return std::nullopt;
}

std::vector<KernelKind> all_kernel_kinds() {
  std::vector<KernelKind> out;
  for (const auto& info : kKernelKinds) out.push_back(info.kind);
  return out;
}

bool is_linkable(const OperationNode& node) {
  return node.dst_tensors.size() == 1 && kind_is_linkable(node.kind);
}

namespace {

bool unit_is_linkable(const FusedNode& unit) {
  return unit.node.dst_tensors.size() == 1 && kind_is_linkable(unit.effective_kind);
}

// The fusion walk itself. Operates on fused units so that a second
// application sees exactly what the first one produced.
FusedGraph run_merge_pass(std::vector<FusedNode> units) {
  // Tensors that are available before any node runs: everything no unit
  // produces (graph inputs, plus tensors orphaned by earlier fusion).
  std::unordered_set<std::string_view> produced;
  for (const auto& u : units) {
    for (const auto& t : u.node.dst_tensors) produced.insert(t);
  }
  std::unordered_set<std::string_view> ready;
  for (const auto& u : units) {
    for (const auto& t : u.node.src_tensors) {
      if (!produced.count(t)) ready.insert(t);
    }
  }

  std::size_t i = 0;
  while (i < units.size()) {
    FusedNode& cur = units[i];
    for (const auto& t : cur.node.dst_tensors) ready.insert(t);

    if (cur.node.dst_tensors.size() != 1) {
      ++i;
      continue;
    }
    const std::string& t = cur.node.dst_tensors[0];

    // Count consuming references; a node reading the tensor twice counts
    // twice. Remember the last match, as the reference walk does.
    int references = 0;
    std::size_t consumer = 0;
    std::size_t consumer_index = 0;
    for (std::size_t j = 0; j < units.size(); ++j) {
      const auto& srcs = units[j].node.src_tensors;
      for (std::size_t k = 0; k < srcs.size(); ++k) {
        if (srcs[k] == t) {
          ++references;
          consumer = j;
          consumer_index = k;
        }
      }
    }

    if (references != 1 || consumer_index != 0) {
      ++i;
      continue;
    }
    FusedNode& next = units[consumer];
    if (!unit_is_linkable(next) || !ready.count(next.node.src_tensors[0])) {
      ++i;
      continue;
    }

    // Merge cur into next: next inherits cur's inputs in place of the fused
    // tensor, cur's members ahead of its own, and cur's effective kind.
    std::vector<std::string> srcs = cur.node.src_tensors;
    srcs.insert(srcs.end(), next.node.src_tensors.begin() + 1, next.node.src_tensors.end());
    next.node.src_tensors = std::move(srcs);

    std::vector<std::string> members = std::move(cur.members);
    members.insert(members.end(), next.members.begin(), next.members.end());
    next.members = std::move(members);
    next.effective_kind = cur.effective_kind;

    units.erase(units.begin() + static_cast<std::ptrdiff_t>(i));
    // Do not advance: the element after the removed one now sits at i.
  }
  return FusedGraph{std::move(units)};
}

}  // namespace

FusedGraph merge_nodes(const ComputationalGraph& graph) {
  std::vector<FusedNode> units;
  units.reserve(graph.nodes.size());
  for (const auto& n : graph.nodes) {
    units.push_back(FusedNode{n, {n.id}, n.kind});
  }
  return run_merge_pass(std::move(units));
}

FusedGraph merge_nodes(const FusedGraph& graph) {
  return run_merge_pass(graph.nodes);
}

bool check_grouped_conv2d(const GpuInfo& /*gpu*/, const ConvAttrs& attrs,
                          const TensorShape& input) {
  const int src_group_size = input.c;
  const int dst_group_size = attrs.filters / attrs.groups;
  return attrs.groups != 1 && src_group_size % 4 == 0 && dst_group_size % 4 == 0;
}

bool check_winograd(const GpuInfo& gpu, const ConvAttrs& attrs, const TensorShape& input,
                    const TensorShape& output) {
  if (attrs.groups != 1 || attrs.kernel_h != 3 || attrs.kernel_w != 3 || attrs.stride != 1) {
    return false;
  }
  const int src_depth = ceil_div(input.c, 4);
  const int dst_depth = ceil_div(attrs.filters, 4);
  int min_tiles = 0;
  switch (gpu.vendor_class) {
    case GpuVendorClass::kAdreno6xx:
      if (src_depth < 32 || dst_depth < 32) return false;
      min_tiles = 128;
      break;
    case GpuVendorClass::kAdrenoOther:
      if (src_depth < 32 || dst_depth < 32) return false;
      min_tiles = 64;
      break;
    case GpuVendorClass::kAmd:
      if (src_depth < 16 || dst_depth < 8) return false;
      min_tiles = 32;
      break;
    case GpuVendorClass::kOther:
      if (src_depth < 16 || dst_depth < 16) return false;
      min_tiles = 32;
      break;
  }
  const int total_tiles = ceil_div(output.h, 4) * ceil_div(output.w, 4);
  return total_tiles >= min_tiles;
}

KernelKind select_conv2d_kernel(const GpuInfo& gpu, const ConvAttrs& attrs,
                                const TensorShape& input, const TensorShape& output) {
  if (check_grouped_conv2d(gpu, attrs, input)) return KernelKind::kGroupedConv2D;
  if (check_winograd(gpu, attrs, input, output)) return KernelKind::kWinograd;
  return KernelKind::kConv2D;
}

namespace {

KernelKind natural_kernel_kind(OpKind kind) {
  switch (kind) {
    case OpKind::kConv2D: return KernelKind::kConv2D;
    case OpKind::kDepthwiseConv2D: return KernelKind::kDepthwiseConv2D;
    case OpKind::kFullyConnected: return KernelKind::kFullyConnected;
    case OpKind::kMean: return KernelKind::kMean;
    case OpKind::kConcat: return KernelKind::kConcat;
    case OpKind::kSplit: return KernelKind::kSplit;
    case OpKind::kPooling: return KernelKind::kPooling;
    case OpKind::kPadding: return KernelKind::kPadding;
    case OpKind::kElementwise:
    case OpKind::kActivation:
    case OpKind::kCopy:
      return KernelKind::kElementwise;
  }
  return KernelKind::kElementwise;
}

TensorShape shape_or_throw(const ComputationalGraph& g, const OperationNode& n,
                           const std::string& tensor) {
  auto s = g.shape(tensor);
  if (!s || !s->defined()) {
    throw Error("compile: node '" + n.id + "' has tensor '" + tensor +
                "' without an inferred shape");
  }
  return *s;
}

}  // namespace

KernelSequence compile(const ComputationalGraph& graph, const GpuInfo& gpu, bool fusion) {
  FusedGraph fused;
  if (fusion) {
    fused = merge_nodes(graph);
  } else {
    for (const auto& n : graph.nodes) fused.nodes.push_back(FusedNode{n, {n.id}, n.kind});
  }

  KernelSequence seq;
  seq.kernels.reserve(fused.nodes.size());
  for (const auto& unit : fused.nodes) {
    const OperationNode& base = graph.node(unit.members.front());
    Kernel k;
    k.base_node = base.id;
    if (base.kind == OpKind::kConv2D) {
      k.kind = select_conv2d_kernel(gpu, base.conv(), shape_or_throw(graph, base, base.src_tensors[0]),
                                    shape_or_throw(graph, base, base.dst_tensors[0]));
    } else {
      k.kind = natural_kernel_kind(base.kind);
    }
    k.linked_nodes.assign(unit.members.begin() + 1, unit.members.end());
    seq.kernels.push_back(std::move(k));
  }
  return seq;
}

KernelSequence compile_cpu(const ComputationalGraph& graph) {
  KernelSequence seq;
  seq.kernels.reserve(graph.nodes.size());
  for (const auto& n : graph.nodes) {
    seq.kernels.push_back(Kernel{n.id, natural_kernel_kind(n.kind), {}});
  }
  return seq;
}

}  // namespace latpred
