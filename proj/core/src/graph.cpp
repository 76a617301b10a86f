#include "latpred/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace latpred {
namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

template <typename T>
const T& attrs_as(const OperationNode& node, const char* what) {
  const T* value = std::get_if<T>(&node.attrs);
  if (value == nullptr) {
    throw Error("node '" + node.id + "': expected " + what + " attributes");
  }
  return *value;
}

struct KindInfo {
  OpKind kind;
  const char* name;
};

constexpr KindInfo kKinds[] = {
    {OpKind::kConv2D, "conv2d"},
    {OpKind::kDepthwiseConv2D, "depthwise_conv2d"},
    {OpKind::kFullyConnected, "fully_connected"},
    {OpKind::kMean, "mean"},
    {OpKind::kConcat, "concat"},
    {OpKind::kSplit, "split"},
    {OpKind::kPooling, "pooling"},
    {OpKind::kPadding, "padding"},
    {OpKind::kElementwise, "elementwise"},
    {OpKind::kActivation, "activation"},
    {OpKind::kCopy, "copy"},
};

struct EwInfo {
  EwOp op;
  const char* name;
  bool binary;
};

constexpr EwInfo kEwOps[] = {
    {EwOp::kAdd, "add", true},
    {EwOp::kSub, "sub", true},
    {EwOp::kMul, "mul", true},
    {EwOp::kDiv, "div", true},
    {EwOp::kExp, "exp", false},
    {EwOp::kLog, "log", false},
    {EwOp::kSqrt, "sqrt", false},
    {EwOp::kSquare, "square", false},
    {EwOp::kAbs, "abs", false},
    {EwOp::kNeg, "neg", false},
    {EwOp::kPow, "pow", true},
    {EwOp::kEqual, "equal", true},
    {EwOp::kGreater, "greater", true},
    {EwOp::kLess, "less", true},
    {EwOp::kMaximum, "maximum", true},
    {EwOp::kMinimum, "minimum", true},
};

}  // namespace

const ConvAttrs& OperationNode::conv() const { return attrs_as<ConvAttrs>(*this, "convolution"); }
const PoolAttrs& OperationNode::pool() const { return attrs_as<PoolAttrs>(*this, "pooling"); }
const SplitAttrs& OperationNode::split() const { return attrs_as<SplitAttrs>(*this, "split"); }
const PadAttrs& OperationNode::pad() const { return attrs_as<PadAttrs>(*this, "padding"); }
const EwAttrs& OperationNode::elementwise() const { return attrs_as<EwAttrs>(*this, "elementwise"); }
const FcAttrs& OperationNode::fc() const { return attrs_as<FcAttrs>(*this, "fully-connected"); }

bool ew_is_binary(EwOp op) {
  for (const auto& info : kEwOps) {
    if (info.op == op) return info.binary;
  }
  return false;
}

const char* op_kind_name(OpKind kind) {
  for (const auto& info : kKinds) {
    if (info.kind == kind) return info.name;
  }
  return "unknown";
}

std::optional<OpKind> op_kind_from_name(std::string_view name) {
  for (const auto& info : kKinds) {
    if (name == info.name) return info.kind;
  }
  return std::nullopt;
}

const char* ew_op_name(EwOp op) {
  for (const auto& info : kEwOps) {
    if (info.op == op) return info.name;
  }
  return "unknown";
}

std::optional<EwOp> ew_op_from_name(std::string_view name) {
  for (const auto& info : kEwOps) {
    if (name == info.name) return info.op;
  }
  return std::nullopt;
}

const OperationNode& ComputationalGraph::node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return n;
  }
  throw Error("no node with id '" + std::string(id) + "'");
}

std::optional<TensorShape> ComputationalGraph::shape(const std::string& tensor) const {
  auto it = tensors.find(tensor);
  if (it == tensors.end()) return std::nullopt;
  return it->second;
}

namespace {

bool attrs_match_kind(const OperationNode& n) {
  switch (n.kind) {
    case OpKind::kConv2D:
    case OpKind::kDepthwiseConv2D:
      return std::holds_alternative<ConvAttrs>(n.attrs);
    case OpKind::kFullyConnected:
      return std::holds_alternative<FcAttrs>(n.attrs);
    case OpKind::kPooling:
      return std::holds_alternative<PoolAttrs>(n.attrs);
    case OpKind::kSplit:
      return std::holds_alternative<SplitAttrs>(n.attrs);
    case OpKind::kPadding:
      return std::holds_alternative<PadAttrs>(n.attrs);
    case OpKind::kElementwise:
      return std::holds_alternative<EwAttrs>(n.attrs);
    case OpKind::kMean:
    case OpKind::kConcat:
    case OpKind::kActivation:
    case OpKind::kCopy:
      return std::holds_alternative<std::monostate>(n.attrs);
  }
  return false;
}

// Expected source count: {min, max}.
std::pair<int, int> src_arity(const OperationNode& n) {
  switch (n.kind) {
    case OpKind::kConcat:
      return {2, 1 << 20};
    case OpKind::kElementwise:
      if (std::holds_alternative<EwAttrs>(n.attrs) && ew_is_binary(n.elementwise().op)) {
        return {2, 2};
      }
      return {1, 1};
    default:
      return {1, 1};
  }
}

}  // namespace

std::vector<Violation> validate(const ComputationalGraph& graph) {
  std::vector<Violation> out;
  auto flag = [&out](std::string subject, std::string message) {
    out.push_back(Violation{std::move(subject), std::move(message)});
  };

  std::unordered_set<std::string_view> node_ids;
  for (const auto& n : graph.nodes) {
    if (!node_ids.insert(n.id).second) flag(n.id, "duplicate node id");
  }

  // Producer map; also trips on tensors produced twice.
  std::unordered_map<std::string_view, std::size_t> producer;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    for (const auto& t : graph.nodes[i].dst_tensors) {
      auto [it, inserted] = producer.emplace(t, i);
      if (!inserted) flag(t, "tensor produced by more than one node");
    }
  }

  std::unordered_set<std::string_view> input_set(graph.inputs.begin(), graph.inputs.end());
  for (const auto& t : graph.inputs) {
    if (!graph.tensors.count(t)) flag(t, "graph input is not a declared tensor");
    if (producer.count(t)) flag(t, "graph input is produced by a node");
  }
  for (const auto& t : graph.outputs) {
    if (!graph.tensors.count(t)) flag(t, "graph output is not a declared tensor");
  }

  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& n = graph.nodes[i];
    if (!attrs_match_kind(n)) {
      flag(n.id, "attribute payload does not match operation kind");
      continue;  // arity/attr checks below would read the wrong alternative
    }

    const auto [min_src, max_src] = src_arity(n);
    const int n_src = static_cast<int>(n.src_tensors.size());
    if (n_src < min_src || n_src > max_src) {
      flag(n.id, "wrong number of source tensors for " + std::string(op_kind_name(n.kind)));
    }
    if (n.dst_tensors.empty()) flag(n.id, "node has no destination tensor");

    for (const auto& t : n.src_tensors) {
      if (!graph.tensors.count(t)) flag(n.id, "references undeclared tensor '" + t + "'");
      else if (!producer.count(t) && !input_set.count(t)) {
        flag(n.id, "reads tensor '" + t + "' which has no producer and is not a graph input");
      }
    }
    for (const auto& t : n.dst_tensors) {
      if (!graph.tensors.count(t)) flag(n.id, "writes undeclared tensor '" + t + "'");
    }

    // Stored order must already be topological.
    for (const auto& t : n.src_tensors) {
      auto it = producer.find(t);
      if (it != producer.end() && it->second >= i) {
        flag(n.id, "reads tensor '" + t + "' produced at or after its own position");
      }
    }

    switch (n.kind) {
      case OpKind::kConv2D:
      case OpKind::kDepthwiseConv2D: {
        const auto& a = n.conv();
        if (a.kernel_h < 1 || a.kernel_w < 1) flag(n.id, "kernel dimensions must be positive");
        if (a.stride < 1) flag(n.id, "stride must be positive");
        if (a.filters < 1) flag(n.id, "filters must be positive");
        if (a.groups < 1) flag(n.id, "groups must be positive");
        if (a.groups >= 1 && a.filters >= 1 && a.filters % a.groups != 0) {
          flag(n.id, "groups must divide filters");
        }
        if (n.kind == OpKind::kDepthwiseConv2D && a.groups != 1) {
          flag(n.id, "depthwise convolution does not take groups");
        }
        if (!n.src_tensors.empty()) {
          if (auto s = graph.shape(n.src_tensors[0]); s && s->defined()) {
            if (a.groups >= 1 && s->c % a.groups != 0) {
              flag(n.id, "groups must divide input channels");
            }
            if (n.kind == OpKind::kDepthwiseConv2D && a.filters != s->c) {
              flag(n.id, "depthwise filters must equal input channels");
            }
          }
        }
        break;
      }
      case OpKind::kPooling: {
        const auto& a = n.pool();
        if (a.kernel_h < 1 || a.kernel_w < 1) flag(n.id, "kernel dimensions must be positive");
        if (a.stride < 1) flag(n.id, "stride must be positive");
        break;
      }
      case OpKind::kSplit: {
        const auto& a = n.split();
        if (a.count < 2) flag(n.id, "split count must be at least 2");
        if (static_cast<int>(n.dst_tensors.size()) != a.count) {
          flag(n.id, "split must have exactly count destination tensors");
        }
        if (!n.src_tensors.empty()) {
          if (auto s = graph.shape(n.src_tensors[0]); s && s->defined() && a.count >= 2) {
            if (s->c % a.count != 0) flag(n.id, "split count must divide input channels");
          }
        }
        break;
      }
      case OpKind::kPadding: {
        const auto& a = n.pad();
        if (a.pad_h < 0 || a.pad_w < 0) flag(n.id, "padding must be non-negative");
        break;
      }
      case OpKind::kFullyConnected: {
        if (n.fc().units < 1) flag(n.id, "units must be positive");
        break;
      }
      default:
        break;
    }
  }
  return out;
}

std::vector<OperationNode> topological_order(const ComputationalGraph& graph) {
  const std::size_t n = graph.nodes.size();
  std::unordered_map<std::string_view, std::size_t> producer;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : graph.nodes[i].dst_tensors) producer.emplace(t, i);
  }

  std::vector<std::vector<std::size_t>> successors(n);
  std::vector<int> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> preds;
    for (const auto& t : graph.nodes[i].src_tensors) {
      auto it = producer.find(t);
      if (it != producer.end() && it->second != i) preds.insert(it->second);
    }
    for (std::size_t p : preds) {
      successors[p].push_back(i);
      ++indegree[i];
    }
  }

  // Min-heap on original position keeps the order stable; positions are
  // unique so the id tie-break never actually fires, but it pins the contract.
  auto later = [&graph](std::size_t a, std::size_t b) {
    if (a != b) return a > b;
    return graph.nodes[a].id > graph.nodes[b].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }

  std::vector<OperationNode> sorted;
  sorted.reserve(n);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    sorted.push_back(graph.nodes[i]);
    for (std::size_t s : successors[i]) {
      if (--indegree[s] == 0) ready.push(s);
    }
  }
  if (sorted.size() != n) throw Error("cycle detected in graph");
  return sorted;
}

namespace {

TensorShape require_shape(const ComputationalGraph& g, const OperationNode& n,
                          const std::string& tensor) {
  auto s = g.shape(tensor);
  if (!s || !s->defined()) {
    throw Error("node '" + n.id + "': shape of tensor '" + tensor + "' is unknown");
  }
  return *s;
}

TensorShape conv_output(const OperationNode& n, const TensorShape& in) {
  const auto& a = n.conv();
  if (in.c % a.groups != 0) {
    throw Error("node '" + n.id + "': groups must divide input channels");
  }
  if (n.kind == OpKind::kDepthwiseConv2D && a.filters != in.c) {
    throw Error("node '" + n.id + "': depthwise filters must equal input channels");
  }
  TensorShape out;
  if (a.padding == PaddingMode::kSame) {
    out.h = ceil_div(in.h, a.stride);
    out.w = ceil_div(in.w, a.stride);
  } else {
    if (in.h < a.kernel_h || in.w < a.kernel_w) {
      throw Error("node '" + n.id + "': kernel larger than valid-padded input");
    }
    out.h = (in.h - a.kernel_h) / a.stride + 1;
    out.w = (in.w - a.kernel_w) / a.stride + 1;
  }
  out.c = a.filters;
  return out;
}

int ceil_div_checked(int a, int b) { return (a + b - 1) / b; }

}  // namespace

ComputationalGraph infer_shapes(const ComputationalGraph& graph) {
  if (auto violations = validate(graph); !violations.empty()) {
    throw Error("cannot infer shapes: " + violations.front().subject + ": " +
                violations.front().message);
  }

  ComputationalGraph g = graph;
  for (const auto& t : g.inputs) {
    auto it = g.tensors.find(t);
    if (it == g.tensors.end() || !it->second || !it->second->defined()) {
      throw Error("graph input '" + t + "' has no declared shape");
    }
  }

  auto assign = [&g](const OperationNode& n, const std::string& tensor, TensorShape inferred) {
    auto& slot = g.tensors.at(tensor);
    if (slot && slot->defined() && *slot != inferred) {
      throw Error("node '" + n.id + "': declared shape of '" + tensor +
                  "' conflicts with inferred shape");
    }
    slot = inferred;
  };

  for (const auto& n : g.nodes) {
    TensorShape out;
    switch (n.kind) {
      case OpKind::kConv2D:
      case OpKind::kDepthwiseConv2D:
        out = conv_output(n, require_shape(g, n, n.src_tensors[0]));
        break;
      case OpKind::kFullyConnected: {
        const TensorShape in = require_shape(g, n, n.src_tensors[0]);
        if (in.h != 1 || in.w != 1) {
          throw Error("node '" + n.id + "': fully-connected input must be 1x1 spatially");
        }
        out = TensorShape{1, 1, n.fc().units};
        break;
      }
      case OpKind::kMean: {
        const TensorShape in = require_shape(g, n, n.src_tensors[0]);
        out = TensorShape{1, 1, in.c};
        break;
      }
      case OpKind::kConcat: {
        TensorShape first = require_shape(g, n, n.src_tensors[0]);
        int channels = 0;
        for (const auto& t : n.src_tensors) {
          const TensorShape s = require_shape(g, n, t);
          if (s.h != first.h || s.w != first.w) {
            throw Error("node '" + n.id + "': concat inputs must share spatial dimensions");
          }
          channels += s.c;
        }
        out = TensorShape{first.h, first.w, channels};
        break;
      }
      case OpKind::kSplit: {
        const TensorShape in = require_shape(g, n, n.src_tensors[0]);
        const int count = n.split().count;
        if (in.c % count != 0) {
          throw Error("node '" + n.id + "': split count must divide input channels");
        }
        for (const auto& t : n.dst_tensors) {
          assign(n, t, TensorShape{in.h, in.w, in.c / count});
        }
        continue;  // per-branch shapes already assigned
      }
      case OpKind::kPooling: {
        const TensorShape in = require_shape(g, n, n.src_tensors[0]);
        const auto& a = n.pool();
        out = TensorShape{ceil_div_checked(in.h, a.stride), ceil_div_checked(in.w, a.stride), in.c};
        break;
      }
      case OpKind::kPadding: {
        const TensorShape in = require_shape(g, n, n.src_tensors[0]);
        const auto& a = n.pad();
        out = TensorShape{in.h + 2 * a.pad_h, in.w + 2 * a.pad_w, in.c};
        break;
      }
      case OpKind::kElementwise: {
        const TensorShape a = require_shape(g, n, n.src_tensors[0]);
        if (ew_is_binary(n.elementwise().op)) {
          const TensorShape b = require_shape(g, n, n.src_tensors[1]);
          auto broadcast = [&n](int x, int y) {
            if (x == y) return x;
            if (x == 1 || y == 1) return std::max(x, y);
            throw Error("node '" + n.id + "': elementwise operands are not broadcastable");
          };
          out = TensorShape{broadcast(a.h, b.h), broadcast(a.w, b.w), broadcast(a.c, b.c)};
        } else {
          out = a;
        }
        break;
      }
      case OpKind::kActivation:
      case OpKind::kCopy:
        out = require_shape(g, n, n.src_tensors[0]);
        break;
    }
    for (const auto& t : n.dst_tensors) assign(n, t, out);
  }

  for (const auto& [id, shape] : g.tensors) {
    if (!shape || !shape->defined()) {
      throw Error("tensor '" + id + "' is not reachable from the graph inputs");
    }
  }
  return g;
}

}  // namespace latpred
