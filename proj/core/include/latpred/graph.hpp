#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Computational-graph data model.
//
// A graph is a DAG of operations over named tensors. Tensors carry optional
// HWC shapes; graph inputs must be declared, intermediate shapes are filled in
// by infer_shapes. All functions here are pure: they never mutate their
// arguments and are safe to call concurrently on distinct graphs.

namespace latpred {

// Raised for malformed documents, inconsistent graphs and shape failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct TensorShape {
  int h = 0;
  int w = 0;
  int c = 0;

  bool defined() const { return h > 0 && w > 0 && c > 0; }
  std::int64_t size() const {
    return static_cast<std::int64_t>(h) * w * c;
  }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

enum class OpKind {
  kConv2D,
  kDepthwiseConv2D,
  kFullyConnected,
  kMean,
  kConcat,
  kSplit,
  kPooling,
  kPadding,
  kElementwise,
  kActivation,
  kCopy,
};

// Elementwise operations; the first four and the comparison/extremum group
// are binary, the rest unary (POW is binary: base, exponent).
enum class EwOp {
  kAdd, kSub, kMul, kDiv,
  kExp, kLog, kSqrt, kSquare, kAbs, kNeg,
  kPow,
  kEqual, kGreater, kLess,
  kMaximum, kMinimum,
};

bool ew_is_binary(EwOp op);

enum class PaddingMode { kSame, kValid };
enum class PoolOp { kAvg, kMax };

struct ConvAttrs {
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int groups = 1;
  int filters = 1;
  PaddingMode padding = PaddingMode::kSame;
  friend bool operator==(const ConvAttrs&, const ConvAttrs&) = default;
};

struct PoolAttrs {
  PoolOp pool = PoolOp::kMax;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  friend bool operator==(const PoolAttrs&, const PoolAttrs&) = default;
};

struct SplitAttrs {
  int count = 2;  // branches; must divide input channels
  friend bool operator==(const SplitAttrs&, const SplitAttrs&) = default;
};

struct PadAttrs {
  int pad_h = 0;  // rows added on each of top/bottom
  int pad_w = 0;  // columns added on each of left/right
  friend bool operator==(const PadAttrs&, const PadAttrs&) = default;
};

struct EwAttrs {
  EwOp op = EwOp::kAdd;
  friend bool operator==(const EwAttrs&, const EwAttrs&) = default;
};

struct FcAttrs {
  int units = 1;
  friend bool operator==(const FcAttrs&, const FcAttrs&) = default;
};

using OpAttrs =
    std::variant<std::monostate, ConvAttrs, PoolAttrs, SplitAttrs, PadAttrs, EwAttrs, FcAttrs>;

struct OperationNode {
  std::string id;
  OpKind kind = OpKind::kCopy;
  OpAttrs attrs;
  std::vector<std::string> src_tensors;
  std::vector<std::string> dst_tensors;

  // Checked attribute accessors; throw Error on kind/attr mismatch.
  const ConvAttrs& conv() const;
  const PoolAttrs& pool() const;
  const SplitAttrs& split() const;
  const PadAttrs& pad() const;
  const EwAttrs& elementwise() const;
  const FcAttrs& fc() const;

  friend bool operator==(const OperationNode&, const OperationNode&) = default;
};

struct ComputationalGraph {
  // Tensor id -> shape. nullopt means "not yet inferred".
  std::map<std::string, std::optional<TensorShape>> tensors;
  // Nodes in topological order.
  std::vector<OperationNode> nodes;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  const OperationNode& node(std::string_view id) const;
  std::optional<TensorShape> shape(const std::string& tensor) const;

  friend bool operator==(const ComputationalGraph&, const ComputationalGraph&) = default;
};

struct Violation {
  std::string subject;  // node or tensor id, empty for graph-level issues
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

const char* op_kind_name(OpKind kind);
std::optional<OpKind> op_kind_from_name(std::string_view name);
const char* ew_op_name(EwOp op);
std::optional<EwOp> ew_op_from_name(std::string_view name);

// Structural consistency checks: referenced tensors exist, producers are
// unique, stored node order is topological, arities match the kind, attribute
// values are in range, and shape-dependent divisibility rules hold for
// tensors whose shapes are already known. Returns an empty vector for a
// well-formed graph.
std::vector<Violation> validate(const ComputationalGraph& graph);

// Returns a copy of the graph with every tensor shape filled in, walking
// nodes in topological order. Declared shapes are kept and cross-checked.
// Throws Error on missing input shapes, arity or rule violations (group or
// split divisibility, kernel larger than a valid-padded input, conflicting
// declared shapes).
ComputationalGraph infer_shapes(const ComputationalGraph& graph);

// Reorders nodes topologically. Ties are broken by current position, then by
// node id, which makes the result unique for a given input order. Throws
// Error on cycles.
std::vector<OperationNode> topological_order(const ComputationalGraph& graph);

// JSON document I/O. parse_graph throws Error on malformed documents, unknown
// kinds or attribute keys, dangling tensor references, duplicate producers
// and cycles; the returned graph is structurally valid (validate() may still
// report shape-dependent rule violations). serialize_graph is deterministic:
// equal graphs produce byte-identical text.
ComputationalGraph parse_graph(const std::string& json_text);
ComputationalGraph parse_graph_file(const std::string& path);
std::string serialize_graph(const ComputationalGraph& graph);
void write_graph_file(const ComputationalGraph& graph, const std::string& path);

}  // namespace latpred
