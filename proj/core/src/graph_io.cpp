#include <fstream>
#include <sstream>

#include "latpred/graph.hpp"
#include "nlohmann/json.hpp"

namespace latpred {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error(message); }

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional = {}) {
  for (const char* key : required) {
    if (!obj.contains(key)) fail(where + ": missing key '" + key + "'");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : required) known = known || it.key() == key;
    for (const char* key : optional) known = known || it.key() == key;
    if (!known) fail(where + ": unknown key '" + it.key() + "'");
  }
}

int get_int(const json& obj, const std::string& where, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + ": '" + std::string(key) + "' must be an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(where + ": '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> get_string_array(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where + ": expected an array of tensor ids");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_string()) fail(where + ": expected an array of tensor ids");
    out.push_back(e.get<std::string>());
  }
  return out;
}

OpAttrs parse_attrs(OpKind kind, const json* attrs, const std::string& where) {
  const bool has = attrs != nullptr && !attrs->is_null();
  if (has && !attrs->is_object()) fail(where + ": 'attrs' must be an object");

  auto require_attrs = [&]() -> const json& {
    if (!has) fail(where + ": missing 'attrs' for " + op_kind_name(kind));
    return *attrs;
  };

  switch (kind) {
    case OpKind::kConv2D:
    case OpKind::kDepthwiseConv2D: {
      const json& a = require_attrs();
      expect_keys(a, where, {"kernel_h", "kernel_w", "stride", "filters"}, {"groups", "padding"});
      ConvAttrs c;
      c.kernel_h = get_int(a, where, "kernel_h");
      c.kernel_w = get_int(a, where, "kernel_w");
      c.stride = get_int(a, where, "stride");
      c.filters = get_int(a, where, "filters");
      c.groups = a.contains("groups") ? get_int(a, where, "groups") : 1;
      if (a.contains("padding")) {
        const std::string p = get_string(a, where, "padding");
        if (p == "same") c.padding = PaddingMode::kSame;
        else if (p == "valid") c.padding = PaddingMode::kValid;
        else fail(where + ": padding must be 'same' or 'valid'");
      }
      return c;
    }
    case OpKind::kPooling: {
      const json& a = require_attrs();
      expect_keys(a, where, {"pool", "kernel_h", "kernel_w", "stride"});
      PoolAttrs p;
      const std::string op = get_string(a, where, "pool");
      if (op == "avg") p.pool = PoolOp::kAvg;
      else if (op == "max") p.pool = PoolOp::kMax;
      else fail(where + ": pool must be 'avg' or 'max'");
      p.kernel_h = get_int(a, where, "kernel_h");
      p.kernel_w = get_int(a, where, "kernel_w");
      p.stride = get_int(a, where, "stride");
      return p;
    }
    case OpKind::kSplit: {
      const json& a = require_attrs();
      expect_keys(a, where, {"count"});
      return SplitAttrs{get_int(a, where, "count")};
    }
    case OpKind::kPadding: {
      const json& a = require_attrs();
      expect_keys(a, where, {"pad_h", "pad_w"});
      return PadAttrs{get_int(a, where, "pad_h"), get_int(a, where, "pad_w")};
    }
    case OpKind::kElementwise: {
      const json& a = require_attrs();
      expect_keys(a, where, {"op"});
      const std::string name = get_string(a, where, "op");
      const auto op = ew_op_from_name(name);
      if (!op) fail(where + ": unknown elementwise op '" + name + "'");
      return EwAttrs{*op};
    }
    case OpKind::kFullyConnected: {
      const json& a = require_attrs();
      expect_keys(a, where, {"units"});
      return FcAttrs{get_int(a, where, "units")};
    }
    case OpKind::kMean:
    case OpKind::kConcat:
    case OpKind::kActivation:
    case OpKind::kCopy:
      if (has && !attrs->empty()) {
        fail(where + ": " + op_kind_name(kind) + " takes no attributes");
      }
      return std::monostate{};
  }
  fail(where + ": unhandled kind");
}

json attrs_to_json(const OperationNode& n) {
  switch (n.kind) {
    case OpKind::kConv2D:
    case OpKind::kDepthwiseConv2D: {
      const auto& a = n.conv();
      return json{{"kernel_h", a.kernel_h}, {"kernel_w", a.kernel_w},
                  {"stride", a.stride},     {"filters", a.filters},
                  {"groups", a.groups},
                  {"padding", a.padding == PaddingMode::kSame ? "same" : "valid"}};
    }
    case OpKind::kPooling: {
      const auto& a = n.pool();
      return json{{"pool", a.pool == PoolOp::kAvg ? "avg" : "max"},
                  {"kernel_h", a.kernel_h},
                  {"kernel_w", a.kernel_w},
                  {"stride", a.stride}};
    }
    case OpKind::kSplit:
      return json{{"count", n.split().count}};
    case OpKind::kPadding:
      return json{{"pad_h", n.pad().pad_h}, {"pad_w", n.pad().pad_w}};
    case OpKind::kElementwise:
      return json{{"op", ew_op_name(n.elementwise().op)}};
    case OpKind::kFullyConnected:
      return json{{"units", n.fc().units}};
    default:
      return json(nullptr);
  }
}

}  // namespace

ComputationalGraph parse_graph(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("malformed graph document: ") + e.what());
  }
  if (!doc.is_object()) fail("malformed graph document: top level must be an object");
  expect_keys(doc, "graph", {"tensors", "nodes", "inputs", "outputs"});

  ComputationalGraph g;

  const json& tensors = doc.at("tensors");
  if (!tensors.is_object()) fail("graph: 'tensors' must be an object");
  for (auto it = tensors.begin(); it != tensors.end(); ++it) {
    const std::string where = "tensor '" + it.key() + "'";
    if (it.value().is_null()) {
      g.tensors[it.key()] = std::nullopt;
      continue;
    }
    if (!it.value().is_object()) fail(where + ": shape must be an object or null");
    expect_keys(it.value(), where, {"h", "w", "c"});
    TensorShape s{get_int(it.value(), where, "h"), get_int(it.value(), where, "w"),
                  get_int(it.value(), where, "c")};
    if (!s.defined()) fail(where + ": shape dimensions must be positive");
    g.tensors[it.key()] = s;
  }

  const json& nodes = doc.at("nodes");
  if (!nodes.is_array()) fail("graph: 'nodes' must be an array");
  for (const auto& jn : nodes) {
    if (!jn.is_object()) fail("graph: each node must be an object");
    const std::string id = jn.contains("id") && jn.at("id").is_string()
                               ? jn.at("id").get<std::string>()
                               : "";
    const std::string where = id.empty() ? "node" : "node '" + id + "'";
    expect_keys(jn, where, {"id", "kind", "src", "dst"}, {"attrs"});
    if (id.empty()) fail("graph: node ids must be non-empty strings");

    const std::string kind_name = get_string(jn, where, "kind");
    const auto kind = op_kind_from_name(kind_name);
    if (!kind) fail(where + ": unknown operation kind '" + kind_name + "'");

    OperationNode n;
    n.id = id;
    n.kind = *kind;
    n.attrs = parse_attrs(*kind, jn.contains("attrs") ? &jn.at("attrs") : nullptr, where);
    n.src_tensors = get_string_array(jn.at("src"), where + ": src");
    n.dst_tensors = get_string_array(jn.at("dst"), where + ": dst");
    g.nodes.push_back(std::move(n));
  }

  g.inputs = get_string_array(doc.at("inputs"), "graph: inputs");
  g.outputs = get_string_array(doc.at("outputs"), "graph: outputs");

  // Normalize node order (document order breaks ties), then insist the result
  // is structurally sound before handing it back.
  g.nodes = topological_order(g);
  if (auto violations = validate(g); !violations.empty()) {
    fail("invalid graph: " + violations.front().subject + ": " + violations.front().message);
  }
  return g;
}

ComputationalGraph parse_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open graph file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_graph(buffer.str());
}

std::string serialize_graph(const ComputationalGraph& graph) {
  json doc;
  json tensors = json::object();
  for (const auto& [id, shape] : graph.tensors) {
    if (shape) {
      tensors[id] = json{{"h", shape->h}, {"w", shape->w}, {"c", shape->c}};
    } else {
      tensors[id] = json(nullptr);
    }
  }
  doc["tensors"] = std::move(tensors);

  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["kind"] = op_kind_name(n.kind);
    json attrs = attrs_to_json(n);
    if (!attrs.is_null()) jn["attrs"] = std::move(attrs);
    jn["src"] = n.src_tensors;
    jn["dst"] = n.dst_tensors;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  doc["inputs"] = graph.inputs;
  doc["outputs"] = graph.outputs;
  return doc.dump(2) + "\n";
}

void write_graph_file(const ComputationalGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write graph file '" + path + "'");
  out << serialize_graph(graph);
}

}  // namespace latpred
