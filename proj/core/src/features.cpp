#include "latpred/features.hpp"

#include <array>
#include <cmath>

namespace latpred {
namespace {

const std::vector<std::string> kConvSchema = {
    "input_h", "input_w", "input_c", "output_h", "output_w", "stride", "kernel_h",
    "kernel_w", "filters", "input_size", "output_size", "kernel_size", "flops"};

const std::vector<std::string> kGroupedConvSchema = {
    "input_h", "input_w", "input_c", "output_h", "output_w", "stride", "kernel_h",
    "kernel_w", "filters", "input_size", "output_size", "kernel_size", "flops",
    "group_number"};

const std::vector<std::string> kFullyConnectedSchema = {"input_c", "filters", "parameter_size",
                                                        "flops"};

const std::vector<std::string> kMeanSchema = {"input_h", "input_w", "input_c", "kernel_h",
                                              "kernel_w", "input_size", "flops"};

const std::vector<std::string> kConcatSplitSchema = {
    "input_h", "input_w", "input_c", "kernel_h", "kernel_w", "output_c", "input_size",
    "output_size"};

const std::vector<std::string> kPoolingSchema = {
    "input_h", "input_w", "input_c", "output_h", "output_w", "stride",
    "kernel_h", "kernel_w", "input_size", "output_size", "flops"};

const std::vector<std::string> kPaddingSchema = {
    "input_h", "input_w", "input_c", "output_h", "output_w", "padding_size", "output_size"};

const std::vector<std::string> kElementwiseSchema = {"input_h", "input_w", "input_c",
                                                     "input_size"};

const std::vector<std::string>& schema_ref(KernelKind kind) {
  switch (kind) {
    case KernelKind::kConv2D:
    case KernelKind::kWinograd:
    case KernelKind::kDepthwiseConv2D:
      return kConvSchema;
    case KernelKind::kGroupedConv2D:
      return kGroupedConvSchema;
    case KernelKind::kFullyConnected:
      return kFullyConnectedSchema;
    case KernelKind::kMean:
      return kMeanSchema;
    case KernelKind::kConcat:
    case KernelKind::kSplit:
      return kConcatSplitSchema;
    case KernelKind::kPooling:
      return kPoolingSchema;
    case KernelKind::kPadding:
      return kPaddingSchema;
    case KernelKind::kElementwise:
      return kElementwiseSchema;
  }
  return kElementwiseSchema;
}

TensorShape shape_of(const ComputationalGraph& g, const OperationNode& n,
                     const std::string& tensor) {
  auto s = g.shape(tensor);
  if (!s || !s->defined()) {
    throw Error("features: node '" + n.id + "' has tensor '" + tensor +
                "' without an inferred shape");
  }
  return *s;
}

std::int64_t conv_flops(const ConvAttrs& a, const TensorShape& in, const TensorShape& out) {
  return 2ll * out.h * out.w * a.filters * (in.c / a.groups) * a.kernel_h * a.kernel_w;
}

std::int64_t depthwise_flops(const ConvAttrs& a, const TensorShape& in, const TensorShape& out) {
  return 2ll * out.h * out.w * in.c * a.kernel_h * a.kernel_w;
}

}  // namespace

std::span<const std::string> schema_feature_names(KernelKind kind) {
  const auto& s = schema_ref(kind);
  return {s.data(), s.size()};
}

std::size_t schema_size(KernelKind kind) { return schema_ref(kind).size(); }

int schema_flops_index(KernelKind kind) {
  const auto& names = schema_ref(kind);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "flops") return static_cast<int>(i);
  }
  return -1;
}

FeatureVector extract_features(const Kernel& kernel, const ComputationalGraph& graph) {
  const OperationNode& n = graph.node(kernel.base_node);
  const TensorShape in = shape_of(graph, n, n.src_tensors[0]);
  const TensorShape out = shape_of(graph, n, n.dst_tensors[0]);

  FeatureVector fv;
  fv.schema = kernel.kind;
  auto& v = fv.values;

  auto conv_like = [&](const ConvAttrs& a, std::int64_t kernel_size, std::int64_t flops) {
    v = {static_cast<double>(in.h),
         static_cast<double>(in.w),
         static_cast<double>(in.c),
         static_cast<double>(out.h),
         static_cast<double>(out.w),
         static_cast<double>(a.stride),
         static_cast<double>(a.kernel_h),
         static_cast<double>(a.kernel_w),
         static_cast<double>(a.filters),
         static_cast<double>(in.size()),
         static_cast<double>(out.size()),
         static_cast<double>(kernel_size),
         static_cast<double>(flops)};
  };

  switch (kernel.kind) {
    case KernelKind::kConv2D:
    case KernelKind::kWinograd: {
      if (n.kind != OpKind::kConv2D) {
        throw Error("features: kernel '" + kernel.base_node + "' is not backed by a convolution");
      }
      const auto& a = n.conv();
      conv_like(a, static_cast<std::int64_t>(a.kernel_h) * a.kernel_w * (in.c / a.groups) * a.filters,
                conv_flops(a, in, out));
      break;
    }
    case KernelKind::kGroupedConv2D: {
      if (n.kind != OpKind::kConv2D) {
        throw Error("features: kernel '" + kernel.base_node + "' is not backed by a convolution");
      }
      const auto& a = n.conv();
      conv_like(a, static_cast<std::int64_t>(a.kernel_h) * a.kernel_w * (in.c / a.groups) * a.filters,
                conv_flops(a, in, out));
      v.push_back(static_cast<double>(a.groups));
      break;
    }
    case KernelKind::kDepthwiseConv2D: {
      const auto& a = n.conv();
      conv_like(a, static_cast<std::int64_t>(a.kernel_h) * a.kernel_w * in.c,
                depthwise_flops(a, in, out));
      break;
    }
    case KernelKind::kFullyConnected: {
      const auto& a = n.fc();
      v = {static_cast<double>(in.c), static_cast<double>(a.units),
           static_cast<double>(static_cast<std::int64_t>(in.c) * a.units),
           static_cast<double>(2ll * in.c * a.units)};
      break;
    }
    case KernelKind::kMean: {
      // The reduction window is the whole input plane.
      v = {static_cast<double>(in.h),      static_cast<double>(in.w),
           static_cast<double>(in.c),      static_cast<double>(in.h),
           static_cast<double>(in.w),      static_cast<double>(in.size()),
           static_cast<double>(in.size())};
      break;
    }
    case KernelKind::kConcat:
    case KernelKind::kSplit: {
      int input_c = 0;
      std::int64_t input_size = 0;
      for (const auto& t : n.src_tensors) {
        const TensorShape s = shape_of(graph, n, t);
        input_c += s.c;
        input_size += s.size();
      }
      v = {static_cast<double>(in.h),       static_cast<double>(in.w),
           static_cast<double>(input_c),    static_cast<double>(in.h),
           static_cast<double>(in.w),       static_cast<double>(out.c),
           static_cast<double>(input_size), static_cast<double>(out.size())};
      break;
    }
    case KernelKind::kPooling: {
      const auto& a = n.pool();
      v = {static_cast<double>(in.h),      static_cast<double>(in.w),
           static_cast<double>(in.c),      static_cast<double>(out.h),
           static_cast<double>(out.w),     static_cast<double>(a.stride),
           static_cast<double>(a.kernel_h), static_cast<double>(a.kernel_w),
           static_cast<double>(in.size()), static_cast<double>(out.size()),
           static_cast<double>(in.size())};
      break;
    }
    case KernelKind::kPadding: {
      v = {static_cast<double>(in.h),
           static_cast<double>(in.w),
           static_cast<double>(in.c),
           static_cast<double>(out.h),
           static_cast<double>(out.w),
           static_cast<double>(out.size() - in.size()),
           static_cast<double>(out.size())};
      break;
    }
    case KernelKind::kElementwise: {
      v = {static_cast<double>(in.h), static_cast<double>(in.w), static_cast<double>(in.c),
           static_cast<double>(in.size())};
      break;
    }
  }
  return fv;
}

std::int64_t kernel_flops(const Kernel& kernel, const ComputationalGraph& graph) {
  const int idx = schema_flops_index(kernel.kind);
  if (idx < 0) return 0;
  const FeatureVector fv = extract_features(kernel, graph);
  return static_cast<std::int64_t>(fv.values[static_cast<std::size_t>(idx)]);
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error("standardizer: no rows");
  const std::size_t d = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != d) throw Error("standardizer: ragged rows");
  }

  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stdev.assign(d, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  for (std::size_t j = 0; j < d; ++j) s.mean[j] /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = r[j] - s.mean[j];
      s.stdev[j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < d; ++j) s.stdev[j] = std::sqrt(s.stdev[j] / n);
  return s;
}

std::vector<double> standardize(const Standardizer& s, std::span<const double> row) {
  if (row.size() != s.mean.size()) throw Error("standardizer: row width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = (row[j] - s.mean[j]) / std::max(s.stdev[j], Standardizer::kMinStdev);
  }
  return out;
}

std::vector<std::vector<double>> standardize_rows(const Standardizer& s,
                                                  const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(standardize(s, r));
  return out;
}

}  // namespace latpred
