#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "latpred/gpu_compile.hpp"
#include "latpred/rng.hpp"
#include "testutil.hpp"

namespace latpred {
namespace {

using test::add_node;
using test::conv_attrs;
using test::graph_with_input;

constexpr GpuInfo kAdreno6xx{GpuVendorClass::kAdreno6xx};
constexpr GpuInfo kAdrenoOther{GpuVendorClass::kAdrenoOther};
constexpr GpuInfo kAmd{GpuVendorClass::kAmd};
constexpr GpuInfo kOther{GpuVendorClass::kOther};

TEST(ParseGpu, DeviceNameTaxonomy) {
  const std::map<std::string, GpuVendorClass> expected = {
      {"adreno6xx", GpuVendorClass::kAdreno6xx},
      {"Adreno 640", GpuVendorClass::kAdreno6xx},
      {"adreno616", GpuVendorClass::kAdreno6xx},
      {"adreno-685", GpuVendorClass::kAdreno6xx},
      {"Adreno 540", GpuVendorClass::kAdrenoOther},
      {"adreno730", GpuVendorClass::kAdrenoOther},
      {"adreno", GpuVendorClass::kAdrenoOther},
      {"adreno-other", GpuVendorClass::kAdrenoOther},
      {"Mali G76", GpuVendorClass::kOther},
      {"mali-g52", GpuVendorClass::kOther},
      {"PowerVR GE8320", GpuVendorClass::kOther},
      {"other", GpuVendorClass::kOther},
      {"AMD", GpuVendorClass::kAmd},
      {"Radeon 680M", GpuVendorClass::kAmd},
  };
  for (const auto& [name, vendor] : expected) {
    const auto parsed = parse_gpu(name);
    ASSERT_TRUE(parsed.has_value()) << name;
    EXPECT_EQ(parsed->vendor_class, vendor) << name;
  }
  EXPECT_FALSE(parse_gpu("").has_value());
  EXPECT_FALSE(parse_gpu("nvidia").has_value());
  EXPECT_FALSE(parse_gpu("adrenoX").has_value());
}

TEST(ParseGpu, VendorClassNamesRoundTrip) {
  for (auto vendor : {GpuVendorClass::kAdreno6xx, GpuVendorClass::kAdrenoOther,
                      GpuVendorClass::kAmd, GpuVendorClass::kOther}) {
    const auto parsed = parse_gpu(gpu_vendor_class_name(vendor));
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ(parsed->vendor_class, vendor);
  }
}

TEST(IsLinkable, FollowsKindAndOutputCount) {
  OperationNode relu{"r", OpKind::kActivation, {}, {"t0"}, {"t1"}};
  EXPECT_TRUE(is_linkable(relu));

  OperationNode copy{"c", OpKind::kCopy, {}, {"t0"}, {"t1"}};
  EXPECT_TRUE(is_linkable(copy));

  OperationNode add{"a", OpKind::kElementwise, EwAttrs{EwOp::kAdd}, {"t0", "t1"}, {"t2"}};
  EXPECT_TRUE(is_linkable(add));

  OperationNode conv{"k", OpKind::kConv2D, conv_attrs(3, 1, 8), {"t0"}, {"t1"}};
  EXPECT_FALSE(is_linkable(conv));

  OperationNode two_out{"a2", OpKind::kElementwise, EwAttrs{EwOp::kAdd},
                        {"t0", "t1"}, {"t2", "t3"}};
  EXPECT_FALSE(is_linkable(two_out));
}

TEST(MergeNodes, FusesConvIntoSoleActivationConsumer) {
  const FusedGraph fused = merge_nodes(test::conv_relu_graph());
  ASSERT_EQ(fused.nodes.size(), 1u);
  EXPECT_EQ(fused.nodes[0].members, (std::vector<std::string>{"conv1", "relu1"}));
  EXPECT_EQ(fused.nodes[0].effective_kind, OpKind::kConv2D);
  // The survivor inherits the producer's inputs.
  EXPECT_EQ(fused.nodes[0].node.src_tensors, (std::vector<std::string>{"t0"}));
  EXPECT_EQ(fused.nodes[0].node.dst_tensors, (std::vector<std::string>{"t2"}));
}

TEST(MergeNodes, TwoConsumersBlockFusion) {
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  add_node(g, "conv1", OpKind::kConv2D, conv_attrs(3, 1, 16), {"t0"}, {"t1"});
  add_node(g, "relu1", OpKind::kActivation, {}, {"t1"}, {"t2"});
  add_node(g, "relu2", OpKind::kActivation, {}, {"t1"}, {"t3"});
  g.outputs.insert(g.outputs.end(), {"t2", "t3"});
  EXPECT_EQ(merge_nodes(g).nodes.size(), 3u);
}

TEST(MergeNodes, DoubleUseCountsAsTwoReferences) {
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  add_node(g, "conv1", OpKind::kConv2D, conv_attrs(3, 1, 16), {"t0"}, {"t1"});
  add_node(g, "add1", OpKind::kElementwise, EwAttrs{EwOp::kAdd}, {"t1", "t1"}, {"t2"});
  g.outputs.push_back("t2");
  EXPECT_EQ(merge_nodes(g).nodes.size(), 2u);
}

TEST(MergeNodes, SourceIndexOneBlocksFusion) {
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  add_node(g, "copy1", OpKind::kCopy, {}, {"t0"}, {"t1"});
  add_node(g, "conv1", OpKind::kConv2D, conv_attrs(3, 1, 16), {"t0"}, {"t2"});
  add_node(g, "add1", OpKind::kElementwise, EwAttrs{EwOp::kAdd}, {"t1", "t2"}, {"t3"});
  g.outputs.push_back("t3");
  const FusedGraph fused = merge_nodes(g);
  // copy1 feeds add1 at index 0 and fuses; conv1 arrives at index 1 and must
  // stay separate.
  ASSERT_EQ(fused.nodes.size(), 2u);
  EXPECT_EQ(fused.nodes[0].members, (std::vector<std::string>{"conv1"}));
  EXPECT_EQ(fused.nodes[1].members, (std::vector<std::string>{"copy1", "add1"}));
  EXPECT_EQ(fused.nodes[1].effective_kind, OpKind::kCopy);
  // add1's source list was rewired to copy1's input plus its own remainder.
  EXPECT_EQ(fused.nodes[1].node.src_tensors, (std::vector<std::string>{"t0", "t2"}));
}

TEST(MergeNodes, ChainFusesPairwiseNotTransitively) {
  // conv -> relu -> pool -> copy: relu absorbs conv; pool blocks the chain
  // (not linkable); copy absorbs pool.
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  add_node(g, "conv1", OpKind::kConv2D, conv_attrs(3, 1, 16), {"t0"}, {"t1"});
  add_node(g, "relu1", OpKind::kActivation, {}, {"t1"}, {"t2"});
  add_node(g, "pool1", OpKind::kPooling, PoolAttrs{PoolOp::kMax, 3, 3, 1}, {"t2"}, {"t3"});
  add_node(g, "copy1", OpKind::kCopy, {}, {"t3"}, {"t4"});
  g.outputs.push_back("t4");
  const FusedGraph fused = merge_nodes(g);
  ASSERT_EQ(fused.nodes.size(), 2u);
  EXPECT_EQ(fused.nodes[0].members, (std::vector<std::string>{"conv1", "relu1"}));
  EXPECT_EQ(fused.nodes[0].effective_kind, OpKind::kConv2D);
  EXPECT_EQ(fused.nodes[1].members, (std::vector<std::string>{"pool1", "copy1"}));
  EXPECT_EQ(fused.nodes[1].effective_kind, OpKind::kPooling);
}

TEST(MergeNodes, DominantKindBlocksSecondAbsorption) {
  // conv -> relu1 -> relu2: the fused (conv,relu1) unit keeps conv's kind, so
  // it is itself not linkable into relu2; relu2 then absorbs the unit? No —
  // fusion merges a producer into its consumer only when the *consumer* is
  // linkable, so (conv,relu1) merges into relu2 on the same pass.
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  add_node(g, "conv1", OpKind::kConv2D, conv_attrs(3, 1, 16), {"t0"}, {"t1"});
  add_node(g, "relu1", OpKind::kActivation, {}, {"t1"}, {"t2"});
  add_node(g, "relu2", OpKind::kActivation, {}, {"t2"}, {"t3"});
  g.outputs.push_back("t3");
  const FusedGraph fused = merge_nodes(g);
  ASSERT_EQ(fused.nodes.size(), 1u);
  EXPECT_EQ(fused.nodes[0].members, (std::vector<std::string>{"conv1", "relu1", "relu2"}));
  EXPECT_EQ(fused.nodes[0].effective_kind, OpKind::kConv2D);
}

TEST(MergeNodes, TwoConvsNeverFuse) {
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  add_node(g, "conv1", OpKind::kConv2D, conv_attrs(3, 1, 16), {"t0"}, {"t1"});
  add_node(g, "conv2", OpKind::kConv2D, conv_attrs(3, 1, 16), {"t1"}, {"t2"});
  g.outputs.push_back("t2");
  EXPECT_EQ(merge_nodes(g).nodes.size(), 2u);
}

TEST(MergeNodes, IdempotentWhenMergeConsumesAReference) {
  // t1 feeds both b (fused into d) and c. The merge must migrate b's use of
  // t1 onto the survivor; otherwise c would become t1's sole consumer and a
  // second pass would fuse a into c.
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  add_node(g, "a", OpKind::kActivation, {}, {"t0"}, {"t1"});
  add_node(g, "b", OpKind::kActivation, {}, {"t1"}, {"t2"});
  add_node(g, "d", OpKind::kActivation, {}, {"t2"}, {"t3"});
  add_node(g, "c", OpKind::kElementwise, EwAttrs{EwOp::kAdd}, {"t1", "t3"}, {"t4"});
  g.outputs.push_back("t4");

  const FusedGraph once = merge_nodes(g);
  ASSERT_EQ(once.nodes.size(), 3u);  // only b -> d fuses; a keeps two consumers
  EXPECT_EQ(once.nodes[0].members, (std::vector<std::string>{"a"}));
  EXPECT_EQ(once.nodes[1].members, (std::vector<std::string>{"b", "d"}));
  EXPECT_EQ(once.nodes[1].node.src_tensors, (std::vector<std::string>{"t1"}));
  EXPECT_EQ(once.nodes[2].members, (std::vector<std::string>{"c"}));
  EXPECT_EQ(merge_nodes(once), once);
}

TEST(MergeNodes, IdempotentOnAssortedGraphs) {
  std::vector<ComputationalGraph> graphs;
  graphs.push_back(test::conv_relu_graph());
  {
    ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
    add_node(g, "relu1", OpKind::kActivation, {}, {"t0"}, {"t1"});
    add_node(g, "relu2", OpKind::kActivation, {}, {"t1"}, {"t2"});
    add_node(g, "add1", OpKind::kElementwise, EwAttrs{EwOp::kAdd}, {"t1", "t2"}, {"t3"});
    g.outputs.push_back("t3");
    graphs.push_back(g);
  }
  {
    ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
    add_node(g, "copy1", OpKind::kCopy, {}, {"t0"}, {"t1"});
    add_node(g, "copy2", OpKind::kCopy, {}, {"t1"}, {"t2"});
    add_node(g, "copy3", OpKind::kCopy, {}, {"t2"}, {"t3"});
    add_node(g, "copy4", OpKind::kCopy, {}, {"t3"}, {"t4"});
    g.outputs.push_back("t4");
    graphs.push_back(g);
  }
  for (const auto& g : graphs) {
    const FusedGraph once = merge_nodes(g);
    EXPECT_EQ(merge_nodes(once), once);
  }
}

TEST(CheckGroupedConv, FollowsChannelDivisibility) {
  // groups=4, input 32 channels, filters 64: dst group size 16 -> true.
  EXPECT_TRUE(check_grouped_conv2d(kOther, conv_attrs(3, 1, 64, 4), {8, 8, 32}));
  // groups=1 is never grouped.
  EXPECT_FALSE(check_grouped_conv2d(kOther, conv_attrs(3, 1, 64, 1), {8, 8, 32}));
  // input channels 6 % 4 != 0.
  EXPECT_FALSE(check_grouped_conv2d(kOther, conv_attrs(3, 1, 8, 2), {8, 8, 6}));
  // dst group size 8/8 = 1, not a multiple of 4.
  EXPECT_FALSE(check_grouped_conv2d(kOther, conv_attrs(3, 1, 8, 8), {8, 8, 32}));
  // The whole input-channel count is what matters on the source side, not
  // channels per group: 36 channels, 36 % 4 == 0, even though 36/3 = 12.
  EXPECT_TRUE(check_grouped_conv2d(kOther, conv_attrs(3, 1, 12, 3), {8, 8, 36}));
  // ... and a per-group-divisible source still fails when the total is odd:
  // groups=3, 30 input channels (30 % 4 != 0 although 30/3 = 10 is even).
  EXPECT_FALSE(check_grouped_conv2d(kOther, conv_attrs(3, 1, 12, 3), {8, 8, 30}));
}

TEST(CheckGroupedConv, VendorIndependent) {
  for (const auto& gpu : {kAdreno6xx, kAdrenoOther, kAmd, kOther}) {
    EXPECT_TRUE(check_grouped_conv2d(gpu, conv_attrs(3, 1, 64, 4), {8, 8, 32}));
    EXPECT_FALSE(check_grouped_conv2d(gpu, conv_attrs(3, 1, 8, 2), {8, 8, 6}));
  }
}

// Winograd applicability for the three residual-network convolution shapes;
// each row is (channels, spatial size) with 3x3 stride-1 kernels.
TEST(CheckWinograd, GoldenDecisionTable) {
  const ConvAttrs conv64 = conv_attrs(3, 1, 64);
  const ConvAttrs conv128 = conv_attrs(3, 1, 128);
  const ConvAttrs conv256 = conv_attrs(3, 1, 256);

  // 64 channels, 56x56: src=dst=16 depth units, 196 tiles.
  EXPECT_FALSE(check_winograd(kAdreno6xx, conv64, {56, 56, 64}, {56, 56, 64}));
  EXPECT_TRUE(check_winograd(kOther, conv64, {56, 56, 64}, {56, 56, 64}));

  // 128 channels, 28x28: src=dst=32, 49 tiles.
  EXPECT_FALSE(check_winograd(kAdreno6xx, conv128, {28, 28, 128}, {28, 28, 128}));
  EXPECT_TRUE(check_winograd(kOther, conv128, {28, 28, 128}, {28, 28, 128}));

  // 256 channels, 14x14: src=dst=64, 16 tiles.
  EXPECT_FALSE(check_winograd(kAdreno6xx, conv256, {14, 14, 256}, {14, 14, 256}));
  EXPECT_FALSE(check_winograd(kOther, conv256, {14, 14, 256}, {14, 14, 256}));
}

TEST(CheckWinograd, VendorThresholds) {
  const ConvAttrs conv = conv_attrs(3, 1, 32);
  // src=16 (64 ch), dst=8 (32 filters), tiles=36 (24x24 output).
  EXPECT_TRUE(check_winograd(kAmd, conv, {24, 24, 64}, {24, 24, 32}));
  EXPECT_FALSE(check_winograd(kOther, conv, {24, 24, 64}, {24, 24, 32}));     // dst 8 < 16
  EXPECT_FALSE(check_winograd(kAdreno6xx, conv, {24, 24, 64}, {24, 24, 32})); // src 16 < 32

  // Adreno: src=dst=32 (128 ch) and lots of tiles.
  const ConvAttrs conv128 = conv_attrs(3, 1, 128);
  // 6xx needs >= 128 tiles: 45x45 -> 12*12=144 tiles.
  EXPECT_TRUE(check_winograd(kAdreno6xx, conv128, {45, 45, 128}, {45, 45, 128}));
  // 28x28 -> 49 tiles: below 128 (6xx) but within 64 for other Adrenos? No:
  // 49 < 64 too.
  EXPECT_FALSE(check_winograd(kAdrenoOther, conv128, {28, 28, 128}, {28, 28, 128}));
  // 32x32 -> 64 tiles: enough for AdrenoOther, not for 6xx.
  EXPECT_TRUE(check_winograd(kAdrenoOther, conv128, {32, 32, 128}, {32, 32, 128}));
  EXPECT_FALSE(check_winograd(kAdreno6xx, conv128, {32, 32, 128}, {32, 32, 128}));
}

TEST(CheckWinograd, ShapeGates) {
  // Only ungrouped 3x3 stride-1 convolutions qualify, anywhere.
  EXPECT_FALSE(check_winograd(kOther, conv_attrs(5, 1, 64), {56, 56, 64}, {56, 56, 64}));
  EXPECT_FALSE(check_winograd(kOther, conv_attrs(3, 2, 64), {56, 56, 64}, {28, 28, 64}));
  EXPECT_FALSE(check_winograd(kOther, conv_attrs(3, 1, 64, 2), {56, 56, 64}, {56, 56, 64}));
  ConvAttrs rect = conv_attrs(3, 1, 64);
  rect.kernel_w = 1;
  EXPECT_FALSE(check_winograd(kOther, rect, {56, 56, 64}, {56, 56, 64}));
}

TEST(CheckWinograd, MonotoneInChannelsAndTiles) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const GpuInfo gpu{static_cast<GpuVendorClass>(uniform_int(rng, 0, 3))};
    const int c_in = static_cast<int>(uniform_int(rng, 1, 160));
    const int c_out = static_cast<int>(uniform_int(rng, 1, 160));
    const int h = static_cast<int>(uniform_int(rng, 1, 64));
    const int w = static_cast<int>(uniform_int(rng, 1, 64));
    const ConvAttrs attrs = conv_attrs(3, 1, c_out);
    const bool before = check_winograd(gpu, attrs, {h, w, c_in}, {h, w, c_out});
    if (!before) continue;
    // Thresholds are lower bounds: growing any dimension keeps eligibility.
    ConvAttrs bigger_filters = conv_attrs(3, 1, c_out + 8);
    EXPECT_TRUE(check_winograd(gpu, attrs, {h, w, c_in + 8}, {h, w, c_out}));
    EXPECT_TRUE(check_winograd(gpu, bigger_filters, {h, w, c_in}, {h, w, c_out + 8}));
    EXPECT_TRUE(check_winograd(gpu, attrs, {h + 9, w, c_in}, {h + 9, w, c_out}));
    EXPECT_TRUE(check_winograd(gpu, attrs, {h, w + 9, c_in}, {h, w + 9, c_out}));
  }
}

TEST(SelectConvKernel, PrecedenceOrder) {
  // Grouped wins whenever eligible.
  EXPECT_EQ(select_conv2d_kernel(kOther, conv_attrs(3, 1, 64, 4), {56, 56, 64}, {56, 56, 64}),
            KernelKind::kGroupedConv2D);
  // Winograd next.
  EXPECT_EQ(select_conv2d_kernel(kOther, conv_attrs(3, 1, 64), {56, 56, 64}, {56, 56, 64}),
            KernelKind::kWinograd);
  // Fallback: plain conv.
  EXPECT_EQ(select_conv2d_kernel(kOther, conv_attrs(5, 1, 64), {56, 56, 64}, {56, 56, 64}),
            KernelKind::kConv2D);
  EXPECT_EQ(select_conv2d_kernel(kAdreno6xx, conv_attrs(3, 1, 64), {56, 56, 64}, {56, 56, 64}),
            KernelKind::kConv2D);
}

TEST(Compile, FusedWinogradChain) {
  const ComputationalGraph g = infer_shapes(test::conv_relu_graph());
  const KernelSequence seq = compile(g, kOther);
  ASSERT_EQ(seq.kernels.size(), 1u);
  EXPECT_EQ(seq.kernels[0].base_node, "conv1");
  EXPECT_EQ(seq.kernels[0].kind, KernelKind::kWinograd);
  EXPECT_EQ(seq.kernels[0].linked_nodes, (std::vector<std::string>{"relu1"}));
}

TEST(Compile, TenNodesWithFourFusibleActivations) {
  ComputationalGraph g = graph_with_input("t0", {8, 8, 16});
  std::string cur = "t0";
  for (int i = 1; i <= 4; ++i) {
    const std::string conv_out = "c" + std::to_string(i);
    const std::string relu_out = "r" + std::to_string(i);
    add_node(g, "conv" + std::to_string(i), OpKind::kConv2D, conv_attrs(3, 1, 16),
             {cur}, {conv_out});
    add_node(g, "relu" + std::to_string(i), OpKind::kActivation, {}, {conv_out}, {relu_out});
    cur = relu_out;
  }
  add_node(g, "pool1", OpKind::kPooling, PoolAttrs{PoolOp::kMax, 3, 3, 1}, {cur}, {"p1"});
  add_node(g, "pool2", OpKind::kPooling, PoolAttrs{PoolOp::kAvg, 3, 3, 1}, {"p1"}, {"p2"});
  g.outputs.push_back("p2");
  ASSERT_EQ(g.nodes.size(), 10u);

  const KernelSequence seq = compile(infer_shapes(g), kAdreno6xx);
  EXPECT_EQ(seq.kernels.size(), 6u);
}

TEST(Compile, NoFusionFlagKeepsEveryNode) {
  const ComputationalGraph g = infer_shapes(test::conv_relu_graph());
  const KernelSequence seq = compile(g, kOther, /*fusion=*/false);
  ASSERT_EQ(seq.kernels.size(), 2u);
  EXPECT_TRUE(seq.kernels[0].linked_nodes.empty());
  EXPECT_TRUE(seq.kernels[1].linked_nodes.empty());
  // Kernel selection still applies on the unfused conv.
  EXPECT_EQ(seq.kernels[0].kind, KernelKind::kWinograd);
  EXPECT_EQ(seq.kernels[1].kind, KernelKind::kElementwise);
}

TEST(Compile, NodeConservation) {
  ComputationalGraph g = graph_with_input("t0", {8, 8, 32});
  add_node(g, "conv1", OpKind::kConv2D, conv_attrs(3, 1, 32), {"t0"}, {"t1"});
  add_node(g, "relu1", OpKind::kActivation, {}, {"t1"}, {"t2"});
  add_node(g, "split1", OpKind::kSplit, SplitAttrs{2}, {"t2"}, {"t3", "t4"});
  add_node(g, "sqrt1", OpKind::kElementwise, EwAttrs{EwOp::kSqrt}, {"t3"}, {"t5"});
  add_node(g, "neg1", OpKind::kElementwise, EwAttrs{EwOp::kNeg}, {"t4"}, {"t6"});
  add_node(g, "concat1", OpKind::kConcat, {}, {"t5", "t6"}, {"t7"});
  g.outputs.push_back("t7");

  const KernelSequence seq = compile(infer_shapes(g), kAmd);
  std::multiset<std::string> seen;
  for (const auto& k : seq.kernels) {
    seen.insert(k.base_node);
    seen.insert(k.linked_nodes.begin(), k.linked_nodes.end());
  }
  std::multiset<std::string> expected;
  for (const auto& n : g.nodes) expected.insert(n.id);
  EXPECT_EQ(seen, expected);
}

TEST(CompileCpu, OneKernelPerNodeNoSpecialization) {
  const ComputationalGraph g = infer_shapes(test::conv_relu_graph());
  const KernelSequence seq = compile_cpu(g);
  ASSERT_EQ(seq.kernels.size(), 2u);
  EXPECT_EQ(seq.kernels[0].kind, KernelKind::kConv2D);  // winograd-eligible shape, still conv
  EXPECT_EQ(seq.kernels[1].kind, KernelKind::kElementwise);
  EXPECT_TRUE(seq.kernels[0].linked_nodes.empty());
}

TEST(KernelKindNames, RoundTrip) {
  for (KernelKind kind : all_kernel_kinds()) {
    const auto back = kernel_kind_from_name(kernel_kind_name(kind));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, kind);
  }
  EXPECT_FALSE(kernel_kind_from_name("quantum").has_value());
}

}  // namespace
}  // namespace latpred
