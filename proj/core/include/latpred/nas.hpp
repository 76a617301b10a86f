#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>

#include "latpred/graph.hpp"

// Synthetic-architecture sampler. Networks are a fixed chain of 9 blocks plus
// a classification head; block types and parameters are drawn uniformly,
// channel counts uniformly within per-position ranges, with re-draws keeping
// group counts and split counts divisible into the channels they act on.

namespace latpred {

struct ConvBlock {
  int kernel = 3;                 // 3, 5 or 7
  std::optional<int> groups;      // multiple of 4 in [4, 64] when present
  friend bool operator==(const ConvBlock&, const ConvBlock&) = default;
};

struct DepthwiseSeparableBlock {
  int kernel = 3;
  friend bool operator==(const DepthwiseSeparableBlock&, const DepthwiseSeparableBlock&) = default;
};

struct LinearBottleneckBlock {
  int kernel = 3;
  int expansion = 1;  // 1, 3 or 6
  bool se = false;    // squeeze-and-excite on the expanded channels
  friend bool operator==(const LinearBottleneckBlock&, const LinearBottleneckBlock&) = default;
};

struct PoolBlock {
  PoolOp op = PoolOp::kMax;
  int size = 1;  // 1 or 3
  friend bool operator==(const PoolBlock&, const PoolBlock&) = default;
};

struct SplitMergeBlock {
  int splits = 2;  // 2, 3 or 4
  friend bool operator==(const SplitMergeBlock&, const SplitMergeBlock&) = default;
};

using BlockSpec =
    std::variant<ConvBlock, DepthwiseSeparableBlock, LinearBottleneckBlock, PoolBlock,
                 SplitMergeBlock>;

constexpr int kBlockCount = 9;

struct SampledArchitecture {
  std::array<BlockSpec, kBlockCount> blocks;
  // channels[b] belongs to block b+1 for b < 9 (ignored by pool and
  // split-merge blocks, which keep their input width); channels[9] is the
  // head convolution's width.
  std::array<int, kBlockCount + 1> channels{};
  std::uint64_t seed = 0;
  int input_h = 224;
  int input_w = 224;

  friend bool operator==(const SampledArchitecture&, const SampledArchitecture&) = default;
};

// Inclusive channel range for channel slot 0..9.
std::pair<int, int> channel_range(int slot);

// Blocks 1, 3, 5, 7, 9 (1-based) run at stride 2, halving the spatial dims.
bool block_halves(int block_index_zero_based);

SampledArchitecture sample_architecture(std::uint64_t seed, int input_h = 224, int input_w = 224);

// Deterministic lowering to a computational graph with the fixed head
// Conv1x1 → Mean → FullyConnected(1000). Only the input tensor's shape is
// declared; run infer_shapes for the rest. The per-branch elementwise ops of
// split-merge blocks are unspecified by the space definition and are drawn
// from a stream derived from the architecture's seed, so equal architectures
// lower to byte-identical graphs.
ComputationalGraph lower_to_graph(const SampledArchitecture& arch);

}  // namespace latpred
