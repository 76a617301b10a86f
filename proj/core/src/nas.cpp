#include <algorithm>
#include <numeric>

#include "latpred/nas.hpp"
#include "latpred/rng.hpp"

namespace latpred {
namespace {

constexpr std::uint64_t kBranchOpStream = 0x6272616e63686f70ull;
constexpr int kInputChannels = 3;
constexpr int kGroupRetries = 64;
constexpr int kChannelRetries = 64;

int pick(Rng& rng, std::initializer_list<int> values) {
  const auto index = uniform_int(rng, 0, static_cast<std::int64_t>(values.size()) - 1);
  return *(values.begin() + index);
}

bool divides_all(int value, const std::vector<int>& divisors) {
  for (int d : divisors) {
    if (value % d != 0) return false;
  }
  return true;
}

}  // namespace

std::pair<int, int> channel_range(int slot) {
  if (slot < 0 || slot > 9) throw Error("channel slot out of range");
  if (slot <= 4) return {8, 80};
  if (slot <= 8) return {80, 400};
  return {1200, 1800};
}

bool block_halves(int block_index_zero_based) { return block_index_zero_based % 2 == 0; }

SampledArchitecture sample_architecture(std::uint64_t seed, int input_h, int input_w) {
  if (input_h < 1 || input_w < 1) throw Error("sample: input resolution must be positive");
  Rng rng(seed);

  SampledArchitecture arch;
  arch.seed = seed;
  arch.input_h = input_h;
  arch.input_w = input_w;

  // Divisibility obligations on each channel slot: a grouped convolution's
  // group count on its own slot, split counts on the slot that feeds them.
  // Re-draws of a slot must preserve every recorded divisor.
  std::array<std::vector<int>, kBlockCount> divisors;
  int effective = kInputChannels;  // channel width flowing into the next block
  int last_setter = -1;            // block index that produced `effective`, -1 = graph input

  for (int b = 0; b < kBlockCount; ++b) {
    const auto [lo, hi] = channel_range(b);
    const int family = static_cast<int>(uniform_int(rng, 0, 4));
    switch (family) {
      case 0: {  // convolution, optionally grouped
        ConvBlock block;
        block.kernel = pick(rng, {3, 5, 7});
        const bool wants_groups = uniform_int(rng, 0, 1) == 1;
        const int channels = static_cast<int>(uniform_int(rng, lo, hi));
        if (wants_groups) {
          for (int attempt = 0; attempt < kGroupRetries; ++attempt) {
            const int g = 4 * static_cast<int>(uniform_int(rng, 1, 16));
            if (effective % g == 0 && channels % g == 0) {
              block.groups = g;
              divisors[static_cast<std::size_t>(b)].push_back(g);
              break;
            }
          }
          // All retries incompatible: the block falls back to an ungrouped
          // convolution.
        }
        arch.blocks[static_cast<std::size_t>(b)] = block;
        arch.channels[static_cast<std::size_t>(b)] = channels;
        effective = channels;
        last_setter = b;
        break;
      }
      case 1: {
        DepthwiseSeparableBlock block;
        block.kernel = pick(rng, {3, 5, 7});
        arch.blocks[static_cast<std::size_t>(b)] = block;
        arch.channels[static_cast<std::size_t>(b)] = static_cast<int>(uniform_int(rng, lo, hi));
        effective = arch.channels[static_cast<std::size_t>(b)];
        last_setter = b;
        break;
      }
      case 2: {
        LinearBottleneckBlock block;
        block.kernel = pick(rng, {3, 5, 7});
        block.expansion = pick(rng, {1, 3, 6});
        block.se = uniform_int(rng, 0, 1) == 1;
        arch.blocks[static_cast<std::size_t>(b)] = block;
        arch.channels[static_cast<std::size_t>(b)] = static_cast<int>(uniform_int(rng, lo, hi));
        effective = arch.channels[static_cast<std::size_t>(b)];
        last_setter = b;
        break;
      }
      case 3: {  // pooling keeps the channel width; its slot value is unused
        PoolBlock block;
        block.op = uniform_int(rng, 0, 1) == 0 ? PoolOp::kAvg : PoolOp::kMax;
        block.size = pick(rng, {1, 3});
        arch.blocks[static_cast<std::size_t>(b)] = block;
        arch.channels[static_cast<std::size_t>(b)] = static_cast<int>(uniform_int(rng, lo, hi));
        break;
      }
      default: {  // split-merge; needs splits | incoming channels
        SplitMergeBlock block;
        block.splits = static_cast<int>(uniform_int(rng, 2, 4));
        arch.channels[static_cast<std::size_t>(b)] = static_cast<int>(uniform_int(rng, lo, hi));

        if (effective % block.splits != 0) {
          if (last_setter < 0) {
            // The graph input's width is fixed, so re-draw the split count
            // instead of a channel.
            bool resolved = false;
            for (int attempt = 0; attempt < kChannelRetries && !resolved; ++attempt) {
              const int s = static_cast<int>(uniform_int(rng, 2, 4));
              if (effective % s == 0) {
                block.splits = s;
                resolved = true;
              }
            }
            if (!resolved) {
              for (int s : {2, 3, 4}) {
                if (effective % s == 0) {
                  block.splits = s;
                  resolved = true;
                  break;
                }
              }
            }
            if (!resolved) throw Error("sample: no split count divides the input width");
          } else {
            // Re-draw the feeding block's channel count until every recorded
            // obligation and the new split count divide it.
            auto& src_divisors = divisors[static_cast<std::size_t>(last_setter)];
            const auto [src_lo, src_hi] = channel_range(last_setter);
            bool resolved = false;
            for (int attempt = 0; attempt < kChannelRetries && !resolved; ++attempt) {
              const int v = static_cast<int>(uniform_int(rng, src_lo, src_hi));
              if (v % block.splits == 0 && divides_all(v, src_divisors)) {
                arch.channels[static_cast<std::size_t>(last_setter)] = v;
                effective = v;
                resolved = true;
              }
            }
            if (!resolved) {
              // Deterministic fallback: smallest in-range multiple of the
              // combined obligations; if none exists the blocker can only be
              // a group count, so drop the source's group option first.
              auto lcm_all = [&src_divisors](int s) {
                long long l = s;
                for (int d : src_divisors) l = std::lcm(l, static_cast<long long>(d));
                return l;
              };
              long long l = lcm_all(block.splits);
              if ((src_lo + l - 1) / l * l > src_hi) {
                auto* src_conv = std::get_if<ConvBlock>(&arch.blocks[static_cast<std::size_t>(last_setter)]);
                if (src_conv != nullptr && src_conv->groups) {
                  const int g = *src_conv->groups;
                  src_conv->groups.reset();
                  src_divisors.erase(std::find(src_divisors.begin(), src_divisors.end(), g));
                  l = lcm_all(block.splits);
                }
              }
              const long long v = (src_lo + l - 1) / l * l;
              if (v > src_hi) throw Error("sample: cannot satisfy split divisibility");
              arch.channels[static_cast<std::size_t>(last_setter)] = static_cast<int>(v);
              effective = static_cast<int>(v);
            }
            src_divisors.push_back(block.splits);
          }
        } else if (last_setter >= 0) {
          divisors[static_cast<std::size_t>(last_setter)].push_back(block.splits);
        }
        arch.blocks[static_cast<std::size_t>(b)] = block;
        break;
      }
    }
  }

  const auto [head_lo, head_hi] = channel_range(9);
  arch.channels[9] = static_cast<int>(uniform_int(rng, head_lo, head_hi));
  return arch;
}

namespace {

class GraphBuilder {
 public:
  explicit GraphBuilder(ComputationalGraph& g) : g_(g) {}

  std::string new_tensor() {
    char name[16];
    std::snprintf(name, sizeof(name), "t%03d", counter_++);
    g_.tensors[name] = std::nullopt;
    return name;
  }

  std::string declare_input(int h, int w, int c) {
    const std::string t = new_tensor();
    g_.tensors[t] = TensorShape{h, w, c};
    g_.inputs.push_back(t);
    return t;
  }

  std::string add(std::string id, OpKind kind, OpAttrs attrs, std::vector<std::string> srcs,
                  int dst_count = 1) {
    OperationNode n;
    n.id = std::move(id);
    n.kind = kind;
    n.attrs = std::move(attrs);
    n.src_tensors = std::move(srcs);
    for (int i = 0; i < dst_count; ++i) n.dst_tensors.push_back(new_tensor());
    g_.nodes.push_back(n);
    return g_.nodes.back().dst_tensors.front();
  }

  const OperationNode& last() const { return g_.nodes.back(); }

 private:
  ComputationalGraph& g_;
  int counter_ = 0;
};

}  // namespace

ComputationalGraph lower_to_graph(const SampledArchitecture& arch) {
  ComputationalGraph g;
  GraphBuilder builder(g);

  std::string current = builder.declare_input(arch.input_h, arch.input_w, kInputChannels);
  int effective = kInputChannels;

  // Branch elementwise ops are not part of the architecture encoding; draw
  // them from a stream derived from its seed so lowering stays a pure
  // function of the architecture.
  Rng branch_rng(derive_seed(arch.seed, kBranchOpStream));
  const EwOp unary_ops[] = {EwOp::kExp,    EwOp::kLog, EwOp::kSqrt,
                            EwOp::kSquare, EwOp::kAbs, EwOp::kNeg};

  for (int b = 0; b < kBlockCount; ++b) {
    const int stride = block_halves(b) ? 2 : 1;
    const std::string prefix = "b" + std::to_string(b + 1);
    const int block_channels = arch.channels[static_cast<std::size_t>(b)];
    const BlockSpec& spec = arch.blocks[static_cast<std::size_t>(b)];

    if (const auto* conv = std::get_if<ConvBlock>(&spec)) {
      current = builder.add(prefix + "_conv", OpKind::kConv2D,
                            ConvAttrs{conv->kernel, conv->kernel, stride, conv->groups.value_or(1),
                                      block_channels, PaddingMode::kSame},
                            {current});
      effective = block_channels;
    } else if (const auto* ds = std::get_if<DepthwiseSeparableBlock>(&spec)) {
      current = builder.add(prefix + "_dw", OpKind::kDepthwiseConv2D,
                            ConvAttrs{ds->kernel, ds->kernel, stride, 1, effective,
                                      PaddingMode::kSame},
                            {current});
      current = builder.add(prefix + "_pw", OpKind::kConv2D,
                            ConvAttrs{1, 1, 1, 1, block_channels, PaddingMode::kSame}, {current});
      effective = block_channels;
    } else if (const auto* lb = std::get_if<LinearBottleneckBlock>(&spec)) {
      const int expanded = lb->expansion * effective;
      current = builder.add(prefix + "_expand", OpKind::kConv2D,
                            ConvAttrs{1, 1, 1, 1, expanded, PaddingMode::kSame}, {current});
      current = builder.add(prefix + "_dw", OpKind::kDepthwiseConv2D,
                            ConvAttrs{lb->kernel, lb->kernel, stride, 1, expanded,
                                      PaddingMode::kSame},
                            {current});
      if (lb->se) {
        // Squeeze-and-excite over the expanded width, gating before the
        // projection; reduction ratio 4.
        const std::string pooled = builder.add(prefix + "_se_mean", OpKind::kMean, {}, {current});
        const std::string squeezed =
            builder.add(prefix + "_se_fc1", OpKind::kFullyConnected,
                        FcAttrs{std::max(1, expanded / 4)}, {pooled});
        const std::string excited = builder.add(prefix + "_se_fc2", OpKind::kFullyConnected,
                                                FcAttrs{expanded}, {squeezed});
        current = builder.add(prefix + "_se_mul", OpKind::kElementwise, EwAttrs{EwOp::kMul},
                              {current, excited});
      }
      current = builder.add(prefix + "_project", OpKind::kConv2D,
                            ConvAttrs{1, 1, 1, 1, block_channels, PaddingMode::kSame}, {current});
      effective = block_channels;
    } else if (const auto* pool = std::get_if<PoolBlock>(&spec)) {
      current = builder.add(prefix + "_pool", OpKind::kPooling,
                            PoolAttrs{pool->op, pool->size, pool->size, stride}, {current});
    } else {
      const auto& sm = std::get<SplitMergeBlock>(spec);
      if (stride == 2) {
        // Split-merge has no stride-bearing operation; realize the halving
        // with a 1x1 stride-2 pooling in front, like a size-1 pool block.
        current = builder.add(prefix + "_downsample", OpKind::kPooling,
                              PoolAttrs{PoolOp::kMax, 1, 1, 2}, {current});
      }
      if (effective % sm.splits != 0) throw Error("lower: split does not divide channels");
      builder.add(prefix + "_split", OpKind::kSplit, SplitAttrs{sm.splits}, {current}, sm.splits);
      const OperationNode split_node = builder.last();
      std::vector<std::string> branch_outputs;
      for (int j = 0; j < sm.splits; ++j) {
        const EwOp op = unary_ops[uniform_int(branch_rng, 0, 5)];
        branch_outputs.push_back(builder.add(prefix + "_branch" + std::to_string(j),
                                             OpKind::kElementwise, EwAttrs{op},
                                             {split_node.dst_tensors[static_cast<std::size_t>(j)]}));
      }
      current = builder.add(prefix + "_concat", OpKind::kConcat, {}, branch_outputs);
    }
  }

  current = builder.add("head_conv", OpKind::kConv2D,
                        ConvAttrs{1, 1, 1, 1, arch.channels[9], PaddingMode::kSame}, {current});
  current = builder.add("head_mean", OpKind::kMean, {}, {current});
  current = builder.add("head_fc", OpKind::kFullyConnected, FcAttrs{1000}, {current});

  g.outputs.push_back(current);
  return g;
}

}  // namespace latpred
