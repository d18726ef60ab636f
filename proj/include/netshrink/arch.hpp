#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace netshrink {

// FLOPs convention everywhere in this project: one multiply-accumulate is
// one FLOP. This calibrates the bundled EfficientNet-B0 spec to its
// published ~387M figure. Batch-norm arithmetic is ignored (folded at
// inference); batch-norm parameters are counted as 2 per channel.

enum class OperatorKind { MbConv, GhostBottleneck, Conv, DepthwiseConv };

OperatorKind operator_kind_from_string(const std::string& s);
std::string to_string(OperatorKind kind);

struct StageSpec {
    OperatorKind op = OperatorKind::MbConv;
    int kernel_size = 3;
    int stride = 1; // applied by the first repeat only
    double expansion_ratio = 1.0;
    int out_channels = 0;
    double se_ratio = 0.0; // 0 disables squeeze-excite
    int repeats = 1;
};

struct ConvLayer {
    int kernel_size = 3;
    int stride = 2;
    int out_channels = 0;
};

struct HeadSpec {
    int out_channels = 0;  // 1x1 conv before global pooling
    int mid_channels = 0;  // optional post-pool 1x1 conv (0 = absent)
    int classes = 1000;
};

struct ArchitectureSpec {
    std::string name;
    int base_resolution = 0;
    ConvLayer stem;
    std::vector<StageSpec> stages;
    HeadSpec head;

    void validate() const; // throws domain_error on invariant violation
};

struct ScalingCoefficients {
    double r = 1.0;
    double d = 1.0;
    double w = 1.0;

    void validate() const;
};

struct ResolvedArchitecture {
    int resolution = 0;
    int stem_channels = 0;
    std::vector<int> repeats;  // per stage, >= 1
    std::vector<int> channels; // per stage, >= 8, multiple of the divisor
    int head_channels = 0;
    int head_mid_channels = 0;
};

struct CostReport {
    std::uint64_t flops = 0;  // multiply-accumulates
    std::uint64_t params = 0; // learnable scalars
};

// Channel rounding convention. Divisor 4: the coarser mobile-CNN divisor
// of 8 would rewrite the GhostNet-A reference channels (28, 44, 140, ...)
// at identity scaling, which must be a no-op.
inline constexpr int kChannelDivisor = 4;
inline constexpr int kMinChannels = 8;
inline constexpr int kMinResolution = 32;

// Nearest multiple of the divisor, at least kMinChannels, bumped up one
// step whenever rounding would fall below 90% of the unrounded value.
int round_channels(double value);

ResolvedArchitecture resolve(const ArchitectureSpec& spec, const ScalingCoefficients& coeffs);
CostReport cost(const ResolvedArchitecture& resolved, const ArchitectureSpec& spec);

// cost(resolve(spec, coeffs)) / cost(resolve(spec, identity)), the realized
// reduction factor c used throughout the pipeline.
double flops_ratio(const ArchitectureSpec& spec, const ScalingCoefficients& coeffs);

// Per-layer counting primitives used by cost(). Output spatial size under
// stride s is ceil(in / s).
namespace layer_cost {

std::uint64_t conv2d_flops(int k, int c_in, int c_out, int h_out, int w_out);
std::uint64_t conv2d_params(int k, int c_in, int c_out, bool bias);
std::uint64_t depthwise_flops(int k, int channels, int h_out, int w_out);
std::uint64_t depthwise_params(int k, int channels);
inline std::uint64_t batchnorm_params(int channels) { return 2ull * channels; }

} // namespace layer_cost

// JSON document schema:
//   {name, base_resolution, stem:{k,stride,out},
//    stages:[{op,k,stride,exp,out,se,repeat}], head:{out,mid?,classes}}
ArchitectureSpec spec_from_json_string(const std::string& text);
std::string spec_to_json_string(const ArchitectureSpec& spec);
ArchitectureSpec load_spec(const std::string& path);

} // namespace netshrink
