#pragma once

// Independent FLOPs recount used as a test oracle. It expands every stage
// into a flat list of concrete blocks first and then walks that list with
// its own spatial bookkeeping, so it shares no code path with
// netshrink::cost beyond the layer formulas it re-states inline.

#include <cmath>
#include <cstdint>
#include <vector>

#include "netshrink/arch.hpp"

namespace naive {

struct Block {
    netshrink::OperatorKind op;
    int k;
    int stride;
    double exp;
    double se;
    int c_in;
    int c_out;
};

inline std::uint64_t recount_flops(const netshrink::ResolvedArchitecture& arch,
                                   const netshrink::ArchitectureSpec& spec) {
    using netshrink::OperatorKind;

    std::vector<Block> blocks;
    int c = arch.stem_channels;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        for (int rep = 0; rep < arch.repeats[i]; ++rep) {
            blocks.push_back({spec.stages[i].op, spec.stages[i].kernel_size,
                              rep == 0 ? spec.stages[i].stride : 1,
                              spec.stages[i].expansion_ratio, spec.stages[i].se_ratio, c,
                              arch.channels[i]});
            c = arch.channels[i];
        }
    }

    auto up = [](long long v) { return static_cast<std::uint64_t>(v); };
    std::uint64_t flops = 0;
    long long h = (arch.resolution + spec.stem.stride - 1) / spec.stem.stride;
    flops += up(1LL * spec.stem.kernel_size * spec.stem.kernel_size * 3 * arch.stem_channels * h * h);

    for (const Block& b : blocks) {
        const long long h_in = h;
        const long long h_out = (h + b.stride - 1) / b.stride;
        const long long c_exp = std::llround(b.exp * b.c_in);
        switch (b.op) {
            case OperatorKind::MbConv: {
                if (b.exp != 1.0) flops += up(1LL * b.c_in * c_exp * h_in * h_in);
                flops += up(1LL * b.k * b.k * c_exp * h_out * h_out);
                if (b.se > 0.0) {
                    const long long se_ch = std::max(1LL, static_cast<long long>(b.se * b.c_in));
                    flops += up(2LL * c_exp * se_ch + c_exp * h_out * h_out);
                }
                flops += up(1LL * c_exp * b.c_out * h_out * h_out);
                break;
            }
            case OperatorKind::GhostBottleneck: {
                const long long half_exp = (c_exp + 1) / 2;
                flops += up(1LL * b.c_in * half_exp * h_in * h_in + 9LL * half_exp * h_in * h_in);
                if (b.stride == 2) flops += up(1LL * b.k * b.k * c_exp * h_out * h_out);
                if (b.se > 0.0) {
                    const long long se_ch = std::max(1LL, static_cast<long long>(b.se * c_exp));
                    flops += up(2LL * c_exp * se_ch + c_exp * h_out * h_out);
                }
                const long long half_out = (b.c_out + 1) / 2;
                flops += up(1LL * c_exp * half_out * h_out * h_out + 9LL * half_out * h_out * h_out);
                if (b.stride != 1 || b.c_in != b.c_out)
                    flops += up(1LL * b.k * b.k * b.c_in * h_out * h_out +
                                1LL * b.c_in * b.c_out * h_out * h_out);
                break;
            }
            case OperatorKind::Conv:
                flops += up(1LL * b.k * b.k * b.c_in * b.c_out * h_out * h_out);
                break;
            case OperatorKind::DepthwiseConv:
                flops += up(1LL * b.k * b.k * b.c_out * h_out * h_out);
                break;
        }
        h = h_out;
    }

    flops += up(1LL * c * arch.head_channels * h * h);
    long long features = arch.head_channels;
    if (arch.head_mid_channels > 0) {
        flops += up(1LL * features * arch.head_mid_channels);
        features = arch.head_mid_channels;
    }
    flops += up(1LL * features * spec.head.classes);
    return flops;
}

} // namespace naive
