#include "netshrink/arch.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "netshrink/errors.hpp"

namespace netshrink {

using json = nlohmann::ordered_json;

OperatorKind operator_kind_from_string(const std::string& s) {
    if (s == "mbconv") return OperatorKind::MbConv;
    if (s == "ghost_bneck") return OperatorKind::GhostBottleneck;
    if (s == "conv") return OperatorKind::Conv;
    if (s == "depthwise_conv") return OperatorKind::DepthwiseConv;
    throw input_error("unknown operator kind: " + s);
}

std::string to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::MbConv: return "mbconv";
        case OperatorKind::GhostBottleneck: return "ghost_bneck";
        case OperatorKind::Conv: return "conv";
        case OperatorKind::DepthwiseConv: return "depthwise_conv";
    }
    throw domain_error("invalid operator kind");
}

void ArchitectureSpec::validate() const {
    if (base_resolution < kMinResolution)
        throw domain_error(name + ": base_resolution must be >= 32");
    if (stages.empty())
        throw domain_error(name + ": stages must be non-empty");
    if (stem.out_channels <= 0 || stem.kernel_size <= 0 || stem.stride < 1)
        throw domain_error(name + ": invalid stem");
    for (const auto& st : stages) {
        if (st.stride != 1 && st.stride != 2)
            throw domain_error(name + ": stage stride must be 1 or 2");
        if (st.repeats < 1)
            throw domain_error(name + ": stage repeats must be >= 1");
        if (st.expansion_ratio < 1.0)
            throw domain_error(name + ": expansion_ratio must be >= 1");
        if (st.out_channels <= 0 || st.kernel_size <= 0)
            throw domain_error(name + ": invalid stage channels/kernel");
        if (st.se_ratio < 0.0 || st.se_ratio > 1.0)
            throw domain_error(name + ": se_ratio must lie in [0,1]");
    }
    if (head.out_channels <= 0 || head.classes <= 0 || head.mid_channels < 0)
        throw domain_error(name + ": invalid head");
}

void ScalingCoefficients::validate() const {
    if (!(r > 0.0) || !(d > 0.0) || !(w > 0.0) ||
        !std::isfinite(r) || !std::isfinite(d) || !std::isfinite(w))
        throw domain_error("scaling coefficients must be positive and finite");
}

int round_channels(double value) {
    constexpr int div = kChannelDivisor;
    int rounded = static_cast<int>(value + div / 2.0) / div * div;
    rounded = std::max(kMinChannels, rounded);
    if (rounded < 0.9 * value) rounded += div; // no-collapse rule
    return rounded;
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

int resolve_repeats(double d, int repeats) {
    // Floor with a one-repeat floor. Floor tracks the intended total block
    // count more closely than ceil for shrinking (d < 1), which is the
    // direction this tool is calibrated for.
    return std::max(1, static_cast<int>(std::floor(d * repeats)));
}

} // namespace

ResolvedArchitecture resolve(const ArchitectureSpec& spec, const ScalingCoefficients& coeffs) {
    spec.validate();
    coeffs.validate();

    ResolvedArchitecture out;
    out.resolution = std::max(kMinResolution,
                              static_cast<int>(std::lround(coeffs.r * spec.base_resolution)));
    out.stem_channels = round_channels(coeffs.w * spec.stem.out_channels);
    out.repeats.reserve(spec.stages.size());
    out.channels.reserve(spec.stages.size());
    for (const auto& st : spec.stages) {
        out.repeats.push_back(resolve_repeats(coeffs.d, st.repeats));
        out.channels.push_back(round_channels(coeffs.w * st.out_channels));
    }
    out.head_channels = round_channels(coeffs.w * spec.head.out_channels);
    out.head_mid_channels =
        spec.head.mid_channels > 0 ? round_channels(coeffs.w * spec.head.mid_channels) : 0;
    return out;
}

namespace layer_cost {

std::uint64_t conv2d_flops(int k, int c_in, int c_out, int h_out, int w_out) {
    return static_cast<std::uint64_t>(k) * k * c_in * c_out * h_out * w_out;
}

std::uint64_t conv2d_params(int k, int c_in, int c_out, bool bias) {
    return static_cast<std::uint64_t>(k) * k * c_in * c_out +
           (bias ? static_cast<std::uint64_t>(c_out) : 0ull);
}

std::uint64_t depthwise_flops(int k, int channels, int h_out, int w_out) {
    return static_cast<std::uint64_t>(k) * k * channels * h_out * w_out;
}

std::uint64_t depthwise_params(int k, int channels) {
    return static_cast<std::uint64_t>(k) * k * channels;
}

} // namespace layer_cost

namespace {

struct Accumulator {
    std::uint64_t flops = 0;
    std::uint64_t params = 0;

    void conv(int k, int c_in, int c_out, int h) {
        flops += layer_cost::conv2d_flops(k, c_in, c_out, h, h);
        params += layer_cost::conv2d_params(k, c_in, c_out, /*bias=*/false);
        params += layer_cost::batchnorm_params(c_out);
    }
    void depthwise(int k, int channels, int h) {
        flops += layer_cost::depthwise_flops(k, channels, h, h);
        params += layer_cost::depthwise_params(k, channels);
        params += layer_cost::batchnorm_params(channels);
    }
    // Two fully-connected layers on globally pooled features, plus the
    // per-element channel rescale the excitation applies.
    void squeeze_excite(int c_exp, int se_channels, int h) {
        flops += 2ull * c_exp * se_channels;
        flops += static_cast<std::uint64_t>(c_exp) * h * h;
        params += 2ull * c_exp * se_channels + se_channels + c_exp;
    }
};

void cost_mbconv(Accumulator& acc, const StageSpec& st, int c_in, int c_out,
                 int h_in, int h_out) {
    const int c_exp = static_cast<int>(std::llround(st.expansion_ratio * c_in));
    if (st.expansion_ratio != 1.0) acc.conv(1, c_in, c_exp, h_in); // expand
    acc.depthwise(st.kernel_size, c_exp, h_out);
    if (st.se_ratio > 0.0) {
        const int se_ch = std::max(1, static_cast<int>(st.se_ratio * c_in));
        acc.squeeze_excite(c_exp, se_ch, h_out);
    }
    acc.conv(1, c_exp, c_out, h_out); // project
}

// Ghost module: half the output channels from a pointwise conv, the other
// half from a cheap depthwise 3x3 on those primary channels.
void cost_ghost_module(Accumulator& acc, int c_in, int c_out, int h) {
    const int half = (c_out + 1) / 2;
    acc.conv(1, c_in, half, h);
    acc.depthwise(3, half, h);
}

void cost_ghost_bneck(Accumulator& acc, const StageSpec& st, int stride, int c_in,
                      int c_out, int h_in, int h_out) {
    const int c_exp = static_cast<int>(std::llround(st.expansion_ratio * c_in));
    cost_ghost_module(acc, c_in, c_exp, h_in);
    if (stride == 2) acc.depthwise(st.kernel_size, c_exp, h_out);
    if (st.se_ratio > 0.0) {
        const int se_ch = std::max(1, static_cast<int>(st.se_ratio * c_exp));
        acc.squeeze_excite(c_exp, se_ch, h_out);
    }
    cost_ghost_module(acc, c_exp, c_out, h_out);
    if (stride != 1 || c_in != c_out) { // shortcut path
        acc.depthwise(st.kernel_size, c_in, h_out);
        acc.conv(1, c_in, c_out, h_out);
    }
}

} // namespace

CostReport cost(const ResolvedArchitecture& resolved, const ArchitectureSpec& spec) {
    spec.validate();
    if (resolved.repeats.size() != spec.stages.size() ||
        resolved.channels.size() != spec.stages.size())
        throw domain_error("resolved architecture does not match the spec's stage count");

    Accumulator acc;
    int h = ceil_div(resolved.resolution, spec.stem.stride);
    acc.conv(spec.stem.kernel_size, 3, resolved.stem_channels, h);

    int c_in = resolved.stem_channels;
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const StageSpec& st = spec.stages[i];
        const int c_out = resolved.channels[i];
        for (int rep = 0; rep < resolved.repeats[i]; ++rep) {
            const int stride = rep == 0 ? st.stride : 1;
            const int h_in = h;
            const int h_out = ceil_div(h, stride);
            switch (st.op) {
                case OperatorKind::MbConv:
                    cost_mbconv(acc, st, c_in, c_out, h_in, h_out);
                    break;
                case OperatorKind::GhostBottleneck:
                    cost_ghost_bneck(acc, st, stride, c_in, c_out, h_in, h_out);
                    break;
                case OperatorKind::Conv:
                    acc.flops += layer_cost::conv2d_flops(st.kernel_size, c_in, c_out, h_out, h_out);
                    acc.params += layer_cost::conv2d_params(st.kernel_size, c_in, c_out, /*bias=*/true);
                    break;
                case OperatorKind::DepthwiseConv:
                    acc.depthwise(st.kernel_size, c_out, h_out);
                    break;
            }
            c_in = c_out;
            h = h_out;
        }
    }

    acc.conv(1, c_in, resolved.head_channels, h);
    int features = resolved.head_channels;
    if (resolved.head_mid_channels > 0) {
        // Post-pool 1x1 conv acts on a 1x1 map; counted with bias, no BN.
        acc.flops += static_cast<std::uint64_t>(features) * resolved.head_mid_channels;
        acc.params += static_cast<std::uint64_t>(features) * resolved.head_mid_channels +
                      resolved.head_mid_channels;
        features = resolved.head_mid_channels;
    }
    acc.flops += static_cast<std::uint64_t>(features) * spec.head.classes;
    acc.params += static_cast<std::uint64_t>(features) * spec.head.classes + spec.head.classes;

    return {acc.flops, acc.params};
}

double flops_ratio(const ArchitectureSpec& spec, const ScalingCoefficients& coeffs) {
    const CostReport scaled = cost(resolve(spec, coeffs), spec);
    const CostReport base = cost(resolve(spec, ScalingCoefficients{}), spec);
    return static_cast<double>(scaled.flops) / static_cast<double>(base.flops);
}

namespace {

ArchitectureSpec spec_from_json(const json& j) {
    try {
        ArchitectureSpec spec;
        spec.name = j.at("name").get<std::string>();
        spec.base_resolution = j.at("base_resolution").get<int>();
        const auto& stem = j.at("stem");
        spec.stem.kernel_size = stem.at("k").get<int>();
        spec.stem.stride = stem.at("stride").get<int>();
        spec.stem.out_channels = stem.at("out").get<int>();
        for (const auto& s : j.at("stages")) {
            StageSpec st;
            st.op = operator_kind_from_string(s.at("op").get<std::string>());
            st.kernel_size = s.at("k").get<int>();
            st.stride = s.at("stride").get<int>();
            st.expansion_ratio = s.at("exp").get<double>();
            st.out_channels = s.at("out").get<int>();
            st.se_ratio = s.at("se").get<double>();
            st.repeats = s.at("repeat").get<int>();
            spec.stages.push_back(st);
        }
        const auto& head = j.at("head");
        spec.head.out_channels = head.at("out").get<int>();
        spec.head.mid_channels = head.value("mid", 0);
        spec.head.classes = head.at("classes").get<int>();
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw input_error(std::string("bad architecture spec: ") + e.what());
    }
}

} // namespace

ArchitectureSpec spec_from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw input_error("architecture spec is not valid JSON");
    return spec_from_json(j);
}

std::string spec_to_json_string(const ArchitectureSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["base_resolution"] = spec.base_resolution;
    j["stem"] = {{"k", spec.stem.kernel_size},
                 {"stride", spec.stem.stride},
                 {"out", spec.stem.out_channels}};
    j["stages"] = json::array();
    for (const auto& st : spec.stages) {
        j["stages"].push_back({{"op", to_string(st.op)},
                               {"k", st.kernel_size},
                               {"stride", st.stride},
                               {"exp", st.expansion_ratio},
                               {"out", st.out_channels},
                               {"se", st.se_ratio},
                               {"repeat", st.repeats}});
    }
    j["head"] = {{"out", spec.head.out_channels}, {"classes", spec.head.classes}};
    if (spec.head.mid_channels > 0) j["head"]["mid"] = spec.head.mid_channels;
    return j.dump(2) + "\n";
}

ArchitectureSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open architecture spec: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return spec_from_json_string(buf.str());
}

} // namespace netshrink
