#include "netshrink/formula.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "netshrink/errors.hpp"

namespace netshrink {

namespace {

double clamp_to(const Interval& range, double v) {
    return std::clamp(v, range.lo, range.hi);
}

double realized_ratio_of(const ArchitectureSpec& spec, std::uint64_t flops) {
    const std::uint64_t base = cost(resolve(spec, ScalingCoefficients{}), spec).flops;
    return static_cast<double>(flops) / static_cast<double>(base);
}

} // namespace

ScalingCoefficients solve(const ShrinkFormula& formula, double c) {
    if (!(c > 0.0) || !(c < 1.0))
        throw domain_error("solve: the FLOPs constraint requires a reduction factor 0 < c < 1");
    ScalingCoefficients coeffs;
    coeffs.r = clamp_to(formula.r_clamp, formula.model_r.predict(c).mean);
    coeffs.d = clamp_to(formula.d_clamp, formula.model_d.predict(c).mean);
    coeffs.w = std::sqrt(c / (coeffs.r * coeffs.r * coeffs.d));
    return coeffs;
}

SolveOutcome solve_resolved(const ShrinkFormula& formula, const ArchitectureSpec& spec, double c) {
    SolveOutcome out;
    out.coeffs = solve(formula, c);
    out.arch = resolve(spec, out.coeffs);
    out.cost = cost(out.arch, spec);
    out.realized_ratio = realized_ratio_of(spec, out.cost.flops);

    if (std::abs(out.realized_ratio - c) / c > 0.03) {
        // Discretization pushed the budget off target; re-tune the width.
        const auto [w, ratio] =
            tune_width(spec, out.coeffs.r, out.coeffs.d, out.coeffs.w, c);
        out.coeffs.w = w;
        out.arch = resolve(spec, out.coeffs);
        out.cost = cost(out.arch, spec);
        out.realized_ratio = ratio;
    }
    if (std::abs(out.realized_ratio - c) / c > 0.05) {
        out.unreachable = true;
        out.closest_ratio = out.realized_ratio;
    }
    return out;
}

GiantResult inversed_giant(const ArchitectureSpec& spec, double phi) {
    if (phi < 0.0) throw domain_error("inversed_giant: phi must be >= 0");
    spec.validate();

    GiantResult res;
    if (phi == 0.0) {
        res.coeffs = ScalingCoefficients{};
        res.arch = resolve(spec, res.coeffs);
        res.cost = cost(res.arch, spec);
        res.realized_ratio = 1.0;
        return res;
    }

    const auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
    const double r = round2(std::pow(1.15, -phi));
    const double d = round2(std::pow(1.2, -phi));
    const double target = std::pow(2.0, -phi);
    const double w0 = std::sqrt(target / (r * r * d));

    // Scan the two-decimal width grid in [0.7, 1.3] * w0 for the realized
    // ratio nearest the target; ties go to the larger width.
    double best_w = round2(w0);
    double best_ratio = flops_ratio(spec, ScalingCoefficients{r, d, best_w});
    double best_err = std::abs(best_ratio - target);
    const int lo = static_cast<int>(std::ceil(0.7 * w0 * 100.0));
    const int hi = static_cast<int>(std::floor(1.3 * w0 * 100.0));
    for (int wi = lo; wi <= hi; ++wi) {
        const double w = wi / 100.0;
        if (!(w > 0.0)) continue;
        const double ratio = flops_ratio(spec, ScalingCoefficients{r, d, w});
        const double err = std::abs(ratio - target);
        if (err < best_err || (err == best_err && w > best_w)) {
            best_err = err;
            best_w = w;
            best_ratio = ratio;
        }
    }

    res.coeffs = ScalingCoefficients{r, d, best_w};
    res.arch = resolve(spec, res.coeffs);
    res.cost = cost(res.arch, spec);
    res.realized_ratio = best_ratio;
    return res;
}

std::string solve_outcome_to_json(const SolveOutcome& outcome, const ArchitectureSpec& spec,
                                  double c) {
    nlohmann::ordered_json j;
    j["c"] = c;
    j["r"] = outcome.coeffs.r;
    j["d"] = outcome.coeffs.d;
    j["w"] = outcome.coeffs.w;
    j["resolution"] = outcome.arch.resolution;
    j["flops"] = outcome.cost.flops;
    j["params"] = outcome.cost.params;
    j["realized_ratio"] = outcome.realized_ratio;
    if (outcome.unreachable) {
        j["unreachable_budget"] = true;
        j["closest_ratio"] = outcome.closest_ratio;
    }
    j["stem"] = {{"k", spec.stem.kernel_size},
                 {"stride", spec.stem.stride},
                 {"out", outcome.arch.stem_channels}};
    j["stages"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const auto& st = spec.stages[i];
        j["stages"].push_back({{"op", to_string(st.op)},
                               {"k", st.kernel_size},
                               {"stride", st.stride},
                               {"exp", st.expansion_ratio},
                               {"out", outcome.arch.channels[i]},
                               {"se", st.se_ratio},
                               {"repeat", outcome.arch.repeats[i]}});
    }
    j["head"] = {{"out", outcome.arch.head_channels}, {"classes", spec.head.classes}};
    if (outcome.arch.head_mid_channels > 0) j["head"]["mid"] = outcome.arch.head_mid_channels;
    return j.dump(2) + "\n";
}

} // namespace netshrink
