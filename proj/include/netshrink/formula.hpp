#pragma once

#include "netshrink/arch.hpp"
#include "netshrink/gpr.hpp"
#include "netshrink/search.hpp"

namespace netshrink {

// The shrinking rule: r and d come from GP posterior means, w is the
// dependent variable solved from the FLOPs constraint w = sqrt(c/(r^2 d)).
// r and d are clamped to the sampling range so the zero-mean prior's
// far-extrapolation collapse cannot blow up w.
struct ShrinkFormula {
    GprModel model_r;
    GprModel model_d;
    Interval r_clamp{0.35, 2.8};
    Interval d_clamp{0.35, 2.8};
};

// Requires 0 < c < 1. w is unclamped: it is whatever the constraint needs.
ScalingCoefficients solve(const ShrinkFormula& formula, double c);

struct SolveOutcome {
    ScalingCoefficients coeffs;
    ResolvedArchitecture arch;
    CostReport cost;
    double realized_ratio = 0.0;
    bool unreachable = false;      // depth/width floors prevent the budget
    double closest_ratio = 0.0;    // best achievable ratio when unreachable
};

// Resolves solve()'s coefficients; if the realized ratio misses c by more
// than 3% the width is re-tuned by golden section and re-resolved. The
// final report is within 5% of c, or flagged unreachable with the closest
// achievable ratio.
SolveOutcome solve_resolved(const ShrinkFormula& formula, const ArchitectureSpec& spec,
                            double c);

struct GiantResult {
    ScalingCoefficients coeffs;
    ResolvedArchitecture arch;
    CostReport cost;
    double realized_ratio = 0.0;
};

// Comparison baseline: the compound-scaling rule run backwards,
// d = 1.2^-phi, w = 1.1^-phi, r = 1.15^-phi, targeting 2^-phi of the
// baseline FLOPs. Coefficients are kept at two-decimal granularity
// (matching how such scalings are published) and w is tuned on that grid
// to land nearest the target, ties toward the larger width.
GiantResult inversed_giant(const ArchitectureSpec& spec, double phi);

// {c, r, d, w, resolution, flops, params, stages:[...]} suitable as an
// architecture config for external training code.
std::string solve_outcome_to_json(const SolveOutcome& outcome, const ArchitectureSpec& spec,
                                  double c);

} // namespace netshrink
