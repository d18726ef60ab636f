#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "netshrink/arch.hpp"
#include "netshrink/errors.hpp"
#include "netshrink/formula.hpp"

using namespace netshrink;

namespace {

ArchitectureSpec b0() { return load_spec(std::string(NETSHRINK_SPEC_DIR) + "/efficientnet-b0.json"); }

// A noiseless fit interpolates its training set, so tabulating f on a grid
// pins the posterior mean at the grid points (and keeps it smooth between).
GprModel model_of(const std::function<double(double)>& f) {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 40; ++i) {
        const double c = 0.02 + (1.0 - 0.02) * i / 40.0;
        xs.push_back(c);
        ys.push_back(f(c));
    }
    return GprModel::fit(xs, ys, Kernel{0.25, 1.0}, 1e-10);
}

ShrinkFormula cube_root_formula() {
    ShrinkFormula formula;
    formula.model_r = model_of([](double c) { return std::pow(c, 1.0 / 3.0); });
    formula.model_d = model_of([](double c) { return std::pow(c, 1.0 / 3.0); });
    return formula;
}

} // namespace

TEST_CASE("width follows the FLOPs constraint algebra") {
    ShrinkFormula formula;
    formula.model_r = model_of([](double) { return 1.0; });
    formula.model_d = model_of([](double) { return 1.0; });

    // r = d = 1 reduces the constraint to w = sqrt(c).
    const auto at81 = solve(formula, 0.81);
    CHECK(at81.r == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(at81.d == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(at81.w == doctest::Approx(0.9).epsilon(1e-6));

    ShrinkFormula skewed;
    skewed.model_r = model_of([](double) { return 0.8; });
    skewed.model_d = model_of([](double) { return 1.0; });
    const auto at50 = solve(skewed, 0.5);
    CHECK(at50.w == doctest::Approx(std::sqrt(0.5 / 0.64)).epsilon(1e-6)); // 0.8839...
}

TEST_CASE("the constraint identity r^2 d w^2 = c holds to rounding error") {
    const ShrinkFormula formula = cube_root_formula();
    for (int i = 0; i < 1000; ++i) {
        const double c = 0.01 + 0.98 * i / 999.0;
        const auto coeffs = solve(formula, c);
        CHECK(coeffs.r * coeffs.r * coeffs.d * coeffs.w * coeffs.w ==
              doctest::Approx(c).epsilon(1e-12));
        CHECK(coeffs.r >= 0.35);
        CHECK(coeffs.r <= 2.8);
        CHECK(coeffs.d >= 0.35);
        CHECK(coeffs.d <= 2.8);
    }
}

TEST_CASE("solve rejects reduction factors outside (0, 1)") {
    const ShrinkFormula formula = cube_root_formula();
    for (double c : {0.0, 1.0, -0.5, 1.2, std::nan("")})
        CHECK_THROWS_AS((void)solve(formula, c), domain_error);
}

TEST_CASE("posterior means outside the sampling range are clamped before solving") {
    ShrinkFormula formula;
    formula.model_r = model_of([](double) { return 10.0; }); // wildly out of range
    formula.model_d = model_of([](double) { return 0.01; });
    const auto coeffs = solve(formula, 0.5);
    CHECK(coeffs.r == doctest::Approx(2.8).epsilon(1e-9));
    CHECK(coeffs.d == doctest::Approx(0.35).epsilon(1e-9));
    CHECK(coeffs.w == doctest::Approx(std::sqrt(0.5 / (2.8 * 2.8 * 0.35))).epsilon(1e-9));
}

TEST_CASE("resolved budgets land within five percent across the default sweep") {
    const ArchitectureSpec spec = b0();
    const ShrinkFormula formula = cube_root_formula();
    std::uint64_t prev = cost(resolve(spec, ScalingCoefficients{}), spec).flops;
    for (double c : {0.9, 0.5, 0.25, 0.13, 0.06}) {
        const auto outcome = solve_resolved(formula, spec, c);
        CHECK(!outcome.unreachable);
        CHECK(std::abs(outcome.realized_ratio - c) / c <= 0.05);
        CHECK(cost(resolve(spec, outcome.coeffs), spec).flops == outcome.cost.flops);
        CHECK(outcome.cost.flops < prev); // smaller budget => smaller network
        prev = outcome.cost.flops;
    }
}

TEST_CASE("budgets below the discretization floor are flagged unreachable") {
    const ArchitectureSpec spec = b0();
    const ShrinkFormula formula = cube_root_formula();
    const auto outcome = solve_resolved(formula, spec, 0.001);
    CHECK(outcome.unreachable);
    CHECK(outcome.closest_ratio > 0.001 * 1.05);
    CHECK(outcome.closest_ratio == outcome.realized_ratio);
}

TEST_CASE("inversed giant formula at phi zero is the identity") {
    const ArchitectureSpec spec = b0();
    const auto res = inversed_giant(spec, 0.0);
    CHECK(res.coeffs.r == 1.0);
    CHECK(res.coeffs.d == 1.0);
    CHECK(res.coeffs.w == 1.0);
    CHECK(res.realized_ratio == 1.0);
    CHECK(res.cost.flops == cost(resolve(spec, ScalingCoefficients{}), spec).flops);
}

TEST_CASE("inversed giant coefficients follow the published grid") {
    const ArchitectureSpec spec = b0();
    const auto res = inversed_giant(spec, 1.0);
    CHECK(res.coeffs.r == doctest::Approx(0.87).epsilon(1e-12)); // round2(1.15^-1)
    CHECK(res.coeffs.d == doctest::Approx(0.83).epsilon(1e-12)); // round2(1.2^-1)
    // Width stays on the two-decimal grid.
    CHECK(res.coeffs.w * 100.0 == doctest::Approx(std::round(res.coeffs.w * 100.0)).epsilon(1e-9));
    CHECK(std::abs(res.realized_ratio - 0.5) / 0.5 <= 0.05);
}

TEST_CASE("inversed giant budgets halve with each phi step") {
    const ArchitectureSpec spec = b0();
    double prev = 2.0;
    for (double phi : {1.0, 2.0, 3.0, 4.0}) {
        const auto res = inversed_giant(spec, phi);
        const double target = std::pow(2.0, -phi);
        CHECK(std::abs(res.realized_ratio - target) / target <= 0.07);
        CHECK(res.realized_ratio < prev);
        prev = res.realized_ratio;
    }
    CHECK_THROWS_AS((void)inversed_giant(spec, -1.0), domain_error);
}

TEST_CASE("solve outcome serializes a complete architecture config") {
    const ArchitectureSpec spec = b0();
    const ShrinkFormula formula = cube_root_formula();
    const auto outcome = solve_resolved(formula, spec, 0.25);
    const std::string json = solve_outcome_to_json(outcome, spec, 0.25);
    CHECK(json.find("\"c\": 0.25") != std::string::npos);
    CHECK(json.find("\"resolution\"") != std::string::npos);
    CHECK(json.find("\"stages\"") != std::string::npos);
    CHECK(json.find("\"unreachable_budget\"") == std::string::npos);

    const auto bad = solve_resolved(formula, spec, 0.001);
    const std::string bad_json = solve_outcome_to_json(bad, spec, 0.001);
    CHECK(bad_json.find("\"unreachable_budget\": true") != std::string::npos);
}
