#include "doctest.h"

#include <cmath>
#include <string>

#include "netshrink/arch.hpp"
#include "netshrink/errors.hpp"
#include "netshrink/oracle.hpp"
#include "netshrink/pareto.hpp"
#include "netshrink/search.hpp"

using namespace netshrink;

namespace {

ExperimentRecord fixture(std::string id, double ratio, double r, double w) {
    ExperimentRecord rec;
    rec.id = std::move(id);
    rec.coeffs = ScalingCoefficients{r, 1.0, w};
    rec.flops = static_cast<std::uint64_t>(ratio * 1e9);
    rec.realized_ratio = ratio;
    return rec;
}

} // namespace

TEST_CASE("noiseless oracle evaluates the fixture formula") {
    OracleConfig cfg;
    cfg.noise_sd = 0.0;
    // ratio=1, r=1.1, w=1: 0.82 - 0.04 + 0.015 = 0.795
    CHECK(oracle_accuracy(fixture("f0", 1.0, 1.1, 1.0), cfg) ==
          doctest::Approx(0.795).epsilon(1e-12));
    // Width above 1 pays the linear penalty.
    CHECK(oracle_accuracy(fixture("f1", 1.0, 1.1, 1.5), cfg) ==
          doctest::Approx(0.795 - 0.005).epsilon(1e-12));
    // General point, evaluated independently here.
    const double want = 0.82 - 0.04 * std::pow(0.5, -0.35) +
                        0.015 * std::exp(-(0.8 - 1.1) * (0.8 - 1.1) / 0.18);
    CHECK(oracle_accuracy(fixture("f2", 0.5, 0.8, 0.9), cfg) ==
          doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("oracle output is clamped to the unit interval") {
    OracleConfig cfg;
    cfg.noise_sd = 0.0;
    const double acc = oracle_accuracy(fixture("tiny", 1e-9, 0.35, 0.35), cfg);
    CHECK(acc == 0.0); // the saturating term diverges at ratio -> 0
}

TEST_CASE("same record and seed give identical noisy accuracy") {
    OracleConfig cfg;
    cfg.noise_sd = 0.01;
    cfg.seed = 7;
    const auto rec = fixture("s1", 0.4, 1.0, 1.0);
    const double a = oracle_accuracy(rec, cfg);
    CHECK(oracle_accuracy(rec, cfg) == a);

    // The noise is keyed by id, not position, so renaming changes it.
    auto renamed = rec;
    renamed.id = "s2";
    CHECK(oracle_accuracy(renamed, cfg) != a);

    cfg.seed = 8;
    CHECK(oracle_accuracy(rec, cfg) != a);
}

TEST_CASE("oracle config validation") {
    OracleConfig cfg;
    cfg.noise_sd = -0.1;
    CHECK_THROWS_AS(cfg.validate(), domain_error);
}

TEST_CASE("apply_oracle fills every record and is idempotent") {
    const ArchitectureSpec spec =
        load_spec(std::string(NETSHRINK_SPEC_DIR) + "/efficientnet-b0.json");
    SamplingConfig scfg;
    scfg.sample_count = 30;
    scfg.seed = 42;
    RecordStore store{sample_band(spec, scfg)};
    OracleConfig ocfg;
    ocfg.seed = 42;
    apply_oracle(store, ocfg);
    std::vector<double> first;
    for (const auto& rec : store.records()) {
        REQUIRE(rec.accuracy.has_value());
        CHECK(*rec.accuracy >= 0.0);
        CHECK(*rec.accuracy <= 1.0);
        first.push_back(*rec.accuracy);
    }
    apply_oracle(store, ocfg);
    for (std::size_t i = 0; i < first.size(); ++i)
        CHECK(*store.records()[i].accuracy == first[i]);
}

TEST_CASE("frontier statistics on oracle data rank resolution above width") {
    // The oracle's resolution bonus is an order of magnitude stronger than
    // its width penalty, so the Pareto frontier of a seeded population must
    // echo that: |spearman_r| ties resolution to the budget more tightly
    // than |spearman_w| ties width to it.
    const ArchitectureSpec spec =
        load_spec(std::string(NETSHRINK_SPEC_DIR) + "/efficientnet-b0.json");
    SamplingConfig scfg;
    scfg.sample_count = 100;
    scfg.seed = 42;
    RecordStore store{sample_band(spec, scfg)};
    OracleConfig ocfg;
    ocfg.seed = 42;
    apply_oracle(store, ocfg);

    const auto front = select_frontier(store.records(), 0.20);
    CHECK(front.members.size() == 20);
    const auto stats = frontier_stats(front, store.records());
    REQUIRE(stats.spearman_r.has_value());
    REQUIRE(stats.spearman_w.has_value());
    CHECK(*stats.spearman_r > *stats.spearman_w);
}
