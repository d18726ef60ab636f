#include "netshrink/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "netshrink/errors.hpp"
#include "netshrink/rng.hpp"

namespace netshrink {

void OracleConfig::validate() const {
    if (noise_sd < 0.0) throw domain_error("oracle: noise_sd must be >= 0");
}

double oracle_accuracy(const ExperimentRecord& record, const OracleConfig& cfg) {
    cfg.validate();
    if (record.flops == 0 || !(record.realized_ratio > 0.0))
        throw domain_error("oracle: record '" + record.id + "' has no cost data");

    const double ratio = record.realized_ratio;
    const double r = record.coeffs.r;
    const double w = record.coeffs.w;

    double acc = 0.82 - 0.04 * std::pow(ratio, -0.35);
    acc += 0.015 * std::exp(-(r - 1.1) * (r - 1.1) / 0.18);
    acc -= 0.01 * std::max(0.0, w - 1.0);
    if (cfg.noise_sd > 0.0) {
        Rng rng = Rng::substream(cfg.seed, fnv1a64(record.id));
        acc += rng.normal(0.0, cfg.noise_sd);
    }
    return std::clamp(acc, 0.0, 1.0);
}

void apply_oracle(RecordStore& store, const OracleConfig& cfg) {
    for (auto& rec : store.records()) rec.accuracy = oracle_accuracy(rec, cfg);
}

} // namespace netshrink
