#pragma once

#include <cstdint>

#include "netshrink/search.hpp"

namespace netshrink {

// Synthetic stand-in for a real training run, used by the desk-scale demo
// pipeline. The functional form rewards keeping resolution near the
// baseline and mildly penalizes width, so frontier statistics on oracle
// data have a meaningful ordering to detect. Constants are fixtures, not
// measured ground truth, and every consumer labels the output synthetic.
struct OracleConfig {
    double noise_sd = 0.003;
    std::uint64_t seed = 0;

    void validate() const;
};

// accuracy = clamp(0.82 - 0.04 * ratio^-0.35
//                  + 0.015 * exp(-(r - 1.1)^2 / 0.18)
//                  - 0.01 * max(0, w - 1)
//                  + N(0, noise_sd), 0, 1)
// Noise is drawn from a substream keyed by (seed, record id), so the same
// record and seed always produce the same accuracy.
double oracle_accuracy(const ExperimentRecord& record, const OracleConfig& cfg);

// Fills (or refreshes) every record's accuracy deterministically.
void apply_oracle(RecordStore& store, const OracleConfig& cfg);

} // namespace netshrink
