#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "netshrink/arch.hpp"

namespace netshrink {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct SamplingConfig {
    Interval r_range{0.35, 2.8};
    Interval d_range{0.35, 2.8};
    Interval w_range{0.35, 2.8};
    double band_low = 0.03;
    double band_high = 1.05;
    std::optional<double> target_ratio; // enables sample_at_target
    double tolerance = 0.03;            // relative FLOPs tolerance at target
    int sample_count = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ExperimentRecord {
    std::string id;
    ScalingCoefficients coeffs;
    std::uint64_t flops = 0;
    std::uint64_t params = 0;
    double realized_ratio = 0.0;
    std::optional<double> accuracy; // absent until trained / oracled
};

// Total rejection-sampling budget shared by all slots of one call.
inline constexpr std::uint64_t kRetryBudget = 1'000'000;

// Uniform (r,d,w) draws rejected outside [band_low, band_high] realized
// ratio. Slot i draws from an independent substream of the seed, so the
// result is reproducible and order-independent.
std::vector<ExperimentRecord> sample_band(const ArchitectureSpec& spec,
                                          const SamplingConfig& cfg);

// Draws r and d, seeds w at sqrt(t / (d r^2)) and then tunes it by golden
// section until the realized ratio is within cfg.tolerance of the target.
std::vector<ExperimentRecord> sample_at_target(const ArchitectureSpec& spec,
                                               const SamplingConfig& cfg);

// Golden-section search on the width multiplier, minimizing
// |flops_ratio - target| over [0.7, 1.3] * w0 clipped to [w_lo, w_hi].
// Returns the best (w, realized_ratio) seen. The realized ratio is
// piecewise-constant in w, so a tolerance band is the caller's stopping
// rule, not exact equality.
std::pair<double, double> tune_width(const ArchitectureSpec& spec, double r, double d,
                                     double w0, double target_ratio,
                                     double w_lo = 1e-6, double w_hi = 1e6);

// Persistent record store, CSV header: id,r,d,w,flops,params,ratio,accuracy
// (accuracy blank when pending; UTF-8, LF, full decimal precision).
class RecordStore {
public:
    RecordStore() = default;
    explicit RecordStore(std::vector<ExperimentRecord> records);

    const std::vector<ExperimentRecord>& records() const { return records_; }
    std::vector<ExperimentRecord>& records() { return records_; }
    ExperimentRecord* find(const std::string& id);

    // Appends a record; duplicate id is rejected.
    void append(ExperimentRecord rec);

private:
    std::vector<ExperimentRecord> records_;
};

RecordStore load_store(const std::string& path);
void save_store(const RecordStore& store, const std::string& path);

RecordStore store_from_csv(std::istream& in);
void store_to_csv(const RecordStore& store, std::ostream& out);

// Merges CSV rows into the store: accuracy values are attached to matching
// ids, unseen ids become new records. A duplicate id with conflicting
// coefficients is an error; re-ingesting identical rows is a no-op.
void ingest(RecordStore& store, std::istream& csv);

} // namespace netshrink
