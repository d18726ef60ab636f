#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netshrink/search.hpp"

namespace netshrink {

// Dominance order: maximize accuracy, minimize FLOPs. a dominates b iff
// acc(a) >= acc(b) and flops(a) <= flops(b) with at least one strict.
bool dominates(const ExperimentRecord& a, const ExperimentRecord& b);

// Fast nondominated sorting (dominance counts + dominated lists). Returns a
// 1-based front rank per input record; rank 1 is the nondominated set.
// Records with missing accuracy are rejected, their ids listed.
std::vector<int> nondominated_sort(std::span<const ExperimentRecord> records);

struct ParetoFront {
    std::vector<std::string> members; // selected ids: front rank, flops asc, id asc
    std::vector<int> fronts;          // rank per input record, aligned with input order
};

// Accumulates whole fronts until ceil(fraction * n) records are covered;
// the last partially included front is truncated by crowding distance
// (largest first), ties by lower flops then id.
ParetoFront select_frontier(const std::vector<ExperimentRecord>& records,
                            double fraction = 0.20);

// Spearman rank correlation with average ranks for ties. nullopt signals a
// degenerate input (zero rank variance), which is distinct from 0.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

struct FrontierStats {
    std::optional<double> spearman_r;
    std::optional<double> spearman_d;
    std::optional<double> spearman_w;
};

// Per-dimension Spearman of {r,d,w} against realized ratio over the
// frontier members.
FrontierStats frontier_stats(const ParetoFront& front,
                             const std::vector<ExperimentRecord>& records);

// {spearman_r, spearman_d, spearman_w}; degenerate entries serialize as null.
std::string frontier_stats_to_json(const FrontierStats& stats);

} // namespace netshrink
