#include "netshrink/pareto.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "netshrink/errors.hpp"

namespace netshrink {

bool dominates(const ExperimentRecord& a, const ExperimentRecord& b) {
    const double acc_a = a.accuracy.value();
    const double acc_b = b.accuracy.value();
    if (acc_a > acc_b && a.flops <= b.flops) return true;
    if (acc_a == acc_b && a.flops < b.flops) return true;
    return false;
}

std::vector<int> nondominated_sort(std::span<const ExperimentRecord> records) {
    std::string missing;
    for (const auto& rec : records)
        if (!rec.accuracy) missing += missing.empty() ? rec.id : ", " + rec.id;
    if (!missing.empty())
        throw domain_error("nondominated_sort: records missing accuracy: " + missing);

    const std::size_t n = records.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> dom_count(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(records[i], records[j])) {
                dominated[i].push_back(j);
            } else if (dominates(records[j], records[i])) {
                ++dom_count[i];
            }
        }

    std::vector<int> rank(n, 0);
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dom_count[i] == 0) {
            rank[i] = 1;
            current.push_back(i);
        }
    int front = 1;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated[i])
                if (--dom_count[j] == 0) {
                    rank[j] = front + 1;
                    next.push_back(j);
                }
        ++front;
        current = std::move(next);
    }
    return rank;
}

namespace {

// Crowding distance over (accuracy, flops), range-normalized per objective;
// boundary members get infinity.
std::vector<double> crowding_distance(const std::vector<ExperimentRecord>& records,
                                      const std::vector<std::size_t>& front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    const auto accumulate_objective = [&](auto key) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return key(records[front[a]]) < key(records[front[b]]);
        });
        const double lo = key(records[front[order.front()]]);
        const double hi = key(records[front[order.back()]]);
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        if (hi <= lo) return; // degenerate objective, boundary marks suffice
        for (std::size_t k = 1; k + 1 < n; ++k)
            dist[order[k]] += (key(records[front[order[k + 1]]]) -
                               key(records[front[order[k - 1]]])) /
                              (hi - lo);
    };
    accumulate_objective([](const ExperimentRecord& r) { return *r.accuracy; });
    accumulate_objective([](const ExperimentRecord& r) { return static_cast<double>(r.flops); });
    return dist;
}

} // namespace

ParetoFront select_frontier(const std::vector<ExperimentRecord>& records, double fraction) {
    if (records.empty()) throw domain_error("select_frontier: empty record list");
    if (!(fraction > 0.0) || fraction > 1.0)
        throw domain_error("select_frontier: fraction must lie in (0, 1]");

    ParetoFront result;
    result.fronts = nondominated_sort(records);
    const int max_front = *std::max_element(result.fronts.begin(), result.fronts.end());
    const std::size_t want =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(records.size())));

    const auto by_flops_then_id = [&](std::size_t a, std::size_t b) {
        if (records[a].flops != records[b].flops) return records[a].flops < records[b].flops;
        return records[a].id < records[b].id;
    };

    std::vector<std::size_t> selected;
    for (int f = 1; f <= max_front && selected.size() < want; ++f) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (result.fronts[i] == f) members.push_back(i);

        if (selected.size() + members.size() <= want) {
            std::sort(members.begin(), members.end(), by_flops_then_id);
            selected.insert(selected.end(), members.begin(), members.end());
            continue;
        }
        // Partial front: truncate by crowding distance, largest first.
        const std::vector<double> dist = crowding_distance(records, members);
        std::vector<std::size_t> order(members.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (dist[a] != dist[b]) return dist[a] > dist[b];
            return by_flops_then_id(members[a], members[b]);
        });
        std::vector<std::size_t> kept;
        for (std::size_t k = 0; k < order.size() && selected.size() + kept.size() < want; ++k)
            kept.push_back(members[order[k]]);
        std::sort(kept.begin(), kept.end(), by_flops_then_id);
        selected.insert(selected.end(), kept.begin(), kept.end());
    }

    result.members.reserve(selected.size());
    for (std::size_t i : selected) result.members.push_back(records[i].id);
    return result;
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw domain_error("spearman: length mismatch");
    if (xs.size() < 2)
        throw domain_error("spearman: need at least 2 pairs");
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    const std::size_t n = rx.size();
    const double mean = (static_cast<double>(n) + 1.0) / 2.0;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt; // degenerate: zero rank variance
    return sxy / std::sqrt(sxx * syy);
}

FrontierStats frontier_stats(const ParetoFront& front,
                             const std::vector<ExperimentRecord>& records) {
    if (front.members.empty()) throw domain_error("frontier_stats: empty frontier");
    std::vector<double> ratio, r, d, w;
    for (const auto& id : front.members) {
        const auto it = std::find_if(records.begin(), records.end(),
                                     [&](const ExperimentRecord& rec) { return rec.id == id; });
        if (it == records.end())
            throw domain_error("frontier_stats: unknown frontier member id: " + id);
        ratio.push_back(it->realized_ratio);
        r.push_back(it->coeffs.r);
        d.push_back(it->coeffs.d);
        w.push_back(it->coeffs.w);
    }
    FrontierStats stats;
    stats.spearman_r = spearman(r, ratio);
    stats.spearman_d = spearman(d, ratio);
    stats.spearman_w = spearman(w, ratio);
    return stats;
}

std::string frontier_stats_to_json(const FrontierStats& stats) {
    nlohmann::ordered_json j;
    const auto put = [&](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
        else
            j[key] = nullptr;
    };
    put("spearman_r", stats.spearman_r);
    put("spearman_d", stats.spearman_d);
    put("spearman_w", stats.spearman_w);
    return j.dump(2) + "\n";
}

} // namespace netshrink
