#include "netshrink/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "netshrink/errors.hpp"
#include "netshrink/pareto.hpp"

namespace netshrink {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw input_error("cannot write report file: " + p.string());
    return out;
}

} // namespace

void write_reports(const RecordStore& store, const std::string& out_dir, double fraction) {
    const auto& records = store.records();
    if (records.empty()) throw domain_error("report: record store is empty");
    for (const auto& rec : records)
        if (!rec.accuracy)
            throw domain_error("report: record '" + rec.id +
                               "' has no accuracy yet; run the oracle or ingest results first");

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    {
        auto out = open_out(dir / "acc_vs_flops.csv");
        out << "id,flops,accuracy\n";
        for (const auto& rec : records)
            out << rec.id << ',' << rec.flops << ',' << fmt(*rec.accuracy) << '\n';
    }

    const ParetoFront front = select_frontier(records, fraction);
    const auto write_frontier_csv = [&](const char* file, const char* column, auto key) {
        auto out = open_out(dir / file);
        out << "id,ratio," << column << "\n";
        for (const auto& id : front.members) {
            const auto it = std::find_if(records.begin(), records.end(),
                                         [&](const ExperimentRecord& r) { return r.id == id; });
            out << id << ',' << fmt(it->realized_ratio) << ',' << fmt(key(*it)) << '\n';
        }
    };
    write_frontier_csv("frontier_r_vs_ratio.csv", "r",
                       [](const ExperimentRecord& r) { return r.coeffs.r; });
    write_frontier_csv("frontier_d_vs_ratio.csv", "d",
                       [](const ExperimentRecord& r) { return r.coeffs.d; });
    write_frontier_csv("frontier_w_vs_ratio.csv", "w",
                       [](const ExperimentRecord& r) { return r.coeffs.w; });

    auto out = open_out(dir / "spearman.json");
    out << frontier_stats_to_json(frontier_stats(front, records));
}

} // namespace netshrink
