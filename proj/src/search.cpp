#include "netshrink/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "netshrink/errors.hpp"
#include "netshrink/rng.hpp"

namespace netshrink {

namespace {

void check_range(const Interval& range, const char* name) {
    if (!(range.lo > 0.0) || range.hi < range.lo)
        throw domain_error(std::string("invalid ") + name + " coefficient range");
}

std::string make_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%06d", index);
    return buf;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

} // namespace

void SamplingConfig::validate() const {
    check_range(r_range, "r");
    check_range(d_range, "d");
    check_range(w_range, "w");
    if (!(band_low > 0.0) || !(band_low < band_high))
        throw domain_error("need 0 < band_low < band_high");
    if (!(tolerance > 0.0) || tolerance > 0.1)
        throw domain_error("tolerance must lie in (0, 0.1]");
    if (sample_count <= 0)
        throw domain_error("sample_count must be positive");
    if (target_ratio && !(*target_ratio > 0.0))
        throw domain_error("target_ratio must be positive");
}

std::pair<double, double> tune_width(const ArchitectureSpec& spec, double r, double d,
                                     double w0, double target_ratio,
                                     double w_lo, double w_hi) {
    const auto ratio_at = [&](double w) {
        return flops_ratio(spec, ScalingCoefficients{r, d, w});
    };

    double a = std::max(w_lo, 0.7 * w0);
    double b = std::min(w_hi, 1.3 * w0);
    if (!(a < b)) a = b = std::clamp(w0, w_lo, w_hi);

    double best_w = std::clamp(w0, a, b);
    double best_ratio = ratio_at(best_w);
    double best_err = std::abs(best_ratio - target_ratio);

    const auto consider = [&](double w, double ratio) {
        const double err = std::abs(ratio - target_ratio);
        if (err < best_err) {
            best_err = err;
            best_w = w;
            best_ratio = ratio;
        }
    };

    constexpr double kInvPhi = 0.6180339887498949; // (sqrt(5)-1)/2
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = ratio_at(x1);
    double f2 = ratio_at(x2);
    consider(x1, f1);
    consider(x2, f2);
    for (int it = 0; it < 40; ++it) {
        if (std::abs(f1 - target_ratio) < std::abs(f2 - target_ratio)) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = ratio_at(x1);
            consider(x1, f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = ratio_at(x2);
            consider(x2, f2);
        }
    }
    return {best_w, best_ratio};
}

namespace {

ExperimentRecord make_record(const ArchitectureSpec& spec, int index,
                             const ScalingCoefficients& coeffs, std::uint64_t base_flops) {
    const CostReport report = cost(resolve(spec, coeffs), spec);
    ExperimentRecord rec;
    rec.id = make_id(index);
    rec.coeffs = coeffs;
    rec.flops = report.flops;
    rec.params = report.params;
    rec.realized_ratio = static_cast<double>(report.flops) / static_cast<double>(base_flops);
    return rec;
}

} // namespace

std::vector<ExperimentRecord> sample_band(const ArchitectureSpec& spec,
                                          const SamplingConfig& cfg) {
    cfg.validate();
    spec.validate();
    const std::uint64_t base_flops = cost(resolve(spec, ScalingCoefficients{}), spec).flops;

    std::vector<ExperimentRecord> out;
    out.reserve(cfg.sample_count);
    std::uint64_t draws = 0;
    for (int i = 0; i < cfg.sample_count; ++i) {
        Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i));
        for (;;) {
            if (++draws > kRetryBudget)
                throw domain_error(
                    "sample_band: retry budget (1e6 draws) exhausted before " +
                    std::to_string(cfg.sample_count) + " samples landed in the FLOPs band [" +
                    std::to_string(cfg.band_low) + ", " + std::to_string(cfg.band_high) + "]");
            ScalingCoefficients coeffs{rng.uniform(cfg.r_range.lo, cfg.r_range.hi),
                                       rng.uniform(cfg.d_range.lo, cfg.d_range.hi),
                                       rng.uniform(cfg.w_range.lo, cfg.w_range.hi)};
            ExperimentRecord rec = make_record(spec, i, coeffs, base_flops);
            if (rec.realized_ratio >= cfg.band_low && rec.realized_ratio <= cfg.band_high) {
                out.push_back(std::move(rec));
                break;
            }
        }
    }
    return out;
}

std::vector<ExperimentRecord> sample_at_target(const ArchitectureSpec& spec,
                                               const SamplingConfig& cfg) {
    cfg.validate();
    spec.validate();
    if (!cfg.target_ratio)
        throw domain_error("sample_at_target requires a target_ratio");
    const double t = *cfg.target_ratio;
    const std::uint64_t base_flops = cost(resolve(spec, ScalingCoefficients{}), spec).flops;

    std::vector<ExperimentRecord> out;
    out.reserve(cfg.sample_count);
    std::uint64_t draws = 0;
    for (int i = 0; i < cfg.sample_count; ++i) {
        Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i));
        for (;;) {
            if (++draws > kRetryBudget)
                throw domain_error(
                    "sample_at_target: retry budget (1e6 draws) exhausted before " +
                    std::to_string(cfg.sample_count) + " samples hit the target ratio " +
                    std::to_string(t));
            const double r = rng.uniform(cfg.r_range.lo, cfg.r_range.hi);
            const double d = rng.uniform(cfg.d_range.lo, cfg.d_range.hi);
            const double w0 = std::sqrt(t / (d * r * r));
            if (w0 < cfg.w_range.lo || w0 > cfg.w_range.hi) continue;
            const auto [w, ratio] = tune_width(spec, r, d, w0, t, cfg.w_range.lo, cfg.w_range.hi);
            if (std::abs(ratio - t) / t <= cfg.tolerance) {
                out.push_back(make_record(spec, i, ScalingCoefficients{r, d, w}, base_flops));
                break;
            }
        }
    }
    return out;
}

RecordStore::RecordStore(std::vector<ExperimentRecord> records)
    : records_(std::move(records)) {
    std::unordered_set<std::string> seen;
    for (const auto& rec : records_)
        if (!seen.insert(rec.id).second)
            throw domain_error("duplicate record id: " + rec.id);
}

ExperimentRecord* RecordStore::find(const std::string& id) {
    for (auto& rec : records_)
        if (rec.id == id) return &rec;
    return nullptr;
}

void RecordStore::append(ExperimentRecord rec) {
    if (find(rec.id)) throw domain_error("duplicate record id: " + rec.id);
    records_.push_back(std::move(rec));
}

namespace {

constexpr const char* kCsvHeader = "id,r,d,w,flops,params,ratio,accuracy";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("CSV line " + std::to_string(line_no) + ": bad " + what + " value '" +
                          s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error("CSV line " + std::to_string(line_no) + ": bad " + what + " value '" +
                          s + "'");
    }
}

ExperimentRecord parse_record_row(const std::vector<std::string>& f, int line_no) {
    ExperimentRecord rec;
    rec.id = f[0];
    if (rec.id.empty())
        throw input_error("CSV line " + std::to_string(line_no) + ": empty id");
    rec.coeffs.r = parse_double(f[1], line_no, "r");
    rec.coeffs.d = parse_double(f[2], line_no, "d");
    rec.coeffs.w = parse_double(f[3], line_no, "w");
    rec.flops = parse_u64(f[4], line_no, "flops");
    rec.params = parse_u64(f[5], line_no, "params");
    rec.realized_ratio = parse_double(f[6], line_no, "ratio");
    if (!f[7].empty()) {
        const double acc = parse_double(f[7], line_no, "accuracy");
        if (acc < 0.0 || acc > 1.0)
            throw input_error("CSV line " + std::to_string(line_no) +
                              ": accuracy must lie in [0,1], got " + f[7]);
        rec.accuracy = acc;
    }
    return rec;
}

bool same_coefficients(const ExperimentRecord& a, const ExperimentRecord& b) {
    return a.coeffs.r == b.coeffs.r && a.coeffs.d == b.coeffs.d && a.coeffs.w == b.coeffs.w;
}

} // namespace

RecordStore store_from_csv(std::istream& in) {
    RecordStore store;
    ingest(store, in);
    return store;
}

void store_to_csv(const RecordStore& store, std::ostream& out) {
    out << kCsvHeader << "\n";
    for (const auto& rec : store.records()) {
        out << rec.id << ',' << fmt_double(rec.coeffs.r) << ',' << fmt_double(rec.coeffs.d)
            << ',' << fmt_double(rec.coeffs.w) << ',' << rec.flops << ',' << rec.params << ','
            << fmt_double(rec.realized_ratio) << ',';
        if (rec.accuracy) out << fmt_double(*rec.accuracy);
        out << '\n';
    }
}

void ingest(RecordStore& store, std::istream& csv) {
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(csv, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() >= 1 && fields[0] == "id") continue; // header row
        }
        if (fields.size() != 8)
            throw input_error("CSV line " + std::to_string(line_no) + ": expected 8 fields, got " +
                              std::to_string(fields.size()));
        ExperimentRecord rec = parse_record_row(fields, line_no);
        if (ExperimentRecord* existing = store.find(rec.id)) {
            if (!same_coefficients(*existing, rec))
                throw input_error("ingest: record '" + rec.id +
                                  "' already exists with different coefficients");
            if (rec.accuracy) existing->accuracy = rec.accuracy;
        } else {
            store.append(std::move(rec));
        }
    }
}

RecordStore load_store(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open record store: " + path);
    return store_from_csv(in);
}

void save_store(const RecordStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // LF line endings everywhere
    if (!out) throw input_error("cannot write record store: " + path);
    store_to_csv(store, out);
}

} // namespace netshrink
