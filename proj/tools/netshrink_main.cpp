// netshrink: shrink a convolutional architecture to a FLOPs budget.
//
// Pipeline: sample -> oracle (or ingest real accuracies) -> pareto -> fit
// -> solve. `estimate` and `report` are standalone helpers. Exit codes:
// 0 success, 1 domain error, 2 bad input / parse error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "netshrink/arch.hpp"
#include "netshrink/errors.hpp"
#include "netshrink/formula.hpp"
#include "netshrink/gpr.hpp"
#include "netshrink/oracle.hpp"
#include "netshrink/pareto.hpp"
#include "netshrink/report.hpp"
#include "netshrink/search.hpp"

namespace fs = std::filesystem;
using namespace netshrink;

namespace {

ArchitectureSpec require_spec(const std::string& path) {
    if (!fs::exists(path))
        throw input_error("spec file not found: " + path);
    return load_spec(path);
}

RecordStore require_store(const std::string& path, const std::string& prior_cmd) {
    if (!fs::exists(path))
        throw input_error("store not found: " + path + " (run `netshrink " + prior_cmd +
                          "` first)");
    return load_store(path);
}

void write_text(const std::string& path, const std::string& text) {
    if (const fs::path dir = fs::path(path).parent_path(); !dir.empty())
        fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write: " + path);
    out << text;
}

struct FitPaths {
    std::string model_r;
    std::string model_d;
};

FitPaths fit_paths(const std::string& dir) {
    return {(fs::path(dir) / "model_r.json").string(),
            (fs::path(dir) / "model_d.json").string()};
}

int run(int argc, char** argv) {
    CLI::App app{"Analytic FLOPs costing and budget-driven shrinking of CNN architectures"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string store_path = "store.csv";
    std::uint64_t seed = 0;
    std::string out;
    app.add_option("--spec", spec_path, "architecture spec JSON")->configurable(false);
    app.add_option("--store", store_path, "experiment store CSV");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--out", out, "output file or directory");

    // estimate
    auto* est = app.add_subcommand("estimate", "cost one (r,d,w) scaling of a spec");
    double est_r = 1.0, est_d = 1.0, est_w = 1.0;
    est->add_option("-r,--resolution", est_r, "resolution multiplier");
    est->add_option("-d,--depth", est_d, "depth multiplier");
    est->add_option("-w,--width", est_w, "width multiplier");

    // sample
    auto* smp = app.add_subcommand("sample", "draw scalings inside a FLOPs band or at a target");
    int count = 100;
    double band_low = 0.03, band_high = 1.05, tolerance = 0.03;
    double target = -1.0;
    smp->add_option("-n,--count", count, "number of samples");
    smp->add_option("--band-low", band_low, "lower realized-ratio bound");
    smp->add_option("--band-high", band_high, "upper realized-ratio bound");
    smp->add_option("--target", target, "target realized ratio (switches to targeted mode)");
    smp->add_option("--tolerance", tolerance, "relative tolerance at the target");

    // oracle
    auto* orc = app.add_subcommand("oracle",
                                   "fill accuracies from the synthetic oracle (demo data, "
                                   "not measured)");
    double noise_sd = 0.003;
    orc->add_option("--noise-sd", noise_sd, "oracle noise standard deviation");

    // ingest
    auto* ing = app.add_subcommand("ingest", "merge accuracy rows from a CSV into the store");
    std::string csv_path;
    ing->add_option("--csv", csv_path, "CSV with id,...,accuracy rows")->required();

    // pareto
    auto* par = app.add_subcommand("pareto", "select the accuracy/FLOPs Pareto frontier");
    double fraction = 0.20;
    par->add_option("--fraction", fraction, "fraction of records to keep");

    // fit
    auto* fit = app.add_subcommand("fit", "fit c->r and c->d regressors on the frontier");
    fit->add_option("--fraction", fraction, "frontier fraction");

    // solve
    auto* slv = app.add_subcommand("solve", "emit shrunk architectures for FLOPs budgets");
    std::vector<double> budgets{0.9, 0.5, 0.25, 0.13, 0.06};
    std::string models_dir;
    slv->add_option("-c,--budgets", budgets, "reduction factors in (0,1)");
    slv->add_option("--models", models_dir, "directory holding model_r.json / model_d.json");

    // report
    auto* rep = app.add_subcommand("report", "write plot-ready CSVs and Spearman stats");
    rep->add_option("--fraction", fraction, "frontier fraction");

    CLI11_PARSE(app, argc, argv);

    if (est->parsed()) {
        const ArchitectureSpec spec = require_spec(spec_path);
        const ScalingCoefficients coeffs{est_r, est_d, est_w};
        const ResolvedArchitecture arch = resolve(spec, coeffs);
        const CostReport report = cost(arch, spec);
        SolveOutcome outcome;
        outcome.coeffs = coeffs;
        outcome.arch = arch;
        outcome.cost = report;
        outcome.realized_ratio = flops_ratio(spec, coeffs);
        const std::string text =
            solve_outcome_to_json(outcome, spec, outcome.realized_ratio);
        if (out.empty())
            std::cout << text;
        else
            write_text(out, text);
        return 0;
    }

    if (smp->parsed()) {
        const ArchitectureSpec spec = require_spec(spec_path);
        SamplingConfig cfg;
        cfg.sample_count = count;
        cfg.seed = seed;
        cfg.band_low = band_low;
        cfg.band_high = band_high;
        cfg.tolerance = tolerance;
        if (target > 0.0) cfg.target_ratio = target;
        const auto records =
            cfg.target_ratio ? sample_at_target(spec, cfg) : sample_band(spec, cfg);
        save_store(RecordStore{records}, store_path);
        std::cout << "wrote " << records.size() << " samples to " << store_path << "\n";
        return 0;
    }

    if (orc->parsed()) {
        RecordStore store = require_store(store_path, "sample");
        OracleConfig cfg;
        cfg.noise_sd = noise_sd;
        cfg.seed = seed;
        cfg.validate();
        apply_oracle(store, cfg);
        save_store(store, store_path);
        std::cout << "synthetic oracle labeled " << store.records().size() << " records in "
                  << store_path << "\n";
        return 0;
    }

    if (ing->parsed()) {
        RecordStore store = require_store(store_path, "sample");
        std::ifstream in(csv_path);
        if (!in) throw input_error("cannot open CSV: " + csv_path);
        ingest(store, in);
        save_store(store, store_path);
        std::cout << "ingested " << csv_path << " into " << store_path << "\n";
        return 0;
    }

    if (par->parsed()) {
        const RecordStore store = require_store(store_path, "sample");
        const ParetoFront front = select_frontier(store.records(), fraction);
        const FrontierStats stats = frontier_stats(front, store.records());
        std::string text = "{\n  \"members\": [";
        for (std::size_t i = 0; i < front.members.size(); ++i)
            text += (i ? ", \"" : "\"") + front.members[i] + "\"";
        text += "],\n  \"stats\": " + frontier_stats_to_json(stats) + "\n}\n";
        if (out.empty())
            std::cout << text;
        else
            write_text(out, text);
        return 0;
    }

    if (fit->parsed()) {
        const RecordStore store = require_store(store_path, "oracle");
        const ParetoFront front = select_frontier(store.records(), fraction);
        if (front.members.size() < 4)
            throw domain_error("fit needs at least 4 frontier records (have " +
                               std::to_string(front.members.size()) +
                               "); sample and label more data first");
        std::vector<double> cs, rs, ds;
        for (const auto& rec : store.records()) {
            if (std::find(front.members.begin(), front.members.end(), rec.id) ==
                front.members.end())
                continue;
            cs.push_back(rec.realized_ratio);
            rs.push_back(rec.coeffs.r);
            ds.push_back(rec.coeffs.d);
        }
        const std::string dir = out.empty() ? "." : out;
        fs::create_directories(dir);
        const FitPaths paths = fit_paths(dir);
        const HyperparamFit hp_r = fit_hyperparameters(cs, rs);
        GprModel model_r = GprModel::fit(cs, rs, hp_r.kernel, hp_r.noise_variance);
        model_r.set_target_name("r");
        model_r.save(paths.model_r);
        const HyperparamFit hp_d = fit_hyperparameters(cs, ds);
        GprModel model_d = GprModel::fit(cs, ds, hp_d.kernel, hp_d.noise_variance);
        model_d.set_target_name("d");
        model_d.save(paths.model_d);
        std::cout << "fitted " << cs.size() << " frontier records -> " << paths.model_r
                  << ", " << paths.model_d << "\n";
        return 0;
    }

    if (slv->parsed()) {
        const ArchitectureSpec spec = require_spec(spec_path);
        const FitPaths paths = fit_paths(models_dir.empty() ? "." : models_dir);
        if (!fs::exists(paths.model_r) || !fs::exists(paths.model_d))
            throw input_error("regression models not found in '" +
                              (models_dir.empty() ? std::string(".") : models_dir) +
                              "' (run `netshrink fit` first)");
        ShrinkFormula formula;
        formula.model_r = GprModel::load(paths.model_r);
        formula.model_d = GprModel::load(paths.model_d);
        const std::string dir = out.empty() ? "." : out;
        fs::create_directories(dir);
        for (double c : budgets) {
            const SolveOutcome outcome = solve_resolved(formula, spec, c);
            char name[32];
            std::snprintf(name, sizeof(name), "arch-c%.2f.json", c);
            const std::string path = (fs::path(dir) / name).string();
            write_text(path, solve_outcome_to_json(outcome, spec, c));
            std::cout << path << ": flops=" << outcome.cost.flops
                      << " ratio=" << outcome.realized_ratio
                      << (outcome.unreachable ? " (unreachable budget)" : "") << "\n";
        }
        return 0;
    }

    if (rep->parsed()) {
        const RecordStore store = require_store(store_path, "oracle");
        const std::string dir = out.empty() ? "report" : out;
        write_reports(store, dir, fraction);
        std::cout << "reports written to " << dir << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
