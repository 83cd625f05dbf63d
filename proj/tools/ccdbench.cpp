#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccdkit/bench.hpp"

namespace {

std::vector<double> parse_fractions(const std::string& csv)
{
    std::vector<double> fractions;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ','))
        fractions.push_back(std::stod(item));
    return fractions;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "ccdbench: conservative CCD benchmark and audit harness" };

    std::vector<std::string> t0_paths, t1_paths, method_names;
    std::string manifest_path, format = "csv", out_path, scaling_csv;
    double delta = 1e-6, min_sep_fraction = -1.0;
    std::size_t memory_budget = 0;
    unsigned threads = 1;
    std::uint64_t seed = 1;
    bool oracle = false, no_zero_toi = false, no_timing = false;

    app.add_option("--t0", t0_paths, "OBJ file at t=0 (repeatable)");
    app.add_option("--t1", t1_paths, "OBJ file at t=1 (repeatable, pairs with --t0)");
    app.add_option("--manifest", manifest_path,
                   "JSON manifest: array of {\"t0\", \"t1\"} path pairs");
    app.add_option("--method", method_names, "Broad phase: stq|bf|sap (repeatable)")
        ->check(CLI::IsMember({ "stq", "bf", "sap" }));
    app.add_option("--delta", delta, "Narrow-phase codomain tolerance");
    app.add_option("--min-sep-fraction", min_sep_fraction,
                   "Minimum separation as a fraction of the initial distance");
    app.add_option("--memory-budget", memory_budget, "Batching budget in bytes");
    app.add_option("--threads", threads, "Worker thread count");
    app.add_flag("--oracle", oracle, "Audit candidates against exact ground truth");
    app.add_flag("--no-zero-toi", no_zero_toi, "Enable the zero-ToI retry policy");
    app.add_option("--seed", seed, "Seed for subsampling");
    app.add_option("--format", format, "Report format")
        ->check(CLI::IsMember({ "csv", "json" }));
    app.add_option("--out", out_path, "Report output path (default: stdout)");
    app.add_flag("--no-timing", no_timing, "Zero the timing columns (golden files)");
    app.add_option("--scaling", scaling_csv,
                   "Comma-separated box-count fractions for a scaling probe");
    std::size_t truncate_candidates = std::size_t(-1);
    app.add_option("--truncate-candidates", truncate_candidates,
                   "Fault injection: keep only the first N candidates (audit testing)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ccdkit::RunSpec spec;
        if (!manifest_path.empty())
            spec.frame_pairs = ccdkit::load_manifest(manifest_path);
        if (t0_paths.size() != t1_paths.size())
            throw ccdkit::InvalidInput("--t0 and --t1 must come in pairs");
        for (std::size_t i = 0; i < t0_paths.size(); ++i)
            spec.frame_pairs.emplace_back(t0_paths[i], t1_paths[i]);
        if (spec.frame_pairs.empty())
            throw ccdkit::InvalidInput("no input scenes (use --t0/--t1 or --manifest)");

        spec.methods.clear();
        for (const std::string& name : method_names)
            spec.methods.push_back(name == "bf" ? ccdkit::BroadMethod::BF
                                       : name == "sap" ? ccdkit::BroadMethod::SAP
                                                       : ccdkit::BroadMethod::STQ);
        if (spec.methods.empty())
            spec.methods.push_back(ccdkit::BroadMethod::STQ);

        spec.pipeline.narrow.delta = delta;
        spec.pipeline.narrow.no_zero_toi = no_zero_toi;
        if (min_sep_fraction >= 0.0) {
            spec.pipeline.min_sep_mode = ccdkit::MinSepMode::Relative;
            spec.pipeline.min_sep_fraction = min_sep_fraction;
        }
        if (memory_budget > 0)
            spec.pipeline.memory_budget = memory_budget;
        spec.pipeline.threads = threads;
        spec.oracle_enabled = oracle;
        spec.no_timing = no_timing;
        spec.truncate_candidates = truncate_candidates;

        if (!scaling_csv.empty()) {
            const ccdkit::SceneStep scene = ccdkit::load_obj_pair(
                spec.frame_pairs[0].first, spec.frame_pairs[0].second);
            const auto rows = ccdkit::scaling_probe(scene, parse_fractions(scaling_csv),
                                                    spec.pipeline, seed);
            std::cout << "fraction,box_count,t_broad,t_narrow\n";
            for (const auto& row : rows)
                std::cout << row.fraction << ',' << row.box_count << ','
                          << (no_timing ? 0.0 : row.broad_time) << ','
                          << (no_timing ? 0.0 : row.narrow_time) << "\n";
            std::cout << "loglog_slope," << ccdkit::loglog_slope(rows) << "\n";
            return 0;
        }

        const ccdkit::BenchResult result = ccdkit::run_benchmark(spec);
        for (const std::string& error : result.errors)
            std::cerr << "error: " << error << "\n";

        const ccdkit::ReportFormat fmt
            = format == "json" ? ccdkit::ReportFormat::Json : ccdkit::ReportFormat::Csv;
        if (out_path.empty())
            ccdkit::emit_report(result.rows, std::cout, fmt);
        else
            ccdkit::emit_report(result.rows, out_path, fmt);

        if (result.rows.empty())
            return 2; // every input failed to load
        if (oracle && result.total_fn > 0) {
            std::cerr << "audit: " << result.total_fn << " false negatives detected\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
