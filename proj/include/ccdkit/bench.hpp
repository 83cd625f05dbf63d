#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ccdkit/oracle.hpp"
#include "ccdkit/pipeline.hpp"

namespace ccdkit {

struct RunSpec {
    std::vector<std::pair<std::string, std::string>> frame_pairs; // (t0, t1) paths
    std::vector<BroadMethod> methods { BroadMethod::STQ };
    PipelineConfig pipeline;
    bool oracle_enabled = false;
    OracleOptions oracle;
    bool no_timing = false;     // zero the timing columns (golden-file mode)
    unsigned timing_reps = 3;   // median of this many repetitions per cell
    // Audit-mode fault injection: keep only the first N candidates before the
    // ground-truth comparison, simulating a fixed-size candidate array.
    std::size_t truncate_candidates = std::size_t(-1);
    std::string output_path;
};

struct MetricsRow {
    std::string scene;
    std::size_t frame = 0;
    std::string method;
    std::size_t candidates = 0;
    std::size_t fp = 0; // candidates the oracle certifies non-colliding
    std::size_t fn = 0; // oracle-colliding pairs missing from the candidates
    double t_boxes = 0, t_broad = 0, t_classify = 0, t_narrow = 0;
    std::size_t peak_bytes = 0;
    double toi = kNoCollision;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct BenchResult {
    std::vector<MetricsRow> rows; // sorted by (scene, frame, method)
    std::vector<std::string> errors; // per-file load failures; the run continues
    std::size_t total_fn = 0;
    std::size_t indeterminate = 0; // oracle pairs excluded from FP/FN accounting
};

BenchResult run_benchmark(const RunSpec& spec);

// One frame that is already in memory (used by generators and tests).
void bench_scene(const std::string& scene_id, std::size_t frame, const SceneStep& scene,
                 const RunSpec& spec, BenchResult& out);

enum class ReportFormat : std::uint8_t { Csv, Json };

// Deterministic column order: scene, frame, method, candidates, fp, fn,
// t_boxes, t_broad, t_classify, t_narrow, peak_bytes, toi. CSV uses RFC-4180
// quoting; JSON is an array of row objects with the same field names.
void emit_report(const std::vector<MetricsRow>& rows, std::ostream& out,
                 ReportFormat format);
void emit_report(const std::vector<MetricsRow>& rows, const std::string& path,
                 ReportFormat format);

// Inverse of the JSON emitter, for round-trip checks.
std::vector<MetricsRow> parse_report_json(const std::string& text);

struct ScalingRow {
    double fraction = 1.0;
    std::size_t box_count = 0;
    double broad_time = 0;
    double narrow_time = 0;
};

// Runs broad + narrow phases on seeded random subsamples of the scene's boxes,
// one row per fraction; timings are medians over `reps` repetitions.
std::vector<ScalingRow> scaling_probe(const SceneStep& scene,
                                      const std::vector<double>& fractions,
                                      const PipelineConfig& cfg, std::uint64_t seed,
                                      unsigned reps = 3);

// Least-squares slope of log(time) vs log(box_count) over the probe rows.
double loglog_slope(const std::vector<ScalingRow>& rows);

struct ThreadScalingRow {
    unsigned threads = 1;
    double broad_time = 0;
};

// Repeats the broad phase of a fixed workload at each thread count; timings
// are medians over `reps` repetitions.
std::vector<ThreadScalingRow> thread_scaling(const SceneStep& scene,
                                             const std::vector<unsigned>& counts,
                                             BroadMethod method, unsigned reps = 3);

// Seeded scene generators.
//
// A jittered nx-by-ny cloth grid (unit spacing) falling by `drop`, over a
// static two-triangle floor placed mid-fall so trajectories cross it.
SceneStep make_cloth_scene(std::size_t nx, std::size_t ny, double jitter, double drop,
                           std::uint64_t seed);

// `count` axis-aligned boxes (8 vertices, 12 faces each) with random centers
// in [0, region]^3, random half-extents up to `size`, and random translations
// of magnitude up to `motion`.
SceneStep make_box_soup(std::size_t count, double region, double size, double motion,
                        std::uint64_t seed);

} // namespace ccdkit
