#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ccdkit/broadphase.hpp"
#include "ccdkit/narrowphase.hpp"

namespace ccdkit {

enum class BroadMethod : std::uint8_t { STQ, BF, SAP };

const char* to_string(BroadMethod method);

// Record sizes used by the batching arithmetic. Defaults follow the byte
// counts the batching policy was designed around (parameters 56 B, 24 doubles
// per query, 252 B per interval, 8 B per pair); actual in-memory sizes are
// reported separately.
struct RecordSizes {
    std::size_t params = 56;
    std::size_t query = 24 * sizeof(double);
    std::size_t interval = 252;
    std::size_t pair_ints = 8;
};

enum class MinSepMode : std::uint8_t {
    Absolute, // use narrow.min_separation for every query
    Relative, // per query: min_sep_fraction * (distance between primitives at t=0)
};

struct PipelineConfig {
    NarrowConfig narrow;
    BroadMethod broad_method = BroadMethod::STQ;
    std::size_t memory_budget = std::numeric_limits<std::size_t>::max() / 4;
    RecordSizes record_sizes;
    MinSepMode min_sep_mode = MinSepMode::Absolute;
    double min_sep_fraction = 0.2;
    unsigned threads = 1;
    double inflation = 0.0;

    void validate() const;
};

struct CcdReport {
    ToiResult toi;
    std::size_t candidate_count = 0;
    std::size_t query_count = 0;
    std::size_t batch_count = 1; // narrow-phase executions across all batches
    std::map<std::string, double> per_stage_times; // seconds: CB, BP, SO/CD, NP
    std::size_t tracked_peak_bytes = 0;

    // Sorted union of broad-phase candidates across batches.
    std::vector<CandidatePair> candidates;

    // Reporting of policy choices and real record sizes.
    std::string inflation_policy = "per-axis";
    RecordSizes real_record_sizes;
};

// Full pipeline: build boxes, broad phase, classify, narrow phase, with
// memory-budgeted batching throughout. Batches partition work, and each
// query's narrow-phase result is independent of the partition, so the
// reported ToI matches an unbatched run for any sufficient budget.
CcdReport ccd(const SceneStep& scene, const PipelineConfig& cfg);

struct BatchTrace {
    std::size_t broad_batches = 0;
    std::size_t narrow_batches = 0;
};

// Batched broad + narrow phases over prebuilt boxes. On candidate-capacity
// overflow the box range splits in two and recurses; on interval-queue
// overflow the narrow phase re-runs on half of its queries. Throws
// ConfigError when the budget cannot hold even a single query.
ToiResult run_batched(const SceneStep& scene, const std::vector<Aabb>& boxes,
                      const PipelineConfig& cfg, BatchTrace& trace,
                      CcdReport* report = nullptr);

// Minimum-separation run with the zero-ToI retry: if the separated run
// returns exactly 0, the narrow phase re-runs with zero separation and the
// always-split-at-t=0 rule, and the retried ToI is scaled by 0.8.
CcdReport ccd_no_zero_toi(const SceneStep& scene, const PipelineConfig& cfg);

inline constexpr double kZeroToiRetryScale = 0.8;

// Per-query tolerance-cube half-widths under the configured separation mode.
std::vector<double> query_min_separations(const std::vector<NarrowQuery>& queries,
                                          const PipelineConfig& cfg);

} // namespace ccdkit
