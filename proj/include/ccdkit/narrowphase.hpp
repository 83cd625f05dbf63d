#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ccdkit/broadphase.hpp"
#include "ccdkit/interval.hpp"

namespace ccdkit {

// Endpoints stay dyadic: every box is produced from [0,1]^3 by repeated exact
// bisections.
struct DomainInterval {
    double lo = 0.0;
    double hi = 1.0;
};

// Sub-box of [0,1]^3 in (t,u,v) parameter space attached to one query. For
// vertex-face queries the u+v <= 1 constraint is applied during processing,
// not stored here.
struct IntervalBox {
    std::uint32_t query_id = 0;
    DomainInterval t, u, v;
    std::array<std::uint16_t, 3> depth { 0, 0, 0 }; // splits along t, u, v

    DomainInterval& dim(int d) { return d == 0 ? t : d == 1 ? u : v; }
    const DomainInterval& dim(int d) const { return d == 0 ? t : d == 1 ? u : v; }
};

struct NarrowConfig {
    double delta = 1e-6;          // codomain tolerance (world units)
    double min_separation = 0.0;  // half-width added to the tolerance cube
    double t_max = 1.0;           // upper bound on time of interest
    std::uint64_t max_splits = std::uint64_t(1) << 20; // per-query split cap
    bool no_zero_toi = false;     // always split intervals with t.lo == 0

    void validate() const;
};

inline constexpr double kNoCollision = std::numeric_limits<double>::infinity();

struct ToiResult {
    double toi = kNoCollision;
    bool tolerance_hit = false;       // max_splits forced a conservative early answer
    bool zero_toi_diagnostic = false; // unsplittable zero-time interval in no-zero mode

    bool collision() const { return toi != kNoCollision; }
};

// Interval inclusion of F over the box: the hull of the 8 corner values
// evaluated in outward-rounded interval arithmetic. F is multilinear in
// (t,u,v), so the exact range is the corner hull; the returned box additionally
// contains all floating-point rounding error.
//
// VertexFace: F = p(t) - ((1-u-v) t0(t) + u t1(t) + v t2(t))
// EdgeEdge:   F = ((1-u) p0(t) + u p1(t)) - ((1-v) p2(t) + v p3(t))
// with x(t) = (1-t) x_t0 + t x_t1 for every point.
IntervalVec3 inclusion_box(const NarrowQuery& query, const IntervalBox& box);

enum class IntervalAction : std::uint8_t { Pruned, Collision, Split };

struct ProcessResult {
    IntervalAction action = IntervalAction::Pruned;
    double candidate_t = kNoCollision; // set for Collision
    bool zero_toi_diagnostic = false;
    IntervalBox children[2]; // set for Split
};

// One step of the queue-based refinement:
//   (a) boxes starting at or after the current best ToI are pruned;
//   (b) boxes whose inclusion misses the tolerance cube are pruned;
//   (c) boxes with w(B) < delta, or fully inside the cube, report t.lo;
//   (d) otherwise the box splits along the dimension with the largest
//       codomain influence (ties prefer t, then u, then v).
// min_separation overrides cfg.min_separation when non-negative.
ProcessResult process_interval(const IntervalBox& box, double t_star,
                               const NarrowConfig& cfg, const NarrowQuery& query,
                               double min_separation = -1.0);

// Exact bisection of one dimension at its midpoint.
void split_box(const IntervalBox& box, int d, IntervalBox& left, IntervalBox& right);

struct NarrowOutcome {
    std::vector<ToiResult> per_query;
    double global_toi = kNoCollision;
    bool overflow = false;        // queue capacity exceeded; batching signal
    std::size_t peak_queue = 0;   // largest interval queue across rounds
    std::uint64_t total_splits = 0;
};

// Seeds one root box per query, then processes whole queue generations:
// actions are evaluated in parallel against the previous round's per-query
// best ToI, then folded serially in queue order, so results are bit-identical
// for any worker count. Each query's result depends only on (query, cfg);
// per_query_min_sep, when non-empty, gives each query its own separation d.
NarrowOutcome narrow_phase(const std::vector<NarrowQuery>& queries,
                           const NarrowConfig& cfg, unsigned threads = 1,
                           std::size_t queue_capacity = std::size_t(-1),
                           const std::vector<double>* per_query_min_sep = nullptr);

} // namespace ccdkit
