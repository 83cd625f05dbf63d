#pragma once

#include <cstddef>
#include <vector>

#include "ccdkit/aabb.hpp"
#include "ccdkit/scene.hpp"

namespace ccdkit {

// Unordered pair of primitives surviving the broad phase, stored with
// left < right by (kind, index) so set semantics are well defined.
struct CandidatePair {
    PrimitiveId left;
    PrimitiveId right;

    friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
    friend auto operator<=>(const CandidatePair&, const CandidatePair&) = default;
};

inline CandidatePair make_pair_canonical(PrimitiveId a, PrimitiveId b)
{
    return a < b ? CandidatePair { a, b } : CandidatePair { b, a };
}

enum class QueryKind : std::uint8_t { VertexFace, EdgeEdge };

// One narrow-phase query. VertexFace layout: (p, t0, t1, t2); EdgeEdge layout:
// (p0, p1, p2, p3) with (p0,p1) and (p2,p3) the two edges.
struct NarrowQuery {
    QueryKind kind = QueryKind::VertexFace;
    std::array<Vec3, 4> points_t0 {};
    std::array<Vec3, 4> points_t1 {};
    CandidatePair source;
};

// Restrict a sweep to left positions [begin, end) in the sorted (or, for bf,
// raw) box order; the right partner is unrestricted, so the union of candidate
// sets over a partition of ranges equals the full run.
struct SweepRange {
    std::size_t begin = 0;
    std::size_t end = static_cast<std::size_t>(-1);
};

struct StqStats {
    std::size_t max_queue = 0;          // largest queue seen across rounds
    std::vector<std::size_t> round_sizes; // queue size at each round start
};

// Axis of maximal variance of box centers; ties prefer x, then y, then z.
int choose_axis(const std::vector<Aabb>& boxes);

// Sweep and Tiniest Queue: sort along the chosen axis, seed a queue with
// adjacent overlapping pairs, then propagate (i, j) -> (i, j+1) in rounds.
// Returns the canonically sorted candidate set after dropping pairs sharing a
// mesh vertex and pairs that are not vertex-face or edge-edge.
std::vector<CandidatePair> stq(const std::vector<Aabb>& boxes, const SceneStep& scene,
                               unsigned threads = 1, StqStats* stats = nullptr,
                               SweepRange range = {});

// All-pairs exact overlap test with the same post-filters; the broad-phase
// oracle.
std::vector<CandidatePair> bf(const std::vector<Aabb>& boxes, const SceneStep& scene,
                              unsigned threads = 1, SweepRange range = {});

// Serial-style sweep and prune along the chosen axis; same post-filters.
std::vector<CandidatePair> sap(const std::vector<Aabb>& boxes, const SceneStep& scene,
                               unsigned threads = 1, SweepRange range = {});

struct ClassifiedQueries {
    std::vector<NarrowQuery> vertex_face;
    std::vector<NarrowQuery> edge_edge;
};

// Gathers vertex coordinates for surviving pairs. Vertex-face pairs become
// VertexFace queries, edge-edge pairs EdgeEdge queries; every other kind
// combination and any pair sharing a mesh vertex is dropped.
ClassifiedQueries classify(const std::vector<CandidatePair>& pairs,
                           const SceneStep& scene);

} // namespace ccdkit
