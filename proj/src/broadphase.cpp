#include "ccdkit/broadphase.hpp"

#include <algorithm>
#include <numeric>

#include "ccdkit/parallel.hpp"

namespace ccdkit {

namespace {

    bool keep_pair(const SceneStep& scene, PrimitiveId a, PrimitiveId b)
    {
        const bool vf = (a.kind == PrimitiveKind::Vertex && b.kind == PrimitiveKind::Face)
            || (a.kind == PrimitiveKind::Face && b.kind == PrimitiveKind::Vertex);
        const bool ee = a.kind == PrimitiveKind::Edge && b.kind == PrimitiveKind::Edge;
        if (!vf && !ee)
            return false;
        return !share_vertex(scene, a, b);
    }

    // Sorted positions along the sweep axis; ties broken by (kind, index).
    std::vector<std::uint32_t> sort_positions(const std::vector<Aabb>& boxes, int axis)
    {
        std::vector<std::uint32_t> order(boxes.size());
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            const float ma = boxes[a].min_corner[axis];
            const float mb = boxes[b].min_corner[axis];
            if (ma != mb)
                return ma < mb;
            return boxes[a].owner < boxes[b].owner;
        });
        return order;
    }

    void finalize(std::vector<CandidatePair>& pairs)
    {
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    }

} // namespace

int choose_axis(const std::vector<Aabb>& boxes)
{
    if (boxes.empty())
        throw InvalidInput("choose_axis: empty box list");
    Vec3 mean { 0, 0, 0 };
    for (const Aabb& b : boxes)
        for (int c = 0; c < 3; ++c)
            mean[c] += (static_cast<double>(b.min_corner[c]) + b.max_corner[c]) / 2.0;
    for (int c = 0; c < 3; ++c)
        mean[c] /= static_cast<double>(boxes.size());
    Vec3 var { 0, 0, 0 };
    for (const Aabb& b : boxes) {
        for (int c = 0; c < 3; ++c) {
            const double center = (static_cast<double>(b.min_corner[c]) + b.max_corner[c]) / 2.0;
            var[c] += (center - mean[c]) * (center - mean[c]);
        }
    }
    int axis = 0;
    for (int c = 1; c < 3; ++c)
        if (var[c] > var[axis])
            axis = c;
    return axis;
}

std::vector<CandidatePair> stq(const std::vector<Aabb>& boxes, const SceneStep& scene,
                               unsigned threads, StqStats* stats, SweepRange range)
{
    std::vector<CandidatePair> out;
    const std::size_t k = boxes.size();
    if (k < 2)
        return out;
    const int axis = choose_axis(boxes);
    const int ax1 = (axis + 1) % 3;
    const int ax2 = (axis + 2) % 3;
    const std::vector<std::uint32_t> order = sort_positions(boxes, axis);

    struct Entry {
        std::uint32_t i, j; // sorted positions, i < j
    };
    std::vector<Entry> queue;
    const std::size_t seed_begin = std::min(range.begin, k - 1);
    const std::size_t seed_end = std::min(range.end, k - 1);
    for (std::size_t i = seed_begin; i < seed_end; ++i) {
        if (boxes[order[i + 1]].min_corner[axis] <= boxes[order[i]].max_corner[axis])
            queue.push_back({ static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1) });
    }

    std::vector<Entry> next;
    while (!queue.empty()) {
        if (stats) {
            stats->round_sizes.push_back(queue.size());
            stats->max_queue = std::max(stats->max_queue, queue.size());
        }
        const unsigned workers = threads <= 1 ? 1 : threads;
        std::vector<std::vector<CandidatePair>> local_out(workers);
        std::vector<std::vector<Entry>> local_next(workers);
        parallel_chunks(queue.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
            auto& lo = local_out[w];
            auto& ln = local_next[w];
            for (std::size_t q = begin; q < end; ++q) {
                const Entry e = queue[q];
                const Aabb& bi = boxes[order[e.i]];
                const Aabb& bj = boxes[order[e.j]];
                if (bi.overlaps_axis(bj, ax1) && bi.overlaps_axis(bj, ax2)) {
                    if (keep_pair(scene, bi.owner, bj.owner))
                        lo.push_back(make_pair_canonical(bi.owner, bj.owner));
                }
                if (e.j + 1 < k
                    && boxes[order[e.j + 1]].min_corner[axis] <= bi.max_corner[axis])
                    ln.push_back({ e.i, e.j + 1 });
            }
        });
        next.clear();
        for (unsigned w = 0; w < workers; ++w) {
            out.insert(out.end(), local_out[w].begin(), local_out[w].end());
            next.insert(next.end(), local_next[w].begin(), local_next[w].end());
        }
        queue.swap(next);
    }

    finalize(out);
    return out;
}

std::vector<CandidatePair> bf(const std::vector<Aabb>& boxes, const SceneStep& scene,
                              unsigned threads, SweepRange range)
{
    const std::size_t k = boxes.size();
    const std::size_t begin = std::min(range.begin, k);
    const std::size_t end = std::min(range.end, k);
    const unsigned workers = threads <= 1 ? 1 : threads;
    std::vector<std::vector<CandidatePair>> local(workers);
    parallel_chunks(end > begin ? end - begin : 0, workers,
                    [&](unsigned w, std::size_t lo, std::size_t hi) {
                        auto& buf = local[w];
                        for (std::size_t i = begin + lo; i < begin + hi; ++i) {
                            for (std::size_t j = i + 1; j < k; ++j) {
                                if (boxes[i].overlaps(boxes[j])
                                    && keep_pair(scene, boxes[i].owner, boxes[j].owner))
                                    buf.push_back(
                                        make_pair_canonical(boxes[i].owner, boxes[j].owner));
                            }
                        }
                    });
    std::vector<CandidatePair> out;
    for (auto& buf : local)
        out.insert(out.end(), buf.begin(), buf.end());
    finalize(out);
    return out;
}

std::vector<CandidatePair> sap(const std::vector<Aabb>& boxes, const SceneStep& scene,
                               unsigned threads, SweepRange range)
{
    const std::size_t k = boxes.size();
    std::vector<CandidatePair> out;
    if (k < 2)
        return out;
    const int axis = choose_axis(boxes);
    const int ax1 = (axis + 1) % 3;
    const int ax2 = (axis + 2) % 3;
    const std::vector<std::uint32_t> order = sort_positions(boxes, axis);

    const std::size_t begin = std::min(range.begin, k);
    const std::size_t end = std::min(range.end, k);
    const unsigned workers = threads <= 1 ? 1 : threads;
    std::vector<std::vector<CandidatePair>> local(workers);
    parallel_chunks(end > begin ? end - begin : 0, workers,
                    [&](unsigned w, std::size_t lo, std::size_t hi) {
                        auto& buf = local[w];
                        for (std::size_t i = begin + lo; i < begin + hi; ++i) {
                            const Aabb& bi = boxes[order[i]];
                            for (std::size_t j = i + 1; j < k; ++j) {
                                const Aabb& bj = boxes[order[j]];
                                // sorted by min along axis: once past, all later are too
                                if (bj.min_corner[axis] > bi.max_corner[axis])
                                    break;
                                if (bi.overlaps_axis(bj, ax1) && bi.overlaps_axis(bj, ax2)
                                    && keep_pair(scene, bi.owner, bj.owner))
                                    buf.push_back(make_pair_canonical(bi.owner, bj.owner));
                            }
                        }
                    });
    for (auto& buf : local)
        out.insert(out.end(), buf.begin(), buf.end());
    finalize(out);
    return out;
}

ClassifiedQueries classify(const std::vector<CandidatePair>& pairs, const SceneStep& scene)
{
    ClassifiedQueries result;
    const std::size_t nv = scene.vertices_t0.size();
    for (const CandidatePair& pair : pairs) {
        const PrimitiveId a = pair.left;
        const PrimitiveId b = pair.right;
        const auto check_index = [&](PrimitiveId id) {
            const std::size_t limit = id.kind == PrimitiveKind::Vertex ? nv
                : id.kind == PrimitiveKind::Edge                       ? scene.edges.size()
                                                                       : scene.faces.size();
            if (id.index >= limit)
                throw InvalidInput("classify: primitive index out of range");
        };
        check_index(a);
        check_index(b);
        if (a.kind == PrimitiveKind::Vertex && b.kind == PrimitiveKind::Face) {
            if (share_vertex(scene, a, b))
                continue;
            NarrowQuery q;
            q.kind = QueryKind::VertexFace;
            q.source = pair;
            const auto& f = scene.faces[b.index];
            q.points_t0 = { scene.vertices_t0[a.index], scene.vertices_t0[f[0]],
                            scene.vertices_t0[f[1]], scene.vertices_t0[f[2]] };
            q.points_t1 = { scene.vertices_t1[a.index], scene.vertices_t1[f[0]],
                            scene.vertices_t1[f[1]], scene.vertices_t1[f[2]] };
            result.vertex_face.push_back(q);
        } else if (a.kind == PrimitiveKind::Edge && b.kind == PrimitiveKind::Edge) {
            if (share_vertex(scene, a, b))
                continue;
            NarrowQuery q;
            q.kind = QueryKind::EdgeEdge;
            q.source = pair;
            const auto& e0 = scene.edges[a.index];
            const auto& e1 = scene.edges[b.index];
            q.points_t0 = { scene.vertices_t0[e0[0]], scene.vertices_t0[e0[1]],
                            scene.vertices_t0[e1[0]], scene.vertices_t0[e1[1]] };
            q.points_t1 = { scene.vertices_t1[e0[0]], scene.vertices_t1[e0[1]],
                            scene.vertices_t1[e1[0]], scene.vertices_t1[e1[1]] };
            result.edge_edge.push_back(q);
        }
        // vertex-vertex, vertex-edge, edge-face, face-face: dropped
    }
    return result;
}

} // namespace ccdkit
