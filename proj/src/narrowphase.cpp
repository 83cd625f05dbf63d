#include "ccdkit/narrowphase.hpp"

#include <algorithm>
#include <cmath>

#include "ccdkit/parallel.hpp"

namespace ccdkit {

void NarrowConfig::validate() const
{
    if (!(delta > 0.0))
        throw ConfigError("NarrowConfig: delta must be > 0");
    if (max_splits < 1)
        throw ConfigError("NarrowConfig: max_splits must be >= 1");
    if (min_separation < 0.0)
        throw ConfigError("NarrowConfig: min_separation must be >= 0");
    if (!(t_max > 0.0) || t_max > 1.0)
        throw ConfigError("NarrowConfig: t_max must be in (0, 1]");
}

namespace {

    struct BoxEval {
        IntervalVec3 corners[8]; // bit 0 = t, bit 1 = u, bit 2 = v (0 = lo)
        IntervalVec3 range;
    };

    // Multiply an interval by an exact point factor known to be >= 0.
    inline Interval scale_nn(double p, const Interval& a)
    {
        return { detail::down(p * a.lo), detail::up(p * a.hi) };
    }

    BoxEval evaluate_box(const NarrowQuery& q, const IntervalBox& box)
    {
        // F is evaluated in the difference form
        //   VF: (P0-P1) - u (P2-P1) - v (P3-P1)
        //   EE: (P0-P2) + u (P1-P0) - v (P3-P2)
        // with P(t) = x0 + t (x1-x0). Both rewrites are exact identities over
        // the rationals, so the corner hull encloses the same exact values as
        // the textbook barycentric form while every multiply has a sign-known
        // exact point factor (t, u, v in [0,1]). This is the hot path.
        Interval delta[4][3];
        for (int p = 0; p < 4; ++p)
            for (int c = 0; c < 3; ++c)
                delta[p][c] = Interval::point(q.points_t1[p][c])
                    - Interval::point(q.points_t0[p][c]);

        // Positions at the two t endpoints; shared by the four (u,v) corners.
        Interval base[2][3], du[2][3], dv[2][3];
        for (int tb = 0; tb < 2; ++tb) {
            const double t = tb ? box.t.hi : box.t.lo;
            Interval at_t[4][3];
            for (int p = 0; p < 4; ++p)
                for (int c = 0; c < 3; ++c)
                    at_t[p][c] = Interval::point(q.points_t0[p][c])
                        + scale_nn(t, delta[p][c]);
            const int origin = q.kind == QueryKind::VertexFace ? 1 : 2;
            const int u_from = q.kind == QueryKind::VertexFace ? 1 : 0;
            const int u_to = q.kind == QueryKind::VertexFace ? 2 : 1;
            for (int c = 0; c < 3; ++c) {
                base[tb][c] = at_t[0][c] - at_t[origin][c];
                du[tb][c] = at_t[u_to][c] - at_t[u_from][c];
                dv[tb][c] = at_t[3][c] - at_t[origin][c];
            }
        }
        const double u_sign = q.kind == QueryKind::VertexFace ? -1.0 : 1.0;

        BoxEval eval;
        for (int corner = 0; corner < 8; ++corner) {
            const int tb = corner & 1;
            const double u = (corner & 2) ? box.u.hi : box.u.lo;
            const double v = (corner & 4) ? box.v.hi : box.v.lo;
            IntervalVec3 f;
            for (int c = 0; c < 3; ++c) {
                const Interval u_term = scale_nn(u, du[tb][c]);
                f[c] = (u_sign < 0 ? base[tb][c] - u_term : base[tb][c] + u_term)
                    - scale_nn(v, dv[tb][c]);
            }
            eval.corners[corner] = f;
            eval.range = corner == 0 ? f : hull(eval.range, f);
        }
        return eval;
    }

    // Codomain width attributable to each domain dimension, estimated from
    // midpoint differences of corner pairs that differ only in that dimension.
    std::array<double, 3> influences(const BoxEval& eval)
    {
        std::array<double, 3> infl { 0, 0, 0 };
        for (int d = 0; d < 3; ++d) {
            const int bit = 1 << d;
            for (int corner = 0; corner < 8; ++corner) {
                if (corner & bit)
                    continue;
                const IntervalVec3& a = eval.corners[corner];
                const IntervalVec3& b = eval.corners[corner | bit];
                for (int c = 0; c < 3; ++c) {
                    const double diff = std::abs(0.5 * (b[c].lo + b[c].hi)
                                                 - 0.5 * (a[c].lo + a[c].hi));
                    infl[d] = std::max(infl[d], diff);
                }
            }
        }
        return infl;
    }

    bool splittable(const DomainInterval& iv)
    {
        const double mid = iv.lo + 0.5 * (iv.hi - iv.lo);
        return mid > iv.lo && mid < iv.hi;
    }

} // namespace

IntervalVec3 inclusion_box(const NarrowQuery& query, const IntervalBox& box)
{
    return evaluate_box(query, box).range;
}

void split_box(const IntervalBox& box, int d, IntervalBox& left, IntervalBox& right)
{
    const DomainInterval& iv = box.dim(d);
    const double mid = iv.lo + 0.5 * (iv.hi - iv.lo);
    left = box;
    right = box;
    left.dim(d).hi = mid;
    right.dim(d).lo = mid;
    ++left.depth[d];
    ++right.depth[d];
}

ProcessResult process_interval(const IntervalBox& box, double t_star,
                               const NarrowConfig& cfg, const NarrowQuery& query,
                               double min_separation)
{
    ProcessResult result;

    if (box.t.lo >= t_star || box.t.lo >= cfg.t_max)
        return result; // after the current best ToI / beyond the time of interest

    // Boxes fully outside the barycentric simplex carry no vertex-face root.
    if (query.kind == QueryKind::VertexFace && box.u.lo + box.v.lo > 1.0)
        return result;

    const double d = min_separation >= 0.0 ? min_separation : cfg.min_separation;
    const BoxEval eval = evaluate_box(query, box);
    const IntervalVec3& range = eval.range;

    for (int c = 0; c < 3; ++c) {
        if (range[c].lo > d || range[c].hi < -d)
            return result; // inclusion misses the tolerance cube: no root here
    }

    const bool force_zero_split = cfg.no_zero_toi && box.t.lo == 0.0;
    if (!force_zero_split) {
        bool inside = true;
        for (int c = 0; c < 3; ++c)
            inside = inside && range[c].lo >= -d && range[c].hi <= d;
        if (range.max_width() < cfg.delta || inside) {
            result.action = IntervalAction::Collision;
            result.candidate_t = box.t.lo;
            return result;
        }
    }

    const std::array<double, 3> infl = influences(eval);
    int dim = -1;
    for (int d2 = 0; d2 < 3; ++d2) {
        if (!splittable(box.dim(d2)))
            continue;
        if (dim < 0 || infl[d2] > infl[dim])
            dim = d2;
    }
    if (dim < 0) {
        // Unsplittable: treated as collision at t.lo, conservatively.
        result.action = IntervalAction::Collision;
        result.candidate_t = box.t.lo;
        result.zero_toi_diagnostic = force_zero_split;
        return result;
    }

    result.action = IntervalAction::Split;
    split_box(box, dim, result.children[0], result.children[1]);
    return result;
}

NarrowOutcome narrow_phase(const std::vector<NarrowQuery>& queries,
                           const NarrowConfig& cfg, unsigned threads,
                           std::size_t queue_capacity,
                           const std::vector<double>* per_query_min_sep)
{
    cfg.validate();
    const std::size_t n = queries.size();
    if (per_query_min_sep && per_query_min_sep->size() != n)
        throw ConfigError("narrow_phase: per-query separation list size mismatch");

    NarrowOutcome outcome;
    outcome.per_query.assign(n, ToiResult {});
    if (n == 0)
        return outcome;

    const auto sep_of = [&](std::uint32_t q) {
        return per_query_min_sep ? (*per_query_min_sep)[q] : cfg.min_separation;
    };

    std::vector<IntervalBox> queue;
    queue.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
        IntervalBox root;
        root.query_id = static_cast<std::uint32_t>(q);
        queue.push_back(root);
    }
    if (queue.size() > queue_capacity) {
        outcome.overflow = true;
        return outcome;
    }

    std::vector<std::uint64_t> splits_used(n, 0);
    std::vector<char> done(n, 0);
    std::vector<double> snapshot(n, kNoCollision);
    std::vector<ProcessResult> actions;
    std::vector<IntervalBox> next;

    while (!queue.empty()) {
        outcome.peak_queue = std::max(outcome.peak_queue, queue.size());
        for (std::size_t q = 0; q < n; ++q)
            snapshot[q] = outcome.per_query[q].toi;

        actions.assign(queue.size(), ProcessResult {});
        parallel_chunks(queue.size(), threads, [&](unsigned, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const IntervalBox& box = queue[i];
                actions[i] = process_interval(box, snapshot[box.query_id], cfg,
                                              queries[box.query_id], sep_of(box.query_id));
            }
        });

        // Serial fold in queue order: candidate minima, split budget, children.
        next.clear();
        bool any_exhausted = false;
        for (std::size_t i = 0; i < queue.size(); ++i) {
            const std::uint32_t q = queue[i].query_id;
            if (done[q])
                continue;
            ToiResult& res = outcome.per_query[q];
            const ProcessResult& act = actions[i];
            switch (act.action) {
            case IntervalAction::Pruned:
                break;
            case IntervalAction::Collision:
                res.toi = std::min(res.toi, act.candidate_t);
                res.zero_toi_diagnostic = res.zero_toi_diagnostic || act.zero_toi_diagnostic;
                break;
            case IntervalAction::Split: {
                const bool zero_exempt = cfg.no_zero_toi && queue[i].t.lo == 0.0;
                if (zero_exempt || splits_used[q] < cfg.max_splits) {
                    if (!zero_exempt) {
                        ++splits_used[q];
                        ++outcome.total_splits;
                    }
                    next.push_back(act.children[0]);
                    next.push_back(act.children[1]);
                } else {
                    // Budget exhausted: fold the live lower bound, finish below.
                    res.toi = std::min(res.toi, queue[i].t.lo);
                    res.tolerance_hit = true;
                    if (cfg.no_zero_toi && queue[i].t.lo == 0.0)
                        res.zero_toi_diagnostic = true;
                    any_exhausted = true;
                }
                break;
            }
            }
        }

        if (any_exhausted) {
            // Remove remaining live intervals of exhausted queries, keeping
            // their t.lo as the conservative answer.
            std::size_t w = 0;
            for (std::size_t i = 0; i < next.size(); ++i) {
                const std::uint32_t q = next[i].query_id;
                if (outcome.per_query[q].tolerance_hit) {
                    outcome.per_query[q].toi
                        = std::min(outcome.per_query[q].toi, next[i].t.lo);
                    if (cfg.no_zero_toi && next[i].t.lo == 0.0)
                        outcome.per_query[q].zero_toi_diagnostic = true;
                } else {
                    next[w++] = next[i];
                }
            }
            next.resize(w);
            for (std::size_t q = 0; q < n; ++q)
                if (outcome.per_query[q].tolerance_hit)
                    done[q] = 1;
        }

        if (next.size() > queue_capacity) {
            outcome.overflow = true;
            return outcome;
        }
        outcome.peak_queue = std::max(outcome.peak_queue, next.size());
        queue.swap(next);
    }

    outcome.global_toi = kNoCollision;
    for (const ToiResult& r : outcome.per_query)
        outcome.global_toi = std::min(outcome.global_toi, r.toi);
    return outcome;
}

} // namespace ccdkit
