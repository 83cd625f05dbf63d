#include "ccdkit/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "ccdkit/distance.hpp"

namespace ccdkit {

const char* to_string(BroadMethod method)
{
    switch (method) {
    case BroadMethod::STQ:
        return "stq";
    case BroadMethod::BF:
        return "bf";
    case BroadMethod::SAP:
        return "sap";
    }
    return "?";
}

void PipelineConfig::validate() const
{
    narrow.validate();
    if (record_sizes.params == 0 || record_sizes.query == 0 || record_sizes.interval == 0
        || record_sizes.pair_ints == 0)
        throw ConfigError("PipelineConfig: record sizes must be positive");
    if (memory_budget <= record_sizes.params)
        throw ConfigError("PipelineConfig: memory budget must exceed the parameter size");
    if (min_sep_fraction < 0.0)
        throw ConfigError("PipelineConfig: min_sep_fraction must be >= 0");
    if (threads < 1)
        throw ConfigError("PipelineConfig: threads must be >= 1");
    if (inflation < 0.0)
        throw ConfigError("PipelineConfig: inflation must be >= 0");
}

std::vector<double> query_min_separations(const std::vector<NarrowQuery>& queries,
                                          const PipelineConfig& cfg)
{
    std::vector<double> seps(queries.size(), cfg.narrow.min_separation);
    if (cfg.min_sep_mode != MinSepMode::Relative)
        return seps;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const NarrowQuery& q = queries[i];
        const double d0 = q.kind == QueryKind::VertexFace
            ? point_triangle_distance(q.points_t0[0], q.points_t0[1], q.points_t0[2],
                                      q.points_t0[3])
            : segment_segment_distance(q.points_t0[0], q.points_t0[1], q.points_t0[2],
                                       q.points_t0[3]);
        seps[i] = cfg.min_sep_fraction * d0;
    }
    return seps;
}

namespace {

    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point start)
    {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }

    std::vector<CandidatePair> run_broad(const std::vector<Aabb>& boxes,
                                         const SceneStep& scene, const PipelineConfig& cfg,
                                         SweepRange range)
    {
        switch (cfg.broad_method) {
        case BroadMethod::STQ:
            return stq(boxes, scene, cfg.threads, nullptr, range);
        case BroadMethod::BF:
            return bf(boxes, scene, cfg.threads, range);
        case BroadMethod::SAP:
            return sap(boxes, scene, cfg.threads, range);
        }
        return {};
    }

    struct BatchRun {
        const SceneStep& scene;
        const std::vector<Aabb>& boxes;
        const PipelineConfig& cfg;
        BatchTrace& trace;
        CcdReport* report;

        std::size_t cap_pairs = 0;
        ToiResult toi;
        std::vector<CandidatePair> all_candidates;
        std::size_t query_count = 0;
        double time_broad = 0, time_classify = 0, time_narrow = 0;
        std::size_t peak_bytes = 0;
        std::size_t base_bytes = 0; // boxes + candidate union

        void fold(const ToiResult& r)
        {
            toi.toi = std::min(toi.toi, r.toi);
            toi.tolerance_hit = toi.tolerance_hit || r.tolerance_hit;
            toi.zero_toi_diagnostic = toi.zero_toi_diagnostic || r.zero_toi_diagnostic;
        }

        void narrow_batch(const std::vector<NarrowQuery>& queries,
                          const std::vector<double>& seps, std::size_t begin,
                          std::size_t end)
        {
            const std::size_t n_sub = end - begin;
            const RecordSizes& rs = cfg.record_sizes;
            const std::size_t pair_bytes = n_sub * (rs.query + 3 * rs.pair_ints);
            const std::size_t avail = cfg.memory_budget > rs.params + pair_bytes
                ? cfg.memory_budget - rs.params - pair_bytes
                : 0;
            const std::size_t queue_capacity = avail / rs.interval;

            const std::vector<NarrowQuery> sub(queries.begin() + begin, queries.begin() + end);
            const std::vector<double> sub_seps(seps.begin() + begin, seps.begin() + end);

            const auto t0 = Clock::now();
            const NarrowOutcome outcome
                = narrow_phase(sub, cfg.narrow, cfg.threads, queue_capacity, &sub_seps);
            time_narrow += seconds_since(t0);

            if (outcome.overflow) {
                if (n_sub <= 1)
                    throw ConfigError("memory budget too small to hold even one query");
                const std::size_t mid = begin + n_sub / 2;
                narrow_batch(queries, seps, begin, mid);
                narrow_batch(queries, seps, mid, end);
                return;
            }

            ++trace.narrow_batches;
            for (const ToiResult& r : outcome.per_query)
                fold(r);
            const std::size_t bytes = base_bytes + n_sub * sizeof(NarrowQuery)
                + outcome.peak_queue * (sizeof(IntervalBox) + sizeof(ProcessResult));
            peak_bytes = std::max(peak_bytes, bytes);
        }

        void broad_batch(std::size_t begin, std::size_t end)
        {
            const auto t0 = Clock::now();
            const std::vector<CandidatePair> cands
                = run_broad(boxes, scene, cfg, SweepRange { begin, end });
            time_broad += seconds_since(t0);

            if (cands.size() > cap_pairs && end - begin > 1) {
                const std::size_t mid = begin + (end - begin) / 2;
                broad_batch(begin, mid);
                broad_batch(mid, end);
                return;
            }
            // A single left position can exceed the candidate capacity; there
            // is nothing left to split, so the batch proceeds as-is.

            ++trace.broad_batches;
            all_candidates.insert(all_candidates.end(), cands.begin(), cands.end());
            base_bytes = boxes.size() * sizeof(Aabb)
                + all_candidates.size() * sizeof(CandidatePair);

            const auto t1 = Clock::now();
            ClassifiedQueries classified = classify(cands, scene);
            std::vector<NarrowQuery> queries = std::move(classified.vertex_face);
            queries.insert(queries.end(), classified.edge_edge.begin(),
                           classified.edge_edge.end());
            const std::vector<double> seps = query_min_separations(queries, cfg);
            time_classify += seconds_since(t1);

            query_count += queries.size();
            if (!queries.empty())
                narrow_batch(queries, seps, 0, queries.size());
            else
                ++trace.narrow_batches; // an empty narrow run still counts as a batch
        }
    };

} // namespace

ToiResult run_batched(const SceneStep& scene, const std::vector<Aabb>& boxes,
                      const PipelineConfig& cfg, BatchTrace& trace, CcdReport* report)
{
    cfg.validate();
    const RecordSizes& rs = cfg.record_sizes;
    const std::size_t cap_pairs
        = (cfg.memory_budget - rs.params) / (rs.query + 3 * rs.pair_ints);
    if (cap_pairs < 1)
        throw ConfigError("memory budget too small to hold even one query");

    BatchRun run { scene, boxes, cfg, trace, report };
    run.cap_pairs = cap_pairs;
    if (!boxes.empty())
        run.broad_batch(0, boxes.size());
    else
        trace.narrow_batches = 1;

    std::sort(run.all_candidates.begin(), run.all_candidates.end());

    if (report) {
        report->toi = run.toi;
        report->candidate_count = run.all_candidates.size();
        report->query_count = run.query_count;
        report->batch_count = std::max<std::size_t>(1, trace.narrow_batches);
        report->per_stage_times["BP"] = run.time_broad;
        report->per_stage_times["SO/CD"] = run.time_classify;
        report->per_stage_times["NP"] = run.time_narrow;
        report->tracked_peak_bytes
            = std::max(report->tracked_peak_bytes,
                       std::max(run.peak_bytes, run.base_bytes));
        report->candidates = std::move(run.all_candidates);
        report->real_record_sizes.params = sizeof(PipelineConfig);
        report->real_record_sizes.query = sizeof(NarrowQuery);
        report->real_record_sizes.interval = sizeof(IntervalBox) + sizeof(ProcessResult);
        report->real_record_sizes.pair_ints = sizeof(CandidatePair);
    }
    return run.toi;
}

CcdReport ccd(const SceneStep& scene, const PipelineConfig& cfg)
{
    cfg.validate();
    scene.validate();

    CcdReport report;
    const auto t0 = Clock::now();
    const std::vector<Aabb> boxes = build_boxes(scene, cfg.inflation, cfg.threads);
    report.per_stage_times["CB"] = seconds_since(t0);
    report.tracked_peak_bytes = boxes.size() * sizeof(Aabb);

    BatchTrace trace;
    run_batched(scene, boxes, cfg, trace, &report);
    return report;
}

CcdReport ccd_no_zero_toi(const SceneStep& scene, const PipelineConfig& cfg)
{
    if (!cfg.narrow.no_zero_toi)
        throw ConfigError("ccd_no_zero_toi: cfg.narrow.no_zero_toi must be set");

    PipelineConfig first = cfg;
    first.narrow.no_zero_toi = false;
    CcdReport report = ccd(scene, first);
    if (report.toi.toi != 0.0)
        return report;

    // Retry with zero separation and the always-split-at-t=0 rule; the
    // retried ToI is scaled to avoid exactly touching after the step.
    PipelineConfig retry = cfg;
    retry.narrow.no_zero_toi = true;
    retry.narrow.min_separation = 0.0;
    retry.min_sep_mode = MinSepMode::Absolute;
    CcdReport retried = ccd(scene, retry);
    retried.toi.toi = kZeroToiRetryScale * retried.toi.toi;
    for (const auto& [stage, t] : report.per_stage_times)
        retried.per_stage_times[stage] += t;
    return retried;
}

} // namespace ccdkit
