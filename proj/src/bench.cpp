#include "ccdkit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ccdkit/rng.hpp"

namespace ccdkit {

namespace {

    using Clock = std::chrono::steady_clock;

    double median(std::vector<double> xs)
    {
        std::sort(xs.begin(), xs.end());
        return xs.empty() ? 0.0 : xs[xs.size() / 2];
    }

    double stage(const CcdReport& report, const char* name)
    {
        const auto it = report.per_stage_times.find(name);
        return it == report.per_stage_times.end() ? 0.0 : it->second;
    }

    CcdReport run_pipeline(const SceneStep& scene, PipelineConfig cfg)
    {
        return cfg.narrow.no_zero_toi ? ccd_no_zero_toi(scene, cfg) : ccd(scene, cfg);
    }

} // namespace

void bench_scene(const std::string& scene_id, std::size_t frame, const SceneStep& scene,
                 const RunSpec& spec, BenchResult& out)
{
    // Ground truth is per-scene, shared across methods.
    GroundTruth truth;
    std::vector<CandidatePair> colliding, indeterminate;
    if (spec.oracle_enabled) {
        truth = ground_truth_pairs(scene, spec.oracle, spec.pipeline.threads);
        colliding.reserve(truth.colliding.size());
        for (const GroundTruthPair& p : truth.colliding)
            colliding.push_back(p.pair);
        indeterminate = truth.indeterminate;
        out.indeterminate += indeterminate.size();
    }

    for (const BroadMethod method : spec.methods) {
        PipelineConfig cfg = spec.pipeline;
        cfg.broad_method = method;

        CcdReport report = run_pipeline(scene, cfg);
        std::vector<double> boxes_t { stage(report, "CB") };
        std::vector<double> broad_t { stage(report, "BP") };
        std::vector<double> classify_t { stage(report, "SO/CD") };
        std::vector<double> narrow_t { stage(report, "NP") };
        if (!spec.no_timing) {
            for (unsigned rep = 1; rep < spec.timing_reps; ++rep) {
                const CcdReport again = run_pipeline(scene, cfg);
                boxes_t.push_back(stage(again, "CB"));
                broad_t.push_back(stage(again, "BP"));
                classify_t.push_back(stage(again, "SO/CD"));
                narrow_t.push_back(stage(again, "NP"));
            }
        }

        std::vector<CandidatePair> candidates = std::move(report.candidates);
        if (candidates.size() > spec.truncate_candidates)
            candidates.resize(spec.truncate_candidates); // audit-mode injection

        MetricsRow row;
        row.scene = scene_id;
        row.frame = frame;
        row.method = to_string(method);
        row.candidates = candidates.size();
        if (spec.oracle_enabled) {
            // candidates and the oracle sets are all canonically sorted
            std::vector<CandidatePair> hits;
            std::set_intersection(candidates.begin(), candidates.end(),
                                  colliding.begin(), colliding.end(),
                                  std::back_inserter(hits));
            std::vector<CandidatePair> unknown_hits;
            std::set_intersection(candidates.begin(), candidates.end(),
                                  indeterminate.begin(), indeterminate.end(),
                                  std::back_inserter(unknown_hits));
            row.fp = candidates.size() - hits.size() - unknown_hits.size();
            row.fn = colliding.size() - hits.size();
            out.total_fn += row.fn;
        }
        if (!spec.no_timing) {
            row.t_boxes = median(boxes_t);
            row.t_broad = median(broad_t);
            row.t_classify = median(classify_t);
            row.t_narrow = median(narrow_t);
        }
        row.peak_bytes = report.tracked_peak_bytes;
        row.toi = report.toi.toi;
        out.rows.push_back(std::move(row));
    }
}

BenchResult run_benchmark(const RunSpec& spec)
{
    if (spec.frame_pairs.empty() || spec.methods.empty())
        throw ConfigError("run_benchmark: need at least one frame pair and one method");
    spec.pipeline.validate();

    BenchResult result;
    for (std::size_t frame = 0; frame < spec.frame_pairs.size(); ++frame) {
        const auto& [t0, t1] = spec.frame_pairs[frame];
        SceneStep scene;
        try {
            scene = load_obj_pair(t0, t1);
        } catch (const std::exception& e) {
            result.errors.push_back(t0 + ": " + e.what());
            continue; // malformed files are reported, the run continues
        }
        bench_scene(t0, frame, scene, spec, result);
    }
    std::sort(result.rows.begin(), result.rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) {
                  return std::tie(a.scene, a.frame, a.method)
                      < std::tie(b.scene, b.frame, b.method);
              });
    if (!spec.output_path.empty())
        emit_report(result.rows, spec.output_path,
                    spec.output_path.ends_with(".json") ? ReportFormat::Json
                                                        : ReportFormat::Csv);
    return result;
}

namespace {

    std::string csv_quote(const std::string& field)
    {
        if (field.find_first_of(",\"\r\n") == std::string::npos)
            return field;
        std::string quoted = "\"";
        for (const char c : field) {
            if (c == '"')
                quoted += '"';
            quoted += c;
        }
        quoted += '"';
        return quoted;
    }

    nlohmann::json row_to_json(const MetricsRow& row)
    {
        nlohmann::json j;
        j["scene"] = row.scene;
        j["frame"] = row.frame;
        j["method"] = row.method;
        j["candidates"] = row.candidates;
        j["fp"] = row.fp;
        j["fn"] = row.fn;
        j["t_boxes"] = row.t_boxes;
        j["t_broad"] = row.t_broad;
        j["t_classify"] = row.t_classify;
        j["t_narrow"] = row.t_narrow;
        j["peak_bytes"] = row.peak_bytes;
        if (row.toi == kNoCollision)
            j["toi"] = nullptr;
        else
            j["toi"] = row.toi;
        return j;
    }

} // namespace

void emit_report(const std::vector<MetricsRow>& rows, std::ostream& out,
                 ReportFormat format)
{
    if (format == ReportFormat::Json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const MetricsRow& row : rows)
            arr.push_back(row_to_json(row));
        out << arr.dump(2) << "\n";
        return;
    }
    out << "scene,frame,method,candidates,fp,fn,t_boxes,t_broad,t_classify,"
           "t_narrow,peak_bytes,toi\r\n";
    for (const MetricsRow& row : rows) {
        std::ostringstream line;
        line.precision(17);
        line << csv_quote(row.scene) << ',' << row.frame << ','
             << csv_quote(row.method) << ',' << row.candidates << ',' << row.fp << ','
             << row.fn << ',' << row.t_boxes << ',' << row.t_broad << ','
             << row.t_classify << ',' << row.t_narrow << ',' << row.peak_bytes << ',';
        if (row.toi == kNoCollision)
            line << "inf";
        else
            line << row.toi;
        out << line.str() << "\r\n";
    }
}

void emit_report(const std::vector<MetricsRow>& rows, const std::string& path,
                 ReportFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidInput("emit_report: cannot open " + path);
    emit_report(rows, out, format);
}

std::vector<MetricsRow> parse_report_json(const std::string& text)
{
    const nlohmann::json arr = nlohmann::json::parse(text);
    std::vector<MetricsRow> rows;
    for (const nlohmann::json& j : arr) {
        MetricsRow row;
        row.scene = j.at("scene").get<std::string>();
        row.frame = j.at("frame").get<std::size_t>();
        row.method = j.at("method").get<std::string>();
        row.candidates = j.at("candidates").get<std::size_t>();
        row.fp = j.at("fp").get<std::size_t>();
        row.fn = j.at("fn").get<std::size_t>();
        row.t_boxes = j.at("t_boxes").get<double>();
        row.t_broad = j.at("t_broad").get<double>();
        row.t_classify = j.at("t_classify").get<double>();
        row.t_narrow = j.at("t_narrow").get<double>();
        row.peak_bytes = j.at("peak_bytes").get<std::size_t>();
        row.toi = j.at("toi").is_null() ? kNoCollision : j.at("toi").get<double>();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ScalingRow> scaling_probe(const SceneStep& scene,
                                      const std::vector<double>& fractions,
                                      const PipelineConfig& cfg, std::uint64_t seed,
                                      unsigned reps)
{
    for (const double f : fractions)
        if (!(f > 0.0 && f <= 1.0))
            throw ConfigError("scaling_probe: fractions must lie in (0, 1]");

    const std::vector<Aabb> boxes = build_boxes(scene, cfg.inflation, cfg.threads);
    std::vector<ScalingRow> rows;
    for (const double fraction : fractions) {
        // Seeded Fisher-Yates prefix: the same seed always picks the same
        // subsample, independent of the other fractions requested.
        Rng rng(seed);
        std::vector<std::size_t> order(boxes.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        const std::size_t take = std::max<std::size_t>(
            1, static_cast<std::size_t>(fraction * static_cast<double>(boxes.size())));
        for (std::size_t i = 0; i < take; ++i)
            std::swap(order[i], order[i + rng.next_below(order.size() - i)]);
        std::vector<Aabb> sample(take);
        for (std::size_t i = 0; i < take; ++i)
            sample[i] = boxes[order[i]];

        ScalingRow row;
        row.fraction = fraction;
        row.box_count = take;
        std::vector<double> broad_t, narrow_t;
        for (unsigned rep = 0; rep < std::max(1u, reps); ++rep) {
            const auto t0 = Clock::now();
            std::vector<CandidatePair> cands;
            switch (cfg.broad_method) {
            case BroadMethod::STQ:
                cands = stq(sample, scene, cfg.threads);
                break;
            case BroadMethod::BF:
                cands = bf(sample, scene, cfg.threads);
                break;
            case BroadMethod::SAP:
                cands = sap(sample, scene, cfg.threads);
                break;
            }
            const auto t1 = Clock::now();
            const ClassifiedQueries classified = classify(cands, scene);
            std::vector<NarrowQuery> queries = classified.vertex_face;
            queries.insert(queries.end(), classified.edge_edge.begin(),
                           classified.edge_edge.end());
            narrow_phase(queries, cfg.narrow, cfg.threads);
            const auto t2 = Clock::now();
            broad_t.push_back(std::chrono::duration<double>(t1 - t0).count());
            narrow_t.push_back(std::chrono::duration<double>(t2 - t1).count());
        }
        row.broad_time = median(broad_t);
        row.narrow_time = median(narrow_t);
        rows.push_back(row);
    }
    return rows;
}

double loglog_slope(const std::vector<ScalingRow>& rows)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (const ScalingRow& row : rows) {
        if (row.broad_time <= 0 || row.box_count == 0)
            continue;
        const double x = std::log(static_cast<double>(row.box_count));
        const double y = std::log(row.broad_time);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += y * x;
        ++n;
    }
    if (n < 2)
        return 0.0;
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

std::vector<ThreadScalingRow> thread_scaling(const SceneStep& scene,
                                             const std::vector<unsigned>& counts,
                                             BroadMethod method, unsigned reps)
{
    const std::vector<Aabb> boxes = build_boxes(scene);
    std::vector<ThreadScalingRow> rows;
    for (const unsigned threads : counts) {
        std::vector<double> times;
        for (unsigned rep = 0; rep < std::max(1u, reps); ++rep) {
            const auto t0 = Clock::now();
            switch (method) {
            case BroadMethod::STQ:
                stq(boxes, scene, threads);
                break;
            case BroadMethod::BF:
                bf(boxes, scene, threads);
                break;
            case BroadMethod::SAP:
                sap(boxes, scene, threads);
                break;
            }
            times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
        }
        rows.push_back({ threads, median(times) });
    }
    return rows;
}

SceneStep make_cloth_scene(std::size_t nx, std::size_t ny, double jitter, double drop,
                           std::uint64_t seed)
{
    if (nx < 2 || ny < 2)
        throw ConfigError("make_cloth_scene: grid must be at least 2x2");
    Rng rng(seed);
    SceneStep scene;
    const auto jit = [&] { return rng.uniform(-jitter, jitter); };

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const Vec3 p0 { static_cast<double>(i) + jit(), drop + jit() * 0.5,
                            static_cast<double>(j) + jit() };
            const Vec3 p1 { p0[0] + jit(), p0[1] - drop + jit() * 0.5, p0[2] + jit() };
            scene.vertices_t0.push_back(p0);
            scene.vertices_t1.push_back(p1);
        }
    }
    const auto at = [nx](std::size_t i, std::size_t j) {
        return static_cast<std::uint32_t>(j * nx + i);
    };
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            scene.faces.push_back({ at(i, j), at(i + 1, j), at(i, j + 1) });
            scene.faces.push_back({ at(i + 1, j), at(i + 1, j + 1), at(i, j + 1) });
        }
    }

    // Static floor mid-fall, large enough to catch the jittered grid.
    const double y = drop * 0.5;
    const double lo = -1.0 - jitter;
    const double hx = static_cast<double>(nx) + jitter;
    const double hz = static_cast<double>(ny) + jitter;
    const std::uint32_t base = static_cast<std::uint32_t>(scene.vertices_t0.size());
    const Vec3 floor[4] = { { lo, y, lo }, { hx, y, lo }, { hx, y, hz }, { lo, y, hz } };
    for (const Vec3& v : floor) {
        scene.vertices_t0.push_back(v);
        scene.vertices_t1.push_back(v);
    }
    scene.faces.push_back({ base, base + 1, base + 2 });
    scene.faces.push_back({ base, base + 2, base + 3 });

    // derive the edge list from the faces
    for (const auto& f : scene.faces)
        for (int e = 0; e < 3; ++e) {
            const std::uint32_t a = f[e], b = f[(e + 1) % 3];
            scene.edges.push_back({ std::min(a, b), std::max(a, b) });
        }
    std::sort(scene.edges.begin(), scene.edges.end());
    scene.edges.erase(std::unique(scene.edges.begin(), scene.edges.end()),
                      scene.edges.end());
    return scene;
}

SceneStep make_box_soup(std::size_t count, double region, double size, double motion,
                        std::uint64_t seed)
{
    Rng rng(seed);
    SceneStep scene;
    for (std::size_t b = 0; b < count; ++b) {
        const Vec3 center { rng.uniform(0.0, region), rng.uniform(0.0, region),
                            rng.uniform(0.0, region) };
        const Vec3 half { rng.uniform(size * 0.25, size), rng.uniform(size * 0.25, size),
                          rng.uniform(size * 0.25, size) };
        const Vec3 move { rng.uniform(-motion, motion), rng.uniform(-motion, motion),
                          rng.uniform(-motion, motion) };
        const std::uint32_t base = static_cast<std::uint32_t>(scene.vertices_t0.size());
        // jitter keeps contacts generic: exactly axis-aligned geometry makes
        // whole coplanar regions touch at once, which blows up interval queues
        const double jitter = 0.05 * size;
        for (int corner = 0; corner < 8; ++corner) {
            const Vec3 v { center[0] + ((corner & 1) ? half[0] : -half[0]),
                           center[1] + ((corner & 2) ? half[1] : -half[1]),
                           center[2] + ((corner & 4) ? half[2] : -half[2]) };
            const Vec3 j0 { rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter),
                            rng.uniform(-jitter, jitter) };
            const Vec3 j1 { rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter),
                            rng.uniform(-jitter, jitter) };
            scene.vertices_t0.push_back(v + j0);
            scene.vertices_t1.push_back(v + move + j1);
        }
        // 12 triangles over the 6 faces of the cube
        static constexpr std::uint32_t quads[6][4] = {
            { 0, 1, 3, 2 }, { 4, 6, 7, 5 }, { 0, 4, 5, 1 },
            { 2, 3, 7, 6 }, { 0, 2, 6, 4 }, { 1, 5, 7, 3 },
        };
        for (const auto& q : quads) {
            scene.faces.push_back({ base + q[0], base + q[1], base + q[2] });
            scene.faces.push_back({ base + q[0], base + q[2], base + q[3] });
        }
    }
    for (const auto& f : scene.faces)
        for (int e = 0; e < 3; ++e) {
            const std::uint32_t a = f[e], b = f[(e + 1) % 3];
            scene.edges.push_back({ std::min(a, b), std::max(a, b) });
        }
    std::sort(scene.edges.begin(), scene.edges.end());
    scene.edges.erase(std::unique(scene.edges.begin(), scene.edges.end()),
                      scene.edges.end());
    return scene;
}

} // namespace ccdkit
