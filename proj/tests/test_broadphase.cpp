#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ccdkit/broadphase.hpp"
#include "helpers.hpp"

using namespace ccdkit;

namespace {

// A scene of isolated primitives whose boxes we can place freely: `n` vertices
// plus `n` single-triangle faces (each face on its own three mesh vertices),
// so every vertex-face pairing is non-adjacent.
struct BoxFixture {
    SceneStep scene;
    std::vector<Aabb> boxes;
};

BoxFixture random_boxes(Rng& rng, std::size_t n, Vec3 stretch = { 1, 1, 1 })
{
    BoxFixture fx;
    const std::size_t n_verts = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 lo, size;
        for (int c = 0; c < 3; ++c) {
            lo[c] = rng.uniform(0.0, 10.0) * stretch[c];
            size[c] = rng.uniform(0.0, 2.0) * stretch[c];
        }
        Aabb box;
        for (int c = 0; c < 3; ++c) {
            box.min_corner[c] = static_cast<float>(lo[c]);
            box.max_corner[c] = static_cast<float>(lo[c] + size[c]);
        }
        if (i < n_verts) {
            box.owner = { PrimitiveKind::Vertex,
                          static_cast<std::uint32_t>(fx.scene.vertices_t0.size()) };
            fx.scene.vertices_t0.push_back(lo);
            fx.scene.vertices_t1.push_back(lo);
        } else {
            const std::uint32_t base
                = static_cast<std::uint32_t>(fx.scene.vertices_t0.size());
            for (int v = 0; v < 3; ++v) {
                fx.scene.vertices_t0.push_back(lo);
                fx.scene.vertices_t1.push_back(lo);
            }
            box.owner = { PrimitiveKind::Face,
                          static_cast<std::uint32_t>(fx.scene.faces.size()) };
            fx.scene.faces.push_back({ base, base + 1, base + 2 });
        }
        fx.boxes.push_back(box);
    }
    return fx;
}

} // namespace

TEST_CASE("choose_axis picks the maximal-variance axis")
{
    const auto centered = [](Vec3 center) {
        Aabb box;
        for (int c = 0; c < 3; ++c) {
            box.min_corner[c] = static_cast<float>(center[c]);
            box.max_corner[c] = static_cast<float>(center[c]);
        }
        return box;
    };
    CHECK(choose_axis({ centered({ 0, 0, 0 }), centered({ 10, 0, 0 }),
                        centered({ 20, 0, 0 }) })
          == 0);
    CHECK(choose_axis({ centered({ 3, 4, 5 }) }) == 0); // all-zero variance tie
    CHECK_THROWS_AS(choose_axis({}), InvalidInput);
}

TEST_CASE("choose_axis matches a direct variance computation on stretched boxes")
{
    Rng rng(21);
    const BoxFixture fx = random_boxes(rng, 1000, { 1, 1, 100 });
    CHECK(choose_axis(fx.boxes) == 2);

    // direct computation over centers
    double mean[3] = {}, var[3] = {};
    for (const Aabb& b : fx.boxes)
        for (int c = 0; c < 3; ++c)
            mean[c] += 0.5 * (static_cast<double>(b.min_corner[c]) + b.max_corner[c]);
    for (int c = 0; c < 3; ++c)
        mean[c] /= static_cast<double>(fx.boxes.size());
    for (const Aabb& b : fx.boxes)
        for (int c = 0; c < 3; ++c) {
            const double d
                = 0.5 * (static_cast<double>(b.min_corner[c]) + b.max_corner[c]) - mean[c];
            var[c] += d * d;
        }
    const int direct
        = static_cast<int>(std::max_element(var, var + 3) - var);
    CHECK(choose_axis(fx.boxes) == direct);
}

TEST_CASE("stq trivial cases")
{
    Rng rng(22);
    BoxFixture fx = random_boxes(rng, 2);
    // overlap in x and y but not z
    fx.boxes[0].min_corner = { 0, 0, 0 };
    fx.boxes[0].max_corner = { 2, 2, 1 };
    fx.boxes[1].min_corner = { 1, 1, 5 };
    fx.boxes[1].max_corner = { 3, 3, 6 };
    CHECK(stq(fx.boxes, fx.scene).empty());

    CHECK(stq({ fx.boxes[0] }, fx.scene).empty()); // one box, no pairs
    CHECK(stq({}, fx.scene).empty());

    // identical boxes, vertex vs non-adjacent face
    fx.boxes[1] = fx.boxes[0];
    fx.boxes[1].owner = { PrimitiveKind::Face, 0 };
    fx.boxes[0].owner = { PrimitiveKind::Vertex, 0 };
    const auto pairs = stq(fx.boxes, fx.scene);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].left == PrimitiveId { PrimitiveKind::Vertex, 0 });
    CHECK(pairs[0].right == PrimitiveId { PrimitiveKind::Face, 0 });
}

TEST_CASE("bf trivial cases")
{
    Rng rng(23);
    BoxFixture fx = random_boxes(rng, 6);
    // disjoint boxes on a line with gaps
    for (std::size_t i = 0; i < fx.boxes.size(); ++i) {
        fx.boxes[i].min_corner = { static_cast<float>(3 * i), 0, 0 };
        fx.boxes[i].max_corner = { static_cast<float>(3 * i + 1), 1, 1 };
    }
    CHECK(bf(fx.boxes, fx.scene).empty());
}

TEST_CASE("sap handles nested boxes and empty input")
{
    CHECK(sap({}, SceneStep {}).empty());
    Rng rng(24);
    BoxFixture fx = random_boxes(rng, 2);
    fx.boxes[0].owner = { PrimitiveKind::Vertex, 0 };
    fx.boxes[0].min_corner = { 0, 0, 0 };
    fx.boxes[0].max_corner = { 10, 10, 10 };
    fx.boxes[1].owner = { PrimitiveKind::Face, 0 };
    fx.boxes[1].min_corner = { 4, 4, 4 };
    fx.boxes[1].max_corner = { 5, 5, 5 };
    const auto pairs = sap(fx.boxes, fx.scene);
    REQUIRE(pairs.size() == 1);
}

TEST_CASE("stq = sap = bf on random box sets")
{
    Rng rng(25);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.next_below(500);
        const BoxFixture fx = random_boxes(rng, n);
        const auto s = stq(fx.boxes, fx.scene);
        const auto b = bf(fx.boxes, fx.scene);
        const auto p = sap(fx.boxes, fx.scene);
        REQUIRE(s == b);
        REQUIRE(p == b);
    }
}

TEST_CASE("stq queue stays under k-1 with non-increasing rounds")
{
    Rng rng(26);
    for (int trial = 0; trial < 10; ++trial) {
        const BoxFixture fx = random_boxes(rng, 200 + rng.next_below(800));
        StqStats stats;
        stq(fx.boxes, fx.scene, 1, &stats);
        CHECK(stats.max_queue <= fx.boxes.size() - 1);
        for (std::size_t r = 1; r < stats.round_sizes.size(); ++r)
            REQUIRE(stats.round_sizes[r] <= stats.round_sizes[r - 1]);
    }
}

TEST_CASE("broad phase output is identical across thread counts")
{
    Rng rng(27);
    const BoxFixture fx = random_boxes(rng, 900);
    const auto one = stq(fx.boxes, fx.scene, 1);
    CHECK(stq(fx.boxes, fx.scene, 2) == one);
    CHECK(stq(fx.boxes, fx.scene, 8) == one);
    CHECK(bf(fx.boxes, fx.scene, 4) == bf(fx.boxes, fx.scene, 1));
}

TEST_CASE("sweep ranges partition the candidate set")
{
    Rng rng(28);
    const BoxFixture fx = random_boxes(rng, 600);
    const auto full = stq(fx.boxes, fx.scene);
    const std::size_t mid = fx.boxes.size() / 3;
    auto lo = stq(fx.boxes, fx.scene, 1, nullptr, { 0, mid });
    const auto hi = stq(fx.boxes, fx.scene, 1, nullptr, { mid, fx.boxes.size() });
    lo.insert(lo.end(), hi.begin(), hi.end());
    std::sort(lo.begin(), lo.end());
    lo.erase(std::unique(lo.begin(), lo.end()), lo.end());
    CHECK(lo == full);
}

TEST_CASE("classify gathers points and enforces exclusions")
{
    SceneStep s = testutil::plane_crossing_scene();

    const CandidatePair vf = make_pair_canonical({ PrimitiveKind::Face, 0 },
                                                 { PrimitiveKind::Vertex, 3 });
    const ClassifiedQueries direct = classify({ vf }, s);
    REQUIRE(direct.vertex_face.size() == 1);
    CHECK(direct.edge_edge.empty());
    const NarrowQuery& q = direct.vertex_face[0];
    CHECK(q.kind == QueryKind::VertexFace);
    CHECK(q.points_t0[0] == s.vertices_t0[3]); // the vertex
    CHECK(q.points_t0[1] == s.vertices_t0[0]);
    CHECK(q.points_t0[2] == s.vertices_t0[1]);
    CHECK(q.points_t0[3] == s.vertices_t0[2]);
    CHECK(q.points_t1[0] == s.vertices_t1[3]);
    CHECK(q.source == vf);

    // edges sharing an endpoint are dropped
    const CandidatePair ee = make_pair_canonical({ PrimitiveKind::Edge, 0 },
                                                 { PrimitiveKind::Edge, 1 });
    const ClassifiedQueries shared = classify({ ee }, s);
    CHECK(shared.vertex_face.empty());
    CHECK(shared.edge_edge.empty());

    // face-face pairs are not a narrow-phase kind
    SceneStep two = s;
    two.vertices_t0.push_back({ 5, 5, 5 });
    two.vertices_t0.push_back({ 6, 5, 5 });
    two.vertices_t0.push_back({ 5, 6, 5 });
    two.vertices_t1 = two.vertices_t0;
    two.faces.push_back({ 4, 5, 6 });
    const CandidatePair ff = make_pair_canonical({ PrimitiveKind::Face, 0 },
                                                 { PrimitiveKind::Face, 1 });
    const ClassifiedQueries faces = classify({ ff }, two);
    CHECK(faces.vertex_face.empty());
    CHECK(faces.edge_edge.empty());

    const CandidatePair bad = make_pair_canonical({ PrimitiveKind::Vertex, 0 },
                                                  { PrimitiveKind::Face, 9 });
    CHECK_THROWS_AS(classify({ bad }, s), InvalidInput);
}
