#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ccdkit/aabb.hpp"
#include "ccdkit/scene.hpp"
#include "helpers.hpp"

using namespace ccdkit;

TEST_CASE("round_down/up_reduced on exactly representable values")
{
    CHECK(round_down_reduced(0.0) == 0.0f);
    CHECK(round_up_reduced(0.0) == 0.0f);
    CHECK(round_down_reduced(1.0) == 1.0f);
    CHECK(round_up_reduced(1.0) == 1.0f);
    CHECK(round_down_reduced(-2.5) == -2.5f);
    CHECK(round_up_reduced(-2.5) == -2.5f);
}

TEST_CASE("round_down_reduced(0.1) steps below the nearest float")
{
    // nearest float to 0.1 lies above the double value, so the result must be
    // its single-precision predecessor
    const float nearest = static_cast<float>(0.1);
    REQUIRE(static_cast<double>(nearest) > 0.1);
    const float r = round_down_reduced(0.1);
    CHECK(r == std::nextafterf(nearest, -1.0f));
    CHECK(static_cast<double>(r) <= 0.1);
    CHECK(round_up_reduced(0.1) == nearest);
}

TEST_CASE("rounding is maximal/minimal and idempotent over random doubles")
{
    Rng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double x = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-20.0, 20.0));
        const float down = round_down_reduced(x);
        const float up = round_up_reduced(x);
        REQUIRE(static_cast<double>(down) <= x);
        REQUIRE(static_cast<double>(up) >= x);
        // maximality/minimality: one representable step crosses x
        REQUIRE(static_cast<double>(std::nextafterf(down, INFINITY)) > x);
        REQUIRE(static_cast<double>(std::nextafterf(up, -INFINITY)) < x);
        // idempotence
        REQUIRE(round_down_reduced(static_cast<double>(down)) == down);
        REQUIRE(round_up_reduced(static_cast<double>(up)) == up);
    }
}

TEST_CASE("rounding rejects non-finite input")
{
    CHECK_THROWS_AS(round_down_reduced(std::nan("")), InvalidInput);
    CHECK_THROWS_AS(round_up_reduced(INFINITY), InvalidInput);
}

TEST_CASE("build_boxes on a static vertex gives a zero-extent box")
{
    SceneStep s;
    s.vertices_t0 = { { 0, 0, 0 } };
    s.vertices_t1 = { { 0, 0, 0 } };
    const auto boxes = build_boxes(s);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].min_corner == std::array<float, 3> { 0, 0, 0 });
    CHECK(boxes[0].max_corner == std::array<float, 3> { 0, 0, 0 });
    CHECK(boxes[0].owner == PrimitiveId { PrimitiveKind::Vertex, 0 });
}

TEST_CASE("build_boxes on a moving edge spans both snapshots")
{
    SceneStep s;
    s.vertices_t0 = { { 0, 0, 0 }, { 1, 0, 0 } };
    s.vertices_t1 = { { 0, 0, 1 }, { 1, 0, 1 } };
    s.edges = { { 0, 1 } };
    const auto boxes = build_boxes(s);
    REQUIRE(boxes.size() == 3); // two vertices, one edge
    const Aabb& edge = boxes[2];
    CHECK(edge.owner == PrimitiveId { PrimitiveKind::Edge, 0 });
    CHECK(edge.min_corner == std::array<float, 3> { 0, 0, 0 });
    CHECK(edge.max_corner == std::array<float, 3> { 1, 0, 1 });
}

namespace {

SceneStep random_triangle_soup(Rng& rng, std::size_t triangles)
{
    SceneStep s;
    for (std::size_t t = 0; t < triangles; ++t) {
        const std::uint32_t base = static_cast<std::uint32_t>(s.vertices_t0.size());
        for (int v = 0; v < 3; ++v) {
            Vec3 p0, p1;
            for (int c = 0; c < 3; ++c) {
                p0[c] = rng.uniform(-10.0, 10.0) * std::pow(10.0, rng.uniform(-3.0, 3.0));
                p1[c] = p0[c] + rng.uniform(-1.0, 1.0);
            }
            s.vertices_t0.push_back(p0);
            s.vertices_t1.push_back(p1);
        }
        s.faces.push_back({ base, base + 1, base + 2 });
        s.edges.push_back({ base, base + 1 });
        s.edges.push_back({ base + 1, base + 2 });
        s.edges.push_back({ base, base + 2 });
    }
    return s;
}

bool contains(const Aabb& box, const Vec3& p)
{
    for (int c = 0; c < 3; ++c)
        if (static_cast<double>(box.min_corner[c]) > p[c]
            || static_cast<double>(box.max_corner[c]) < p[c])
            return false;
    return true;
}

std::vector<Vec3> primitive_vertices(const SceneStep& s, PrimitiveId id, bool t1)
{
    const auto& verts = t1 ? s.vertices_t1 : s.vertices_t0;
    switch (id.kind) {
    case PrimitiveKind::Vertex:
        return { verts[id.index] };
    case PrimitiveKind::Edge:
        return { verts[s.edges[id.index][0]], verts[s.edges[id.index][1]] };
    case PrimitiveKind::Face:
        return { verts[s.faces[id.index][0]], verts[s.faces[id.index][1]],
                 verts[s.faces[id.index][2]] };
    }
    return {};
}

} // namespace

TEST_CASE("conservative containment over >= 1e5 random primitives")
{
    Rng rng(11);
    std::size_t checked = 0;
    while (checked < 100000) {
        const SceneStep s = random_triangle_soup(rng, 500);
        const auto boxes = build_boxes(s);
        REQUIRE(boxes.size() == s.primitive_count());
        for (const Aabb& box : boxes) {
            for (const Vec3& p : primitive_vertices(s, box.owner, false))
                REQUIRE(contains(box, p));
            for (const Vec3& p : primitive_vertices(s, box.owner, true))
                REQUIRE(contains(box, p));
        }
        checked += boxes.size();
    }
}

TEST_CASE("containment holds at densely sampled interior times")
{
    Rng rng(12);
    const SceneStep s = random_triangle_soup(rng, 50);
    const auto boxes = build_boxes(s);
    for (const Aabb& box : boxes) {
        const auto at0 = primitive_vertices(s, box.owner, false);
        const auto at1 = primitive_vertices(s, box.owner, true);
        for (int step = 0; step <= 64; ++step) {
            const double t = step / 64.0;
            for (std::size_t v = 0; v < at0.size(); ++v) {
                const Vec3 p = (1.0 - t) * at0[v] + t * at1[v];
                REQUIRE(contains(box, p));
            }
        }
    }
}

TEST_CASE("inflation is monotone and pads zero-extent axes")
{
    Rng rng(13);
    const SceneStep s = random_triangle_soup(rng, 100);
    const auto tight = build_boxes(s, 0.0);
    const auto small = build_boxes(s, 0.005);
    const auto big = build_boxes(s, 0.01);
    for (std::size_t i = 0; i < tight.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            REQUIRE(small[i].min_corner[c] <= tight[i].min_corner[c]);
            REQUIRE(small[i].max_corner[c] >= tight[i].max_corner[c]);
            REQUIRE(big[i].min_corner[c] <= small[i].min_corner[c]);
            REQUIRE(big[i].max_corner[c] >= small[i].max_corner[c]);
        }

    SceneStep flat;
    flat.vertices_t0 = { { 0, 0, 0 } };
    flat.vertices_t1 = { { 0, 0, 0 } };
    const auto padded = build_boxes(flat, 0.01);
    for (int c = 0; c < 3; ++c) {
        CHECK(static_cast<double>(padded[0].min_corner[c]) <= -kZeroExtentInflation);
        CHECK(static_cast<double>(padded[0].max_corner[c]) >= kZeroExtentInflation);
    }
}

TEST_CASE("build_boxes is schedule independent")
{
    Rng rng(14);
    const SceneStep s = random_triangle_soup(rng, 300);
    const auto serial = build_boxes(s, 0.01, 1);
    const auto parallel = build_boxes(s, 0.01, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        REQUIRE(serial[i].min_corner == parallel[i].min_corner);
        REQUIRE(serial[i].max_corner == parallel[i].max_corner);
        REQUIRE(serial[i].owner == parallel[i].owner);
    }
}

TEST_CASE("scene validation rejects malformed input")
{
    SceneStep s;
    s.vertices_t0 = { { 0, 0, 0 }, { 1, 0, 0 } };
    s.vertices_t1 = { { 0, 0, 0 } };
    CHECK_THROWS_AS(s.validate(), InvalidInput); // length mismatch

    s.vertices_t1 = { { 0, 0, 0 }, { 1, 0, 0 } };
    CHECK_NOTHROW(s.validate());

    s.edges = { { 0, 2 } };
    CHECK_THROWS_AS(s.validate(), InvalidInput); // index out of range
    s.edges = { { 1, 1 } };
    CHECK_THROWS_AS(s.validate(), InvalidInput); // repeated endpoint
    s.edges.clear();

    s.vertices_t0[0][1] = std::nan("");
    CHECK_THROWS_AS(s.validate(), InvalidInput); // non-finite coordinate
}

TEST_CASE("OBJ pair loading round-trips a generated scene")
{
    const SceneStep scene = make_cloth_scene(4, 4, 0.01, 1.0, 99);
    const auto [p0, p1] = testutil::write_scene("geom_roundtrip", scene);
    const SceneStep loaded = load_obj_pair(p0, p1);
    CHECK(loaded.vertices_t0 == scene.vertices_t0);
    CHECK(loaded.vertices_t1 == scene.vertices_t1);
    CHECK(loaded.faces == scene.faces);
    CHECK(loaded.edges == scene.edges); // generator stores sorted unique face edges
    std::remove(p0.c_str());
    std::remove(p1.c_str());
}

TEST_CASE("OBJ loading rejects mismatched connectivity")
{
    SceneStep a = testutil::plane_crossing_scene();
    const auto [p0, p1] = testutil::write_scene("geom_mismatch", a);
    // rewrite frame 1 with one vertex fewer
    testutil::write_obj(p1, { a.vertices_t1[0], a.vertices_t1[1], a.vertices_t1[2] }, {});
    CHECK_THROWS_AS(load_obj_pair(p0, p1), InvalidInput);
    std::remove(p0.c_str());
    std::remove(p1.c_str());
}

TEST_CASE("manifest loading resolves relative paths")
{
    {
        std::ofstream m("geom_manifest.json");
        m << R"([{"t0": "frame0.obj", "t1": "frame1.obj"}])";
    }
    const auto pairs = load_manifest("geom_manifest.json");
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first.ends_with("frame0.obj"));
    CHECK(pairs[0].second.ends_with("frame1.obj"));
    std::remove("geom_manifest.json");
}
