#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <utility>

#include "ccdkit/bench.hpp"
#include "ccdkit/rng.hpp"

namespace testutil {

inline void write_obj(const std::string& path, const std::vector<ccdkit::Vec3>& vertices,
                      const std::vector<std::array<std::uint32_t, 3>>& faces)
{
    std::ofstream out(path);
    out.precision(17);
    for (const ccdkit::Vec3& v : vertices)
        out << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
    for (const auto& f : faces)
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

// Writes <base>_t0.obj / <base>_t1.obj and returns their paths.
inline std::pair<std::string, std::string> write_scene(const std::string& base,
                                                       const ccdkit::SceneStep& scene)
{
    const std::string p0 = base + "_t0.obj";
    const std::string p1 = base + "_t1.obj";
    write_obj(p0, scene.vertices_t0, scene.faces);
    write_obj(p1, scene.vertices_t1, scene.faces);
    return { p0, p1 };
}

// Triangle fixed in the z=0 plane; a separate vertex crosses it at t = 0.5.
inline ccdkit::SceneStep plane_crossing_scene()
{
    ccdkit::SceneStep s;
    s.vertices_t0 = { { 0, 0, 0 }, { 1, 0, 0 }, { 0, 1, 0 }, { 0.25, 0.25, 1 } };
    s.vertices_t1 = { { 0, 0, 0 }, { 1, 0, 0 }, { 0, 1, 0 }, { 0.25, 0.25, -1 } };
    s.faces = { { 0, 1, 2 } };
    s.edges = { { 0, 1 }, { 0, 2 }, { 1, 2 } };
    return s;
}

inline ccdkit::NarrowQuery plane_crossing_query()
{
    ccdkit::NarrowQuery q;
    q.kind = ccdkit::QueryKind::VertexFace;
    q.points_t0 = { ccdkit::Vec3 { 0.25, 0.25, 1 }, { 0, 0, 0 }, { 1, 0, 0 }, { 0, 1, 0 } };
    q.points_t1 = { ccdkit::Vec3 { 0.25, 0.25, -1 }, { 0, 0, 0 }, { 1, 0, 0 }, { 0, 1, 0 } };
    return q;
}

// Random query with coordinates in the unit cube and motions up to `motion`.
inline ccdkit::NarrowQuery random_query(ccdkit::Rng& rng, ccdkit::QueryKind kind,
                                        double motion = 0.5)
{
    ccdkit::NarrowQuery q;
    q.kind = kind;
    for (int p = 0; p < 4; ++p)
        for (int c = 0; c < 3; ++c) {
            q.points_t0[p][c] = rng.uniform(0.0, 1.0);
            q.points_t1[p][c] = q.points_t0[p][c] + rng.uniform(-motion, motion);
        }
    return q;
}

} // namespace testutil
