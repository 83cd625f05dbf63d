#include "ccdkit/aabb.hpp"

#include <cmath>
#include <limits>

#include "ccdkit/parallel.hpp"

namespace ccdkit {

float round_down_reduced(double x)
{
    if (!std::isfinite(x))
        throw InvalidInput("round_down_reduced: non-finite input");
    float r = static_cast<float>(x); // round to nearest
    if (static_cast<double>(r) > x)
        r = std::nextafterf(r, -std::numeric_limits<float>::infinity());
    return r;
}

float round_up_reduced(double x)
{
    if (!std::isfinite(x))
        throw InvalidInput("round_up_reduced: non-finite input");
    float r = static_cast<float>(x);
    if (static_cast<double>(r) < x)
        r = std::nextafterf(r, std::numeric_limits<float>::infinity());
    return r;
}

namespace {

    struct Extent {
        Vec3 lo { std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity() };
        Vec3 hi { -std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity() };

        void absorb(const Vec3& p)
        {
            for (int c = 0; c < 3; ++c) {
                lo[c] = std::min(lo[c], p[c]);
                hi[c] = std::max(hi[c], p[c]);
            }
        }
    };

    Aabb finish_box(Extent ext, double inflation, PrimitiveId owner)
    {
        if (inflation > 0.0) {
            for (int c = 0; c < 3; ++c) {
                double pad = inflation * (ext.hi[c] - ext.lo[c]);
                if (pad == 0.0)
                    pad = kZeroExtentInflation;
                ext.lo[c] -= pad;
                ext.hi[c] += pad;
            }
        }
        Aabb box;
        box.owner = owner;
        for (int c = 0; c < 3; ++c) {
            box.min_corner[c] = round_down_reduced(ext.lo[c]);
            box.max_corner[c] = round_up_reduced(ext.hi[c]);
        }
        return box;
    }

} // namespace

std::vector<Aabb> build_boxes(const SceneStep& scene, double inflation, unsigned threads)
{
    scene.validate();
    if (inflation < 0.0)
        throw InvalidInput("build_boxes: inflation must be >= 0");

    const std::size_t nv = scene.vertices_t0.size();
    const std::size_t ne = scene.edges.size();
    const std::size_t nf = scene.faces.size();
    std::vector<Aabb> boxes(nv + ne + nf);

    const auto build_one = [&](std::size_t slot) {
        Extent ext;
        PrimitiveId owner;
        if (slot < nv) {
            owner = { PrimitiveKind::Vertex, static_cast<std::uint32_t>(slot) };
            ext.absorb(scene.vertices_t0[slot]);
            ext.absorb(scene.vertices_t1[slot]);
        } else if (slot < nv + ne) {
            const std::size_t i = slot - nv;
            owner = { PrimitiveKind::Edge, static_cast<std::uint32_t>(i) };
            for (const std::uint32_t v : scene.edges[i]) {
                ext.absorb(scene.vertices_t0[v]);
                ext.absorb(scene.vertices_t1[v]);
            }
        } else {
            const std::size_t i = slot - nv - ne;
            owner = { PrimitiveKind::Face, static_cast<std::uint32_t>(i) };
            for (const std::uint32_t v : scene.faces[i]) {
                ext.absorb(scene.vertices_t0[v]);
                ext.absorb(scene.vertices_t1[v]);
            }
        }
        boxes[slot] = finish_box(ext, inflation, owner);
    };

    parallel_chunks(boxes.size(), threads, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t slot = begin; slot < end; ++slot)
            build_one(slot);
    });
    return boxes;
}

} // namespace ccdkit
