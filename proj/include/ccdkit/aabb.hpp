#pragma once

#include <array>
#include <vector>

#include "ccdkit/scene.hpp"

namespace ccdkit {

// Largest single-precision value r with (double)r <= x.
float round_down_reduced(double x);

// Smallest single-precision value r with (double)r >= x.
float round_up_reduced(double x);

// Reduced-precision box conservatively enclosing one primitive's swept
// trajectory: every double coordinate of the primitive at t=0 and t=1 lies in
// [min_corner, max_corner]. Linear motion makes the two endpoint snapshots
// sufficient.
struct Aabb {
    std::array<float, 3> min_corner {};
    std::array<float, 3> max_corner {};
    PrimitiveId owner;

    bool overlaps(const Aabb& other) const
    {
        for (int c = 0; c < 3; ++c) {
            if (min_corner[c] > other.max_corner[c] || other.min_corner[c] > max_corner[c])
                return false;
        }
        return true;
    }

    bool overlaps_axis(const Aabb& other, int axis) const
    {
        return min_corner[axis] <= other.max_corner[axis]
            && other.min_corner[axis] <= max_corner[axis];
    }
};

// Absolute padding applied to a zero-extent axis when inflation > 0. The
// inflation policy is per-axis: each axis grows by inflation * extent on both
// sides, with this floor for degenerate axes.
inline constexpr double kZeroExtentInflation = 1e-12;

// One box per vertex, then per edge, then per face, each in index order.
// Extents are computed in double precision over both snapshots, inflated in
// double precision, then rounded outward to single precision.
std::vector<Aabb> build_boxes(const SceneStep& scene, double inflation = 0.0,
                              unsigned threads = 1);

} // namespace ccdkit
