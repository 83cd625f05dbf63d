#pragma once

#include "ccdkit/core.hpp"

namespace ccdkit {

// Minimum distance from p to triangle (a, b, c). Degenerate triangles reduce
// to segment/point distance.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Minimum distance between segments (p0, p1) and (q0, q1).
double segment_segment_distance(const Vec3& p0, const Vec3& p1,
                                const Vec3& q0, const Vec3& q1);

} // namespace ccdkit
