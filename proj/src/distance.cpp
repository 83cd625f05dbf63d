#include "ccdkit/distance.hpp"

#include <algorithm>
#include <cmath>

namespace ccdkit {

namespace {

    Vec3 closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b)
    {
        const Vec3 ab = b - a;
        const double len2 = squared_norm(ab);
        if (len2 == 0.0)
            return a;
        double t = dot(p - a, ab) / len2;
        t = std::clamp(t, 0.0, 1.0);
        return a + t * ab;
    }

} // namespace

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    // Ericson-style closest-point-on-triangle via barycentric regions.
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = dot(ab, ap);
    const double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0)
        return std::sqrt(squared_norm(p - a));

    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp);
    const double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3)
        return std::sqrt(squared_norm(p - b));

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return std::sqrt(squared_norm(p - (a + v * ab)));
    }

    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp);
    const double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6)
        return std::sqrt(squared_norm(p - c));

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return std::sqrt(squared_norm(p - (a + w * ac)));
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return std::sqrt(squared_norm(p - (b + w * (c - b))));
    }

    const double denom = va + vb + vc;
    if (denom <= 0.0) {
        // Degenerate triangle: fall back to the closest edge.
        const double da = squared_norm(p - closest_on_segment(p, a, b));
        const double db = squared_norm(p - closest_on_segment(p, b, c));
        const double dc = squared_norm(p - closest_on_segment(p, c, a));
        return std::sqrt(std::min({ da, db, dc }));
    }
    const double v = vb / denom;
    const double w = vc / denom;
    return std::sqrt(squared_norm(p - (a + v * ab + w * ac)));
}

double segment_segment_distance(const Vec3& p0, const Vec3& p1,
                                const Vec3& q0, const Vec3& q1)
{
    const Vec3 d1 = p1 - p0;
    const Vec3 d2 = q1 - q0;
    const Vec3 r = p0 - q0;
    const double a = squared_norm(d1);
    const double e = squared_norm(d2);
    const double f = dot(d2, r);

    double s = 0.0, t = 0.0;
    if (a == 0.0 && e == 0.0) {
        // both segments are points
    } else if (a == 0.0) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e == 0.0) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double denom = a * e - b * b;
            s = denom != 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    const Vec3 cp = p0 + s * d1;
    const Vec3 cq = q0 + t * d2;
    return std::sqrt(squared_norm(cp - cq));
}

} // namespace ccdkit
