#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

namespace ccdkit {

// Closed double interval with outward widening after every inexact operation.
// Round-to-nearest results are within half an ulp of the exact value, so one
// nextafter step per bound encloses it. This carries all evaluation rounding
// error inside the interval, which is what lets the narrow-phase tolerance
// cube degenerate to the minimum-separation cube.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    static Interval point(double x) { return { x, x }; }

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

namespace detail {
    // Bit-level nextafter(x, +/-inf): the libm call is the narrow-phase hot
    // path, and this keeps the exact same values for every finite input.
    // Near-zero results widen to +/-kFlush instead of the adjacent double.
    // This is vastly wider than half an ulp (still 1e-244 below the narrow
    // phase tolerances), but it keeps interval bounds out of the subnormal
    // range: static geometry produces exact-zero deltas, and chains of
    // subnormal multiplies cost ~100 cycles each in microcode.
    inline constexpr double kFlush = 1e-250;

    inline double up(double x)
    {
        if (std::isnan(x) || x == std::numeric_limits<double>::infinity())
            return x;
        if (x < kFlush && x > -kFlush)
            return kFlush;
        std::uint64_t b;
        std::memcpy(&b, &x, sizeof b);
        b += 1 - ((b >> 62) & 2); // +1 toward +inf for x >= 0, -1 for x < 0
        std::memcpy(&x, &b, sizeof x);
        return x;
    }

    inline double down(double x) { return -up(-x); }
} // namespace detail

inline Interval operator+(const Interval& a, const Interval& b)
{
    return { detail::down(a.lo + b.lo), detail::up(a.hi + b.hi) };
}

inline Interval operator-(const Interval& a, const Interval& b)
{
    return { detail::down(a.lo - b.hi), detail::up(a.hi - b.lo) };
}

inline Interval operator*(const Interval& a, const Interval& b)
{
    const double p1 = a.lo * b.lo;
    const double p2 = a.lo * b.hi;
    const double p3 = a.hi * b.lo;
    const double p4 = a.hi * b.hi;
    return { detail::down(std::min({ p1, p2, p3, p4 })),
             detail::up(std::max({ p1, p2, p3, p4 })) };
}

inline Interval hull(const Interval& a, const Interval& b)
{
    return { std::min(a.lo, b.lo), std::max(a.hi, b.hi) };
}

struct IntervalVec3 {
    Interval x, y, z;

    Interval& operator[](int c) { return c == 0 ? x : c == 1 ? y : z; }
    const Interval& operator[](int c) const { return c == 0 ? x : c == 1 ? y : z; }

    double max_width() const
    {
        return std::max({ x.width(), y.width(), z.width() });
    }
};

inline IntervalVec3 hull(const IntervalVec3& a, const IntervalVec3& b)
{
    return { hull(a.x, b.x), hull(a.y, b.y), hull(a.z, b.z) };
}

} // namespace ccdkit
