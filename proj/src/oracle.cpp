#include "ccdkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <queue>
#include <sstream>

#include <boost/multiprecision/gmp.hpp>

#include "ccdkit/parallel.hpp"

namespace ccdkit {

namespace {

    using Rational = boost::multiprecision::mpq_rational;
    using Integer = boost::multiprecision::mpz_int;

    double to_double_down(const Rational& r)
    {
        double d = r.convert_to<double>();
        while (Rational(d) > r)
            d = std::nextafter(d, -std::numeric_limits<double>::infinity());
        while (Rational(std::nextafter(d, std::numeric_limits<double>::infinity())) <= r)
            d = std::nextafter(d, std::numeric_limits<double>::infinity());
        return d;
    }

    double to_double_up(const Rational& r)
    {
        double d = r.convert_to<double>();
        while (Rational(d) < r)
            d = std::nextafter(d, std::numeric_limits<double>::infinity());
        while (Rational(std::nextafter(d, -std::numeric_limits<double>::infinity())) >= r)
            d = std::nextafter(d, -std::numeric_limits<double>::infinity());
        return d;
    }

    // ---------------------------------------------------------------- polys

    using Poly = std::vector<Rational>; // ascending coefficients, trimmed

    void trim(Poly& p)
    {
        while (!p.empty() && p.back() == 0)
            p.pop_back();
    }

    int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

    Poly add(const Poly& a, const Poly& b)
    {
        Poly r(std::max(a.size(), b.size()), Rational(0));
        for (std::size_t i = 0; i < a.size(); ++i)
            r[i] += a[i];
        for (std::size_t i = 0; i < b.size(); ++i)
            r[i] += b[i];
        trim(r);
        return r;
    }

    Poly sub(const Poly& a, const Poly& b)
    {
        Poly r(std::max(a.size(), b.size()), Rational(0));
        for (std::size_t i = 0; i < a.size(); ++i)
            r[i] += a[i];
        for (std::size_t i = 0; i < b.size(); ++i)
            r[i] -= b[i];
        trim(r);
        return r;
    }

    Poly mul(const Poly& a, const Poly& b)
    {
        if (a.empty() || b.empty())
            return {};
        Poly r(a.size() + b.size() - 1, Rational(0));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                r[i + j] += a[i] * b[j];
        trim(r);
        return r;
    }

    Poly derivative(const Poly& p)
    {
        if (p.size() <= 1)
            return {};
        Poly r(p.size() - 1);
        for (std::size_t i = 1; i < p.size(); ++i)
            r[i - 1] = p[i] * static_cast<int>(i);
        trim(r);
        return r;
    }

    Rational eval(const Poly& p, const Rational& x)
    {
        Rational acc(0);
        for (std::size_t i = p.size(); i-- > 0;)
            acc = acc * x + p[i];
        return acc;
    }

    // remainder of a / b, b non-zero
    Poly remainder(Poly a, const Poly& b)
    {
        trim(a);
        while (degree(a) >= degree(b) && !a.empty()) {
            const Rational factor = a.back() / b.back();
            const std::size_t shift = a.size() - b.size();
            for (std::size_t i = 0; i < b.size(); ++i)
                a[shift + i] -= factor * b[i];
            a.pop_back();
            trim(a);
        }
        return a;
    }

    // exact division, remainder known to vanish
    Poly divide_exact(Poly a, const Poly& b)
    {
        Poly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, Rational(0));
        while (degree(a) >= degree(b) && !a.empty()) {
            const Rational factor = a.back() / b.back();
            const std::size_t shift = a.size() - b.size();
            q[shift] = factor;
            for (std::size_t i = 0; i < b.size(); ++i)
                a[shift + i] -= factor * b[i];
            a.pop_back();
            trim(a);
        }
        trim(q);
        return q;
    }

    void normalize(Poly& p)
    {
        if (p.empty())
            return;
        Rational scale = abs(p.back());
        for (auto& c : p)
            c /= scale;
    }

    Poly poly_gcd(Poly a, Poly b)
    {
        trim(a);
        trim(b);
        while (!b.empty()) {
            Poly r = remainder(a, b);
            normalize(r);
            a = std::move(b);
            b = std::move(r);
        }
        normalize(a);
        return a;
    }

    Poly square_free(const Poly& p)
    {
        const Poly d = derivative(p);
        if (d.empty())
            return p;
        const Poly g = poly_gcd(p, d);
        if (degree(g) <= 0)
            return p;
        return divide_exact(p, g);
    }

    // divides out a known rational root m: p = (t - m) q
    Poly deflate(const Poly& p, const Rational& m)
    {
        const int n = degree(p);
        Poly q(n, Rational(0));
        q[n - 1] = p[n];
        for (int i = n - 2; i >= 0; --i)
            q[i] = p[i + 1] + m * q[i + 1];
        trim(q);
        return q;
    }

    std::vector<Poly> sturm_chain(const Poly& s)
    {
        std::vector<Poly> chain;
        chain.push_back(s);
        Poly d = derivative(s);
        if (d.empty())
            return chain;
        chain.push_back(d);
        while (degree(chain.back()) > 0) {
            Poly r = remainder(chain[chain.size() - 2], chain.back());
            if (r.empty())
                break;
            for (auto& c : r)
                c = -c;
            normalize(r);
            chain.push_back(std::move(r));
        }
        return chain;
    }

    int sign_variations(const std::vector<Poly>& chain, const Rational& x)
    {
        int count = 0;
        int prev = 0;
        for (const Poly& p : chain) {
            const Rational value = eval(p, x);
            const int s = value > 0 ? 1 : value < 0 ? -1 : 0;
            if (s == 0)
                continue;
            if (prev != 0 && s != prev)
                ++count;
            prev = s;
        }
        return count;
    }

    // ----------------------------------------------------- rational intervals

    struct RInterval {
        Rational lo, hi;

        static RInterval point(const Rational& x) { return { x, x }; }
    };

    RInterval operator+(const RInterval& a, const RInterval& b)
    {
        return { a.lo + b.lo, a.hi + b.hi };
    }

    RInterval operator*(const RInterval& a, const RInterval& b)
    {
        const Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo,
                       p4 = a.hi * b.hi;
        return { std::min({ p1, p2, p3, p4 }), std::max({ p1, p2, p3, p4 }) };
    }

    // denominator must exclude zero
    RInterval divide(const RInterval& a, const RInterval& b)
    {
        const Rational q1 = a.lo / b.lo, q2 = a.lo / b.hi, q3 = a.hi / b.lo,
                       q4 = a.hi / b.hi;
        return { std::min({ q1, q2, q3, q4 }), std::max({ q1, q2, q3, q4 }) };
    }

    RInterval eval_interval(const Poly& p, const RInterval& x)
    {
        RInterval acc { Rational(0), Rational(0) };
        for (std::size_t i = p.size(); i-- > 0;)
            acc = acc * x + RInterval::point(p[i]);
        return acc;
    }

    // -------------------------------------------------------- query algebra

    using PolyVec3 = std::array<Poly, 3>;

    PolyVec3 sub(const PolyVec3& a, const PolyVec3& b)
    {
        return { sub(a[0], b[0]), sub(a[1], b[1]), sub(a[2], b[2]) };
    }

    Poly dot(const PolyVec3& a, const PolyVec3& b)
    {
        return add(add(mul(a[0], b[0]), mul(a[1], b[1])), mul(a[2], b[2]));
    }

    PolyVec3 cross(const PolyVec3& a, const PolyVec3& b)
    {
        return { sub(mul(a[1], b[2]), mul(a[2], b[1])),
                 sub(mul(a[2], b[0]), mul(a[0], b[2])),
                 sub(mul(a[0], b[1]), mul(a[1], b[0])) };
    }

    struct QueryPolys {
        QueryKind kind;
        Poly coplanar; // degree <= 3
        Poly denom;    // VF: Gram determinant; EE: |d1 x d2|^2
        Poly u_num;
        Poly v_num;
    };

    PolyVec3 trajectory(const NarrowQuery& q, int point)
    {
        PolyVec3 traj;
        for (int c = 0; c < 3; ++c) {
            const Rational x0(q.points_t0[point][c]);
            const Rational x1(q.points_t1[point][c]);
            Poly p { x0, x1 - x0 };
            trim(p);
            traj[c] = std::move(p);
        }
        return traj;
    }

    QueryPolys build_polys(const NarrowQuery& q)
    {
        QueryPolys polys;
        polys.kind = q.kind;
        const PolyVec3 p0 = trajectory(q, 0);
        const PolyVec3 p1 = trajectory(q, 1);
        const PolyVec3 p2 = trajectory(q, 2);
        const PolyVec3 p3 = trajectory(q, 3);
        if (q.kind == QueryKind::VertexFace) {
            const PolyVec3 e1 = sub(p2, p1);
            const PolyVec3 e2 = sub(p3, p1);
            const PolyVec3 w = sub(p0, p1);
            polys.coplanar = dot(w, cross(e1, e2));
            const Poly a = dot(e1, e1);
            const Poly b = dot(e1, e2);
            const Poly c = dot(e2, e2);
            const Poly d = dot(w, e1);
            const Poly e = dot(w, e2);
            polys.denom = sub(mul(a, c), mul(b, b));
            polys.u_num = sub(mul(d, c), mul(e, b));
            polys.v_num = sub(mul(a, e), mul(b, d));
        } else {
            const PolyVec3 d1 = sub(p1, p0);
            const PolyVec3 d2 = sub(p3, p2);
            const PolyVec3 r = sub(p2, p0);
            const PolyVec3 n = cross(d1, d2);
            polys.coplanar = dot(r, n);
            polys.denom = dot(n, n);
            polys.u_num = dot(cross(r, d2), n);
            polys.v_num = dot(cross(r, d1), n);
        }
        trim(polys.coplanar);
        return polys;
    }

    enum class Validity { Valid, Invalid, Unknown };

    Validity classify_uv(const QueryPolys& polys, const RInterval& u, const RInterval& v)
    {
        if (polys.kind == QueryKind::VertexFace) {
            const Rational sum_lo = u.lo + v.lo;
            const Rational sum_hi = u.hi + v.hi;
            if (u.lo >= 0 && v.lo >= 0 && sum_hi <= 1)
                return Validity::Valid;
            if (u.hi < 0 || v.hi < 0 || sum_lo > 1)
                return Validity::Invalid;
            return Validity::Unknown;
        }
        if (u.lo >= 0 && u.hi <= 1 && v.lo >= 0 && v.hi <= 1)
            return Validity::Valid;
        if (u.hi < 0 || u.lo > 1 || v.hi < 0 || v.lo > 1)
            return Validity::Invalid;
        return Validity::Unknown;
    }

    Validity validity_at(const QueryPolys& polys, const RInterval& t)
    {
        const RInterval den = eval_interval(polys.denom, t);
        if (den.lo <= 0 && den.hi >= 0)
            return Validity::Unknown; // degenerate (or undecided) configuration
        const RInterval u = divide(eval_interval(polys.u_num, t), den);
        const RInterval v = divide(eval_interval(polys.v_num, t), den);
        return classify_uv(polys, u, v);
    }

    // --------------------------------------------------------- root finding

    struct RootInterval {
        Rational lo, hi;
        bool exact = false;
    };

    // refine the bracket [lo, hi] (sign change of s) until hi - lo <= width
    void refine_bracket(const Poly& s, RootInterval& root, const Rational& width)
    {
        if (root.exact)
            return;
        const int sign_lo = eval(s, root.lo) > 0 ? 1 : -1;
        while (root.hi - root.lo > width) {
            const Rational mid = (root.lo + root.hi) / 2;
            const Rational value = eval(s, mid);
            if (value == 0) {
                root.lo = root.hi = mid;
                root.exact = true;
                return;
            }
            if ((value > 0 ? 1 : -1) == sign_lo)
                root.lo = mid;
            else
                root.hi = mid;
        }
    }

    struct IsolationResult {
        std::vector<RootInterval> roots;
        bool restart = false; // an interior exact root was deflated
        Rational deflated_root;
    };

    void isolate(const std::vector<Poly>& chain, const Rational& a, const Rational& b,
                 int count, IsolationResult& out)
    {
        if (count <= 0 || out.restart)
            return;
        if (count == 1) {
            out.roots.push_back({ a, b, false });
            return;
        }
        const Rational mid = (a + b) / 2;
        if (eval(chain[0], mid) == 0) {
            out.restart = true;
            out.deflated_root = mid;
            return;
        }
        const int va = sign_variations(chain, a);
        const int vm = sign_variations(chain, mid);
        const int vb = sign_variations(chain, b);
        isolate(chain, a, mid, va - vm, out);
        isolate(chain, mid, b, vm - vb, out);
    }

    // all real roots of the square-free poly s in [0,1], refined to width
    std::vector<RootInterval> roots_in_unit(Poly s, const Rational& width)
    {
        std::vector<RootInterval> roots;
        if (degree(s) <= 0)
            return roots;
        if (eval(s, Rational(0)) == 0) {
            roots.push_back({ Rational(0), Rational(0), true });
            s = deflate(s, Rational(0));
        }
        if (degree(s) >= 1 && eval(s, Rational(1)) == 0) {
            roots.push_back({ Rational(1), Rational(1), true });
            s = deflate(s, Rational(1));
        }
        while (degree(s) >= 1) {
            const std::vector<Poly> chain = sturm_chain(s);
            const int count
                = sign_variations(chain, Rational(0)) - sign_variations(chain, Rational(1));
            IsolationResult iso;
            isolate(chain, Rational(0), Rational(1), count, iso);
            if (iso.restart) {
                roots.push_back({ iso.deflated_root, iso.deflated_root, true });
                s = deflate(s, iso.deflated_root);
                continue;
            }
            for (RootInterval& r : iso.roots) {
                refine_bracket(s, r, width);
                roots.push_back(r);
            }
            break;
        }
        std::sort(roots.begin(), roots.end(),
                  [](const RootInterval& x, const RootInterval& y) { return x.lo < y.lo; });
        return roots;
    }

    // --------------------------------------------------------- margin bound

    struct RationalVec3 {
        Rational x, y, z;
    };

    struct MarginBox {
        Rational lo[3], hi[3];
        Rational bound;
        int depth = 0;
    };

    struct MarginEval {
        QueryKind kind;
        RationalVec3 base[4], delta[4]; // point trajectories: base + delta * t

        explicit MarginEval(const NarrowQuery& q)
        {
            kind = q.kind;
            for (int p = 0; p < 4; ++p) {
                base[p] = { Rational(q.points_t0[p][0]), Rational(q.points_t0[p][1]),
                            Rational(q.points_t0[p][2]) };
                delta[p] = { Rational(q.points_t1[p][0]) - base[p].x,
                             Rational(q.points_t1[p][1]) - base[p].y,
                             Rational(q.points_t1[p][2]) - base[p].z };
            }
        }

        Rational component(int c, int p, const Rational& t) const
        {
            const auto pick = [c](const RationalVec3& v) -> const Rational& {
                return c == 0 ? v.x : c == 1 ? v.y : v.z;
            };
            return pick(base[p]) + pick(delta[p]) * t;
        }

        Rational f_component(int c, const Rational& t, const Rational& u,
                             const Rational& v) const
        {
            if (kind == QueryKind::VertexFace) {
                const Rational w = 1 - u - v;
                return component(c, 0, t)
                    - (w * component(c, 1, t) + u * component(c, 2, t)
                       + v * component(c, 3, t));
            }
            return ((1 - u) * component(c, 0, t) + u * component(c, 1, t))
                - ((1 - v) * component(c, 2, t) + v * component(c, 3, t));
        }

        // F is multilinear, so the exact componentwise range over the box is
        // the corner hull; the bound is max_c dist(range_c, 0), a certified
        // lower bound on max_c |F_c| over the box.
        Rational bound(const MarginBox& box) const
        {
            Rational best(0);
            for (int c = 0; c < 3; ++c) {
                Rational lo, hi;
                bool first = true;
                for (int corner = 0; corner < 8; ++corner) {
                    const Rational value = f_component(
                        c, (corner & 1) ? box.hi[0] : box.lo[0],
                        (corner & 2) ? box.hi[1] : box.lo[1],
                        (corner & 4) ? box.hi[2] : box.lo[2]);
                    if (first) {
                        lo = hi = value;
                        first = false;
                    } else {
                        lo = std::min(lo, value);
                        hi = std::max(hi, value);
                    }
                }
                Rational dist(0);
                if (lo > 0)
                    dist = lo;
                else if (hi < 0)
                    dist = -hi;
                best = std::max(best, dist);
            }
            return best;
        }
    };

    // branch-and-bound lower bound on min over the domain of ||F||_inf;
    // refinement stops early once the bound reaches `target` (when positive)
    Rational margin_lower_bound(const NarrowQuery& q, unsigned iterations,
                                const Rational& target)
    {
        const MarginEval eval(q);
        const auto cmp = [](const MarginBox& a, const MarginBox& b) {
            return a.bound > b.bound; // min-heap on bound
        };
        std::priority_queue<MarginBox, std::vector<MarginBox>, decltype(cmp)> heap(cmp);

        MarginBox root;
        for (int d = 0; d < 3; ++d) {
            root.lo[d] = 0;
            root.hi[d] = 1;
        }
        root.bound = eval.bound(root);
        heap.push(root);

        for (unsigned it = 0; it < iterations && !heap.empty(); ++it) {
            MarginBox box = heap.top();
            if (target > 0 && box.bound >= target)
                break;
            heap.pop();
            const int dim = box.depth % 3;
            const Rational mid = (box.lo[dim] + box.hi[dim]) / 2;
            for (int half = 0; half < 2; ++half) {
                MarginBox child = box;
                child.depth = box.depth + 1;
                (half == 0 ? child.hi : child.lo)[dim] = mid;
                if (eval.kind == QueryKind::VertexFace
                    && child.lo[1] + child.lo[2] > 1)
                    continue; // fully outside the barycentric simplex
                child.bound = eval.bound(child);
                heap.push(child);
            }
        }
        return heap.empty() ? Rational(0) : heap.top().bound;
    }

    // ------------------------------------------------------------- decimals

    std::string decimal_string(const Rational& value, int digits, bool round_up)
    {
        Integer num = numerator(value);
        const Integer den = denominator(value);
        std::string sign;
        if (num < 0) {
            sign = "-";
            num = -num;
            round_up = !round_up; // outward for negatives flips the direction
        }
        Integer int_part = num / den;
        Integer rem = num % den;
        std::string frac;
        frac.reserve(digits);
        for (int i = 0; i < digits; ++i) {
            rem *= 10;
            const Integer d = rem / den;
            rem %= den;
            frac.push_back(static_cast<char>('0' + d.convert_to<int>()));
        }
        if (round_up && rem != 0) {
            int i = digits - 1;
            while (i >= 0 && frac[i] == '9')
                frac[i--] = '0';
            if (i >= 0)
                ++frac[i];
            else
                ++int_part;
        }
        std::ostringstream out;
        out << sign << int_part << "." << frac;
        return out.str();
    }

    void fill_root(OracleVerdict& verdict, const RootInterval& root)
    {
        verdict.colliding = true;
        verdict.root_exact = root.exact;
        verdict.root_lo = to_double_down(root.lo);
        verdict.root_hi = to_double_up(root.hi);
        verdict.root_width = root.exact ? 0.0 : to_double_up(root.hi - root.lo);
        verdict.root_lo_dec = decimal_string(root.lo, 45, false);
        verdict.root_hi_dec = decimal_string(root.hi, 45, true);
    }

} // namespace

OracleVerdict oracle_toi(const NarrowQuery& query, const OracleOptions& opts)
{
    if (opts.precision_bits < 128)
        throw ConfigError("oracle_toi: precision must be at least 128 bits");

    OracleVerdict verdict;
    const QueryPolys polys = build_polys(query);

    const auto run_margin = [&] {
        if (!opts.compute_margin)
            return;
        const Rational bound
            = margin_lower_bound(query, opts.margin_iterations, Rational(opts.margin_target));
        verdict.margin = to_double_down(bound);
        verdict.margin_valid = bound > 0;
    };

    if (polys.coplanar.empty()) {
        // Persistently coplanar trajectories: the polynomial carries no
        // information. A positive margin still certifies "no collision".
        run_margin();
        if (verdict.margin_valid)
            return verdict;
        verdict.indeterminate = true;
        return verdict;
    }

    Rational width(1);
    width /= Rational(Integer(1) << opts.precision_bits);
    const Poly s = square_free(polys.coplanar);
    const std::vector<RootInterval> roots = roots_in_unit(s, width);

    for (const RootInterval& root : roots) {
        RootInterval work = root;
        Validity validity = work.exact
            ? validity_at(polys, RInterval::point(work.lo))
            : validity_at(polys, RInterval { work.lo, work.hi });
        unsigned bits = opts.precision_bits;
        Rational refine_width = width;
        while (validity == Validity::Unknown && !work.exact
               && bits < opts.max_refine_bits) {
            bits += 64;
            refine_width /= Rational(Integer(1) << 64);
            refine_bracket(s, work, refine_width);
            validity = work.exact ? validity_at(polys, RInterval::point(work.lo))
                                  : validity_at(polys, RInterval { work.lo, work.hi });
        }
        if (validity == Validity::Valid) {
            fill_root(verdict, work);
            return verdict;
        }
        if (validity == Validity::Unknown) {
            // The root's (u,v) validity is undecidable, but a positive margin
            // over the whole domain still certifies that no valid root exists.
            run_margin();
            if (verdict.margin_valid)
                return verdict;
            verdict.indeterminate = true;
            return verdict;
        }
        // Invalid: keep scanning later roots.
    }

    run_margin();
    return verdict;
}

GroundTruth ground_truth_pairs(const SceneStep& scene, const OracleOptions& opts,
                               unsigned threads)
{
    scene.validate();
    GroundTruth truth;

    // Exact double-precision swept hulls, independent of the broad phase.
    struct Hull {
        Vec3 lo, hi;
    };
    const auto hull_of = [&](std::initializer_list<std::uint32_t> verts) {
        Hull h { { std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity() },
                 { -std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity() } };
        for (const std::uint32_t v : verts) {
            for (int c = 0; c < 3; ++c) {
                h.lo[c] = std::min({ h.lo[c], scene.vertices_t0[v][c], scene.vertices_t1[v][c] });
                h.hi[c] = std::max({ h.hi[c], scene.vertices_t0[v][c], scene.vertices_t1[v][c] });
            }
        }
        return h;
    };
    const auto disjoint = [](const Hull& a, const Hull& b) {
        for (int c = 0; c < 3; ++c)
            if (a.lo[c] > b.hi[c] || b.lo[c] > a.hi[c])
                return true;
        return false;
    };

    std::vector<Hull> vertex_hulls(scene.vertices_t0.size());
    for (std::uint32_t v = 0; v < scene.vertices_t0.size(); ++v)
        vertex_hulls[v] = hull_of({ v });
    std::vector<Hull> edge_hulls(scene.edges.size());
    for (std::uint32_t e = 0; e < scene.edges.size(); ++e)
        edge_hulls[e] = hull_of({ scene.edges[e][0], scene.edges[e][1] });
    std::vector<Hull> face_hulls(scene.faces.size());
    for (std::uint32_t f = 0; f < scene.faces.size(); ++f)
        face_hulls[f] = hull_of({ scene.faces[f][0], scene.faces[f][1], scene.faces[f][2] });

    std::vector<CandidatePair> survivors;
    for (std::uint32_t v = 0; v < scene.vertices_t0.size(); ++v) {
        for (std::uint32_t f = 0; f < scene.faces.size(); ++f) {
            const PrimitiveId pv { PrimitiveKind::Vertex, v };
            const PrimitiveId pf { PrimitiveKind::Face, f };
            if (share_vertex(scene, pv, pf))
                continue;
            ++truth.pairs_evaluated;
            if (disjoint(vertex_hulls[v], face_hulls[f])) {
                ++truth.pairs_prefiltered;
                continue;
            }
            survivors.push_back({ pv, pf });
        }
    }
    for (std::uint32_t i = 0; i < scene.edges.size(); ++i) {
        for (std::uint32_t j = i + 1; j < scene.edges.size(); ++j) {
            const PrimitiveId pi { PrimitiveKind::Edge, i };
            const PrimitiveId pj { PrimitiveKind::Edge, j };
            if (share_vertex(scene, pi, pj))
                continue;
            ++truth.pairs_evaluated;
            if (disjoint(edge_hulls[i], edge_hulls[j])) {
                ++truth.pairs_prefiltered;
                continue;
            }
            survivors.push_back({ pi, pj });
        }
    }

    const ClassifiedQueries classified = classify(survivors, scene);
    std::vector<NarrowQuery> queries = classified.vertex_face;
    queries.insert(queries.end(), classified.edge_edge.begin(), classified.edge_edge.end());

    OracleOptions pair_opts = opts;
    pair_opts.compute_margin = true; // margins resolve degenerate near-misses
    std::vector<OracleVerdict> verdicts(queries.size());
    parallel_chunks(queries.size(), threads, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            verdicts[i] = oracle_toi(queries[i], pair_opts);
    });

    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (verdicts[i].colliding)
            truth.colliding.push_back({ queries[i].source, verdicts[i] });
        else if (verdicts[i].indeterminate)
            truth.indeterminate.push_back(queries[i].source);
    }
    std::sort(truth.colliding.begin(), truth.colliding.end(),
              [](const GroundTruthPair& a, const GroundTruthPair& b) {
                  return a.pair < b.pair;
              });
    std::sort(truth.indeterminate.begin(), truth.indeterminate.end());
    return truth;
}

std::uint64_t query_hash(const NarrowQuery& query)
{
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const std::uint8_t kind = static_cast<std::uint8_t>(query.kind);
    mix(&kind, 1);
    for (int p = 0; p < 4; ++p) {
        mix(query.points_t0[p].data(), sizeof(double) * 3);
        mix(query.points_t1[p].data(), sizeof(double) * 3);
    }
    return h;
}

std::string verdict_to_json(const NarrowQuery& query, const OracleVerdict& verdict)
{
    std::ostringstream out;
    out << "{\"hash\":\"" << std::hex << query_hash(query) << std::dec << "\""
        << ",\"colliding\":" << (verdict.colliding ? "true" : "false")
        << ",\"indeterminate\":" << (verdict.indeterminate ? "true" : "false");
    if (verdict.colliding)
        out << ",\"root_lo\":\"" << verdict.root_lo_dec << "\""
            << ",\"root_hi\":\"" << verdict.root_hi_dec << "\"";
    if (verdict.margin_valid) {
        out.precision(17);
        out << ",\"margin\":" << verdict.margin;
    }
    out << "}";
    return out.str();
}

} // namespace ccdkit
