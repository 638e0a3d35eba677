#pragma once

#include <poissonkit/rational.hpp>
#include <poissonkit/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace poissonkit::geom {

struct Vec2 {
    double x = 0, y = 0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    bool operator==(Vec2 o) const { return x == o.x && y == o.y; }
};

// Planar point configuration with set semantics: adding an exact duplicate
// is a no-op (omega union {x} = omega when x already belongs to omega).
struct PointConfiguration {
    std::vector<Vec2> points;

    PointConfiguration with_point(Vec2 p) const {
        for (const Vec2& q : points)
            if (q == p) return *this;
        PointConfiguration c = *this;
        c.points.push_back(p);
        return c;
    }
};

// Sign of the cross product (b-a) x (c-a): exact.  A double filter handles
// almost every call; ties fall back to rational arithmetic (doubles are
// dyadic rationals, so the fallback is error-free).
inline int orient2d(Vec2 a, Vec2 b, Vec2 c) {
    double detl = (b.x - a.x) * (c.y - a.y);
    double detr = (b.y - a.y) * (c.x - a.x);
    double det = detl - detr;
    double magnitude = std::abs(detl) + std::abs(detr);
    if (std::abs(det) > 8.0 * 1e-16 * magnitude) return det > 0 ? 1 : -1;
    if (det == 0.0 && magnitude == 0.0) return 0;
    Rat d = (rat_from_double(b.x) - rat_from_double(a.x)) * (rat_from_double(c.y) - rat_from_double(a.y)) -
            (rat_from_double(b.y) - rat_from_double(a.y)) * (rat_from_double(c.x) - rat_from_double(a.x));
    if (d > 0) return 1;
    if (d < 0) return -1;
    return 0;
}

// Extremal vertices in counterclockwise order; degenerate (tau acts as the
// identity) when fewer than 3, i.e. |omega| <= 2 or all points collinear.
struct ConvexHull {
    std::vector<Vec2> v;
    bool degenerate = true;
};

inline ConvexHull convex_hull(const PointConfiguration& omega) {
    std::vector<Vec2> p = omega.points;
    std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    p.erase(std::unique(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a == b; }), p.end());
    ConvexHull h;
    size_t n = p.size();
    if (n < 3) {
        h.v = p;
        h.degenerate = true;
        return h;
    }
    std::vector<Vec2> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && orient2d(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {  // upper chain
        while (k >= lower && orient2d(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k - 1);
    h.v = std::move(hull);
    h.degenerate = h.v.size() < 3;
    return h;
}

// -1 outside, 0 on the boundary, +1 strictly inside (exact predicates).
inline int hull_position(const ConvexHull& h, Vec2 p) {
    if (h.degenerate) {
        // a segment or point has empty interior; "inside" never holds
        for (const Vec2& q : h.v)
            if (q == p) return 0;
        if (h.v.size() == 2) {
            if (orient2d(h.v[0], h.v[1], p) != 0) return -1;
            double t = (p - h.v[0]).dot(h.v[1] - h.v[0]);
            double len2 = (h.v[1] - h.v[0]).norm2();
            return (t >= 0 && t <= len2) ? 0 : -1;
        }
        return -1;
    }
    bool on_edge = false;
    size_t n = h.v.size();
    for (size_t i = 0; i < n; ++i) {
        int o = orient2d(h.v[i], h.v[(i + 1) % n], p);
        if (o < 0) return -1;
        if (o == 0) on_edge = true;
    }
    return on_edge ? 0 : 1;
}

// Squared distance from p to segment [a,b] and the nearest point (foot).
inline double segment_dist2(Vec2 p, Vec2 a, Vec2 b, Vec2& foot) {
    Vec2 e = b - a;
    double len2 = e.norm2();
    double t = len2 > 0 ? (p - a).dot(e) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    foot = {a.x + t * e.x, a.y + t * e.y};
    return (p - foot).norm2();
}

// Distance^2 from an interior point to the hull boundary, min over edges,
// with the nearest boundary point.
inline double boundary_dist2(const ConvexHull& h, Vec2 p, Vec2& foot) {
    double best = HUGE_VAL;
    Vec2 f;
    size_t n = h.v.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 cand;
        double d2 = segment_dist2(p, h.v[i], h.v[(i + 1) % n], cand);
        if (d2 < best) {
            best = d2;
            f = cand;
        }
    }
    foot = f;
    return best;
}

// Index of the nearest edge (used for medial-kink detection in quadrature).
inline int nearest_edge(const ConvexHull& h, Vec2 p) {
    double best = HUGE_VAL;
    int arg = 0;
    size_t n = h.v.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 f;
        double d2 = segment_dist2(p, h.v[i], h.v[(i + 1) % n], f);
        if (d2 < best) {
            best = d2;
            arg = static_cast<int>(i);
        }
    }
    return arg;
}

// The shift amplitude u, constrained to ||u|| < 1/4.
struct HullTransform {
    Vec2 u;

    explicit HullTransform(Vec2 shift) : u(shift) {
        if (!(std::sqrt(u.norm2()) < 0.25))
            throw std::invalid_argument("HullTransform: ||u|| must be < 1/4");
    }
};

// psi(omega_e, x) = u 1_{C(omega)}(x) d^2/(1+d^2), d = dist(x, boundary);
// zero outside the hull and on its boundary (d = 0 there), and identically
// zero for degenerate hulls.
inline Vec2 psi(const ConvexHull& h, Vec2 x, const HullTransform& t) {
    if (h.degenerate || hull_position(h, x) <= 0) return {0.0, 0.0};
    Vec2 foot;
    double d2 = boundary_dist2(h, x, foot);
    double g = d2 / (1.0 + d2);
    return t.u * g;
}

// tau(omega, x) = x + psi(omega_e, x) inside the open hull, x elsewhere.
// The outside/boundary branch returns the input bit-for-bit, so the
// finite-difference zeros proved for this transformation are exact.
inline Vec2 tau_point(const ConvexHull& h, Vec2 x, const HullTransform& t) {
    if (h.degenerate || hull_position(h, x) <= 0) return x;
    Vec2 foot;
    double d2 = boundary_dist2(h, x, foot);
    double g = d2 / (1.0 + d2);
    return {x.x + t.u.x * g, x.y + t.u.y * g};
}

inline Vec2 tau_point(const PointConfiguration& omega, Vec2 x, const HullTransform& t) {
    return tau_point(convex_hull(omega), x, t);
}

inline PointConfiguration tau_pushforward(const PointConfiguration& omega, const HullTransform& t) {
    ConvexHull h = convex_hull(omega);
    PointConfiguration out;
    out.points.reserve(omega.points.size());
    for (const Vec2& p : omega.points) out.points.push_back(tau_point(h, p, t));
    return out;
}

// grad g with g = d^2/(1+d^2): 2 (x - foot) / (1+d^2)^2, from the nearest
// boundary feature; analytic counterpart of the finite-difference gradient.
inline Vec2 grad_g(const ConvexHull& h, Vec2 x) {
    Vec2 foot;
    double d2 = boundary_dist2(h, x, foot);
    double s = 1.0 + d2;
    double f = 2.0 / (s * s);
    return {(x.x - foot.x) * f, (x.y - foot.y) * f};
}

// phi = det(I + grad psi) - 1 evaluated analytically; psi = u g(x) makes
// grad psi rank one, so the determinant collapses to u . grad g.
inline double phi_analytic(const ConvexHull& h, Vec2 x, const HullTransform& t) {
    if (h.degenerate || hull_position(h, x) <= 0) return 0.0;
    Vec2 gg = grad_g(h, x);
    return t.u.dot(gg);
}

struct PhiResult {
    double value = 0.0;
    bool flagged = false;  // near the medial axis: one-sided FD estimates disagree
};

// phi = det(I + grad psi) - 1 with grad psi from central finite differences
// (step h); samples whose one-sided differences disagree by more than 1e-3
// are flagged (the medial axis, where d(.,boundary) is not differentiable).
inline PhiResult density_phi(const ConvexHull& hull, Vec2 x, const HullTransform& t,
                             double h = 1e-6) {
    PhiResult out;
    if (hull.degenerate || hull_position(hull, x) <= 0) return out;
    Vec2 px0 = psi(hull, {x.x - h, x.y}, t), px1 = psi(hull, {x.x + h, x.y}, t);
    Vec2 py0 = psi(hull, {x.x, x.y - h}, t), py1 = psi(hull, {x.x, x.y + h}, t);
    Vec2 pc = psi(hull, x, t);
    double j00 = (px1.x - px0.x) / (2 * h), j01 = (py1.x - py0.x) / (2 * h);
    double j10 = (px1.y - px0.y) / (2 * h), j11 = (py1.y - py0.y) / (2 * h);
    out.value = (1 + j00) * (1 + j11) - j01 * j10 - 1.0;
    auto disagree = [&](Vec2 lo, Vec2 hi) {
        double fx = (hi.x - pc.x) / h, bx = (pc.x - lo.x) / h;
        double fy = (hi.y - pc.y) / h, by = (pc.y - lo.y) / h;
        return std::abs(fx - bx) > 1e-3 || std::abs(fy - by) > 1e-3;
    };
    out.flagged = disagree(px0, px1) || disagree(py0, py1);
    return out;
}

// sigma = rate x Lebesgue on [-1,1]^2: count ~ Poisson(4 rate), points
// i.i.d. uniform; fully determined by the stream.
inline PointConfiguration sample_ppp(double rate, SplitMix64& rng) {
    if (rate < 0) throw std::invalid_argument("sample_ppp: rate < 0");
    PointConfiguration omega;
    int n = rng.poisson(4.0 * rate);
    omega.points.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec2 p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        bool dup = false;
        for (const Vec2& q : omega.points) dup = dup || (q == p);
        if (!dup) omega.points.push_back(p);
    }
    return omega;
}

struct NilpotenceReport {
    std::int64_t samples = 0;
    std::int64_t cyclic_products = 0;
    std::int64_t f1_cases = 0;
    std::int64_t f2_cases = 0;
    std::int64_t inside_cases = 0;
    std::int64_t excluded = 0;  // degenerate-hull draws (tau is the identity there)
    std::vector<std::string> counterexamples;

    bool ok() const { return counterexamples.empty(); }
};

inline std::string describe(Vec2 p) {
    return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

// Samples (omega, t-tuples) and verifies, exactly in double arithmetic:
//  - cyclic products prod_i D_{t_i} tau(omega, t_{i+1 mod k}) vanish because
//    some factor is exactly (0,0), for k = 2..k_max;
//  - (f1) x in C(omega u {y})  =>  D_x tau(omega, y) = 0;
//  - (f2) y not in C(omega u {x})  =>  D_x tau(omega, y) = 0
//    (the lemma's proof shows this form; a point outside the enlarged hull
//    is never moved);
//  - t in C(omega)  =>  D_t tau(omega, x) = 0 for all x.
inline NilpotenceReport check_nilpotence(double rate, const HullTransform& t, int n_samples,
                                         int k_max, std::uint64_t seed) {
    if (k_max < 2) throw std::invalid_argument("check_nilpotence: k_max >= 2 required");
    NilpotenceReport rep;
    for (int s = 0; s < n_samples; ++s) {
        SplitMix64 rng = sample_stream(seed, static_cast<std::uint64_t>(s));
        PointConfiguration omega = sample_ppp(rate, rng);
        ConvexHull hull = convex_hull(omega);
        ++rep.samples;
        if (hull.degenerate) {
            ++rep.excluded;
            continue;
        }
        auto tau_at = [&](const PointConfiguration& w, Vec2 x) { return tau_point(w, x, t); };

        int k = 2 + static_cast<int>(rng.next() % static_cast<unsigned>(k_max - 1));
        std::vector<Vec2> pts(k);
        for (int i = 0; i < k; ++i) {
            Vec2 p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            // bias some draws into the hull so case (a) of the lemma is hit
            if (rng.next() % 2 == 0) {
                for (int tries = 0; tries < 8 && hull_position(hull, p) <= 0; ++tries)
                    p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            }
            pts[i] = p;
        }
        // occasionally force a repeated point (D_t tau(omega,t) = 0 case)
        if (k >= 2 && rng.next() % 8 == 0) pts[k - 1] = pts[0];

        std::vector<PointConfiguration> enlarged;
        enlarged.reserve(k);
        for (int i = 0; i < k; ++i) enlarged.push_back(omega.with_point(pts[i]));

        ++rep.cyclic_products;
        bool some_factor_zero = false;
        for (int i = 0; i < k && !some_factor_zero; ++i) {
            Vec2 target = pts[(i + 1) % k];
            Vec2 a = tau_at(enlarged[i], target);
            Vec2 b = tau_at(omega, target);
            some_factor_zero = (a.x - b.x == 0.0) && (a.y - b.y == 0.0);
        }
        if (!some_factor_zero) {
            std::string dump = "cyclic product nonzero: k=" + std::to_string(k) + " pts";
            for (const Vec2& p : pts) dump += " " + describe(p);
            rep.counterexamples.push_back(dump);
        }

        // (f1)/(f2) on a fresh pair
        Vec2 x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        Vec2 y{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        PointConfiguration oy = omega.with_point(y), ox = omega.with_point(x);
        Vec2 before = tau_at(omega, y), after = tau_at(ox, y);
        if (hull_position(convex_hull(oy), x) >= 0) {
            ++rep.f1_cases;
            if (!(before == after))
                rep.counterexamples.push_back("f1 violated at x=" + describe(x) + " y=" + describe(y));
        }
        if (hull_position(convex_hull(ox), y) < 0) {
            ++rep.f2_cases;
            if (!(before == after))
                rep.counterexamples.push_back("f2 violated at x=" + describe(x) + " y=" + describe(y));
        }

        // interior points never change tau: D_t tau(omega, .) = 0
        if (hull_position(hull, x) > 0) {
            ++rep.inside_cases;
            PointConfiguration oxx = omega.with_point(x);
            Vec2 probe{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            if (!(tau_at(oxx, probe) == tau_at(omega, probe)))
                rep.counterexamples.push_back("interior-point case violated at t=" + describe(x));
        }
    }
    return rep;
}

}  // namespace poissonkit::geom
