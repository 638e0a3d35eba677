#pragma once

#include <poissonkit/geometry.hpp>
#include <poissonkit/rng.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace poissonkit::mc {

using geom::ConvexHull;
using geom::HullTransform;
using geom::PointConfiguration;
using geom::Vec2;

// Worker count: GIRSANOV_THREADS caps it, 0 or unset means auto.
inline int worker_count(std::int64_t jobs) {
    int n = 0;
    if (const char* env = std::getenv("GIRSANOV_THREADS")) n = std::atoi(env);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    return static_cast<int>(std::min<std::int64_t>(n, std::max<std::int64_t>(jobs, 1)));
}

// Runs fn(job) for job = 0..jobs-1 on a small pool.  Each job writes only
// its own slot, so the result is independent of scheduling.
inline void parallel_for(std::int64_t jobs, const std::function<void(std::int64_t)>& fn) {
    int workers = worker_count(jobs);
    if (workers == 1) {
        for (std::int64_t j = 0; j < jobs; ++j) fn(j);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::int64_t j = next.fetch_add(1); j < jobs; j = next.fetch_add(1)) fn(j);
        });
    }
    for (auto& th : pool) th.join();
}

// Neumaier compensated accumulator; used in a fixed order for determinism.
struct Kahan {
    double sum = 0.0, comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Hull-clipped midpoint quadrature of phi over [-1,1]^2 with a quad_n x
// quad_n grid: cells fully inside use the midpoint, boundary cells are
// clipped exactly against the hull (polygon area x centroid value), and
// interior cells whose neighbors reveal a gradient kink (the medial axis of
// the hull, where phi jumps) are subdivided adaptively.  The integrand is
// the analytic rank-one form of det(I + grad psi) - 1.
inline double phi_integral(const ConvexHull& hull, const HullTransform& t, double rate,
                           int quad_n) {
    if (hull.degenerate || quad_n < 1) return 0.0;
    const double h = 2.0 / quad_n;
    const size_t nv = hull.v.size();

    double ymin = HUGE_VAL, ymax = -HUGE_VAL, xminh = HUGE_VAL, xmaxh = -HUGE_VAL;
    for (const Vec2& v : hull.v) {
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
        xminh = std::min(xminh, v.x);
        xmaxh = std::max(xmaxh, v.x);
    }

    // span of the hull on each horizontal grid line
    std::vector<double> line_lo(quad_n + 1, 1.0), line_hi(quad_n + 1, -1.0);
    for (int j = 0; j <= quad_n; ++j) {
        double y = -1.0 + j * h;
        if (y < ymin || y > ymax) continue;
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (size_t e = 0; e < nv; ++e) {
            Vec2 a = hull.v[e], b = hull.v[(e + 1) % nv];
            if ((a.y <= y && b.y >= y) || (b.y <= y && a.y >= y)) {
                double x;
                if (a.y == b.y) {
                    lo = std::min({lo, a.x, b.x});
                    hi = std::max({hi, a.x, b.x});
                    continue;
                }
                x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
        line_lo[j] = lo;
        line_hi[j] = hi;
    }
    auto node_inside = [&](int i, int j) {
        double x = -1.0 + i * h;
        return line_lo[j] < x && x < line_hi[j];
    };

    auto phi_at = [&](Vec2 p) { return geom::phi_analytic(hull, p, t); };

    // cells containing a hull vertex may intersect the hull without holding
    // any inside corner
    std::vector<std::pair<int, int>> vertex_cells;
    for (const Vec2& v : hull.v) {
        int i = std::clamp(static_cast<int>((v.x + 1.0) / h), 0, quad_n - 1);
        int j = std::clamp(static_cast<int>((v.y + 1.0) / h), 0, quad_n - 1);
        vertex_cells.emplace_back(i, j);
    }

    // Sutherland-Hodgman clip of a convex cell rectangle by the hull edges
    auto clip_cell = [&](double x0, double y0, double& area, Vec2& centroid) {
        std::vector<Vec2> poly{{x0, y0}, {x0 + h, y0}, {x0 + h, y0 + h}, {x0, y0 + h}};
        std::vector<Vec2> next;
        for (size_t e = 0; e < nv && !poly.empty(); ++e) {
            Vec2 a = hull.v[e], b = hull.v[(e + 1) % nv];
            double ex = b.x - a.x, ey = b.y - a.y;
            next.clear();
            size_t np = poly.size();
            for (size_t i = 0; i < np; ++i) {
                Vec2 p = poly[i], q = poly[(i + 1) % np];
                double sp = ex * (p.y - a.y) - ey * (p.x - a.x);
                double sq = ex * (q.y - a.y) - ey * (q.x - a.x);
                bool inp = sp <= 0, inq = sq <= 0;
                if (inp) next.push_back(p);
                if (inp != inq) {
                    double tt = sp / (sp - sq);
                    next.push_back({p.x + tt * (q.x - p.x), p.y + tt * (q.y - p.y)});
                }
            }
            poly = next;
        }
        // signed area + centroid; the cross terms share the area's sign, so
        // the centroid ratio is orientation-independent
        double sa = 0.0, cx = 0.0, cy = 0.0;
        size_t np = poly.size();
        for (size_t i = 0; i < np; ++i) {
            Vec2 p = poly[i], q = poly[(i + 1) % np];
            double cr = p.x * q.y - q.x * p.y;
            sa += cr;
            cx += (p.x + q.x) * cr;
            cy += (p.y + q.y) * cr;
        }
        area = std::abs(sa) * 0.5;
        if (area > 1e-300) {
            centroid = {cx / (3.0 * sa), cy / (3.0 * sa)};
        } else {
            area = 0.0;
            centroid = {x0 + h / 2, y0 + h / 2};
        }
    };

    // adaptive refinement of a (fully interior) cell across a phi kink
    std::function<double(double, double, double, int)> refine =
        [&](double cx, double cy, double half, int depth) -> double {
        double q = half / 2;
        double v00 = phi_at({cx - q, cy - q}), v10 = phi_at({cx + q, cy - q});
        double v01 = phi_at({cx - q, cy + q}), v11 = phi_at({cx + q, cy + q});
        double spread = std::max({v00, v10, v01, v11}) - std::min({v00, v10, v01, v11});
        double sub_area = half * half;
        if (depth <= 0 || spread < 0.05 * std::sqrt(t.u.norm2()) + 1e-12)
            return (v00 + v10 + v01 + v11) * sub_area;
        return refine(cx - q, cy - q, q, depth - 1) + refine(cx + q, cy - q, q, depth - 1) +
               refine(cx - q, cy + q, q, depth - 1) + refine(cx + q, cy + q, q, depth - 1);
    };

    int j_lo = std::clamp(static_cast<int>((ymin + 1.0) / h) - 1, 0, quad_n - 1);
    int j_hi = std::clamp(static_cast<int>((ymax + 1.0) / h) + 1, 0, quad_n - 1);

    Kahan total;
    std::vector<double> prev_row_vals;
    std::vector<int> prev_row_edge;
    const double kink_thr = 0.02;
    for (int j = j_lo; j <= j_hi; ++j) {
        double y0 = -1.0 + j * h;
        double yc = y0 + h / 2;
        std::vector<double> row_vals(quad_n, HUGE_VAL);
        std::vector<int> row_edge(quad_n, -1);
        int i_lo = std::clamp(static_cast<int>((xminh + 1.0) / h) - 1, 0, quad_n - 1);
        int i_hi = std::clamp(static_cast<int>((xmaxh + 1.0) / h) + 1, 0, quad_n - 1);
        for (int i = i_lo; i <= i_hi; ++i) {
            int corners = node_inside(i, j) + node_inside(i + 1, j) + node_inside(i, j + 1) +
                          node_inside(i + 1, j + 1);
            bool has_vertex = false;
            for (auto& [vi, vj] : vertex_cells) has_vertex = has_vertex || (vi == i && vj == j);
            if (corners == 0 && !has_vertex) continue;
            double x0 = -1.0 + i * h;
            if (corners == 4 && !has_vertex) {
                Vec2 c{x0 + h / 2, yc};
                double v = phi_at(c);
                row_vals[i] = v;
                row_edge[i] = geom::nearest_edge(hull, c);
                total.add(v * h * h);
            } else {
                double area;
                Vec2 centroid;
                clip_cell(x0, y0, area, centroid);
                if (area > 0) total.add(phi_at(centroid) * area);
            }
        }
        // medial-kink pass: neighbors with different nearest edges and a
        // jump in phi get their midpoint contribution replaced by an
        // adaptive one
        auto maybe_refine = [&](int i1, std::vector<double>& vals1, std::vector<int>& edges1,
                                int jrow_y_center_is_yc, double ycenter) {
            (void)jrow_y_center_is_yc;
            if (i1 < 0 || i1 >= quad_n || vals1[i1] == HUGE_VAL || edges1[i1] == -2) return;
            double xc = -1.0 + i1 * h + h / 2;
            double fine = refine(xc, ycenter, h / 2, 2);
            total.add(fine - vals1[i1] * h * h);
            edges1[i1] = -2;  // refined marker
        };
        for (int i = 1; i < quad_n; ++i) {
            if (row_vals[i] == HUGE_VAL || row_vals[i - 1] == HUGE_VAL) continue;
            if (row_edge[i] >= 0 && row_edge[i - 1] >= 0 && row_edge[i] != row_edge[i - 1] &&
                std::abs(row_vals[i] - row_vals[i - 1]) > kink_thr * std::sqrt(t.u.norm2())) {
                maybe_refine(i, row_vals, row_edge, j, yc);
                maybe_refine(i - 1, row_vals, row_edge, j, yc);
            }
        }
        if (!prev_row_vals.empty()) {
            for (int i = 0; i < quad_n; ++i) {
                if (row_vals[i] == HUGE_VAL || prev_row_vals[i] == HUGE_VAL) continue;
                bool edges_differ = row_edge[i] >= 0 && prev_row_edge[i] >= 0 &&
                                    row_edge[i] != prev_row_edge[i];
                if (edges_differ &&
                    std::abs(row_vals[i] - prev_row_vals[i]) > kink_thr * std::sqrt(t.u.norm2())) {
                    maybe_refine(i, row_vals, row_edge, j, yc);
                    maybe_refine(i, prev_row_vals, prev_row_edge, j - 1, yc - h);
                }
            }
        }
        prev_row_vals = std::move(row_vals);
        prev_row_edge = std::move(row_edge);
    }
    return rate * total.value();
}

struct MCReport {
    std::string id;
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::int64_t excluded = 0;       // medial-axis flagged samples
    std::int64_t domain_errors = 0;  // 1 + phi <= 0 at a configuration point
    double target = 0.0;
    double z_score = 0.0;
    std::int64_t runtime_ms = 0;
    // quadrature honesty: mean |I(quad_n) - I(2 quad_n)| over the refined
    // subsample
    double quad_delta_mean = 0.0;
    std::int64_t quad_delta_count = 0;
    int refine_stride = 1;
    // per-batch running means for plotting
    std::vector<double> batch_running_mean;
    std::vector<double> batch_running_se;

    bool pass(double z_threshold = 4.0) const { return std::abs(z_score) <= z_threshold; }
};

enum class FunctionalKind { none, f1, f2, f3 };

inline FunctionalKind functional_from_string(const std::string& s) {
    if (s == "none") return FunctionalKind::none;
    if (s == "f1") return FunctionalKind::f1;
    if (s == "f2") return FunctionalKind::f2;
    if (s == "f3") return FunctionalKind::f3;
    throw std::invalid_argument("unknown functional: " + s);
}

// F catalog of Corollary cjds tests: F1 = exp(-sum ||x||^2),
// F2 = min(omega(X), 10), F3 = omega(B) for the fixed box B = [0,1]^2.
inline double eval_functional(FunctionalKind kind, const PointConfiguration& omega) {
    switch (kind) {
        case FunctionalKind::none:
            return 1.0;
        case FunctionalKind::f1: {
            double s = 0.0;
            for (const Vec2& p : omega.points) s += p.norm2();
            return std::exp(-s);
        }
        case FunctionalKind::f2:
            return std::min<double>(static_cast<double>(omega.points.size()), 10.0);
        case FunctionalKind::f3: {
            int c = 0;
            for (const Vec2& p : omega.points)
                c += (p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0);
            return c;
        }
    }
    return 0.0;
}

struct GirsanovConfig {
    double rate = 2.0;
    Vec2 u{0.2, 0.0};
    std::int64_t n_samples = 200000;
    std::uint64_t seed = 42;
    int quad_n = 128;
    int refine_stride = 8;  // every stride-th sample also integrates at 2*quad_n
    FunctionalKind functional = FunctionalKind::none;
};

namespace detail {

struct BatchStats {
    Kahan sum, sum2;      // weighted-transformed estimator (or density)
    Kahan plain, plain2;  // plain estimator (functional runs)
    Kahan diff, diff2;    // per-sample paired difference
    Kahan delta;          // |I(q) - I(2q)| over refined samples
    std::int64_t n = 0, refined = 0, excluded = 0, domain_errors = 0;
};

constexpr std::int64_t kBatch = 512;

}  // namespace detail

// Density of Corollary cjds for one configuration:
// exp(-int phi dsigma) prod_{x in omega} (1 + phi(omega,x)).
// The integral uses the hull-clipped midpoint quadrature; the product uses
// the finite-difference phi (with medial-axis flagging).
struct DensityResult {
    double value = 1.0;
    double integral = 0.0;
    bool flagged = false;
    bool domain_error = false;
};

inline DensityResult girsanov_density(const PointConfiguration& omega, const ConvexHull& hull,
                                      const HullTransform& t, double rate, int quad_n) {
    DensityResult out;
    if (hull.degenerate) return out;  // tau is the identity, density 1 exactly
    out.integral = phi_integral(hull, t, rate, quad_n);
    double prod = 1.0;
    for (const Vec2& p : omega.points) {
        auto pr = geom::density_phi(hull, p, t);
        out.flagged = out.flagged || pr.flagged;
        if (1.0 + pr.value <= 0.0) out.domain_error = true;
        prod *= 1.0 + pr.value;
    }
    out.value = std::exp(-out.integral) * prod;
    return out;
}

inline DensityResult girsanov_density(const PointConfiguration& omega, const HullTransform& t,
                                      double rate, int quad_n) {
    return girsanov_density(omega, geom::convex_hull(omega), t, rate, quad_n);
}

// E[density] = 1 (unit identity) or E[F(tau_* omega) density] = E[F]
// (functional identity), estimated with per-sample counter-derived streams;
// batch slots make the reduction bitwise independent of the worker count.
inline MCReport run_girsanov(const GirsanovConfig& cfg) {
    HullTransform t(cfg.u);
    auto t0 = std::chrono::steady_clock::now();
    std::int64_t nbatches = (cfg.n_samples + detail::kBatch - 1) / detail::kBatch;
    std::vector<detail::BatchStats> slots(nbatches);
    const bool functional = cfg.functional != FunctionalKind::none;

    parallel_for(nbatches, [&](std::int64_t b) {
        detail::BatchStats& st = slots[b];
        std::int64_t lo = b * detail::kBatch;
        std::int64_t hi = std::min(cfg.n_samples, lo + detail::kBatch);
        for (std::int64_t i = lo; i < hi; ++i) {
            SplitMix64 rng = sample_stream(cfg.seed, static_cast<std::uint64_t>(i));
            PointConfiguration omega = geom::sample_ppp(cfg.rate, rng);
            ConvexHull hull = geom::convex_hull(omega);
            DensityResult d = girsanov_density(omega, hull, t, cfg.rate, cfg.quad_n);
            if (d.domain_error) {
                ++st.domain_errors;
                continue;
            }
            if (d.flagged) {
                ++st.excluded;
                continue;
            }
            if (i % cfg.refine_stride == 0 && !hull.degenerate) {
                double fine = phi_integral(hull, t, cfg.rate, 2 * cfg.quad_n);
                st.delta.add(std::abs(d.integral - fine));
                ++st.refined;
            } else if (i % cfg.refine_stride == 0) {
                st.delta.add(0.0);
                ++st.refined;
            }
            double w;
            if (functional) {
                PointConfiguration pushed = geom::tau_pushforward(omega, t);
                double ft = eval_functional(cfg.functional, pushed);
                double fp = eval_functional(cfg.functional, omega);
                w = ft * d.value;
                st.plain.add(fp);
                st.plain2.add(fp * fp);
                double diff = w - fp;
                st.diff.add(diff);
                st.diff2.add(diff * diff);
            } else {
                w = d.value;
            }
            st.sum.add(w);
            st.sum2.add(w * w);
            ++st.n;
        }
    });

    MCReport rep;
    rep.id = functional ? "girsanov_functional" : "girsanov_unit";
    rep.seed = cfg.seed;
    rep.refine_stride = cfg.refine_stride;
    Kahan sum, sum2, plain, plain2, diff, diff2, delta;
    std::int64_t n = 0;
    for (const auto& st : slots) {
        sum.add(st.sum.value());
        sum2.add(st.sum2.value());
        plain.add(st.plain.value());
        plain2.add(st.plain2.value());
        diff.add(st.diff.value());
        diff2.add(st.diff2.value());
        delta.add(st.delta.value());
        n += st.n;
        rep.excluded += st.excluded;
        rep.domain_errors += st.domain_errors;
        rep.quad_delta_count += st.refined;
        if (n > 0) {
            rep.batch_running_mean.push_back(functional ? diff.value() / n : sum.value() / n);
            double m = rep.batch_running_mean.back();
            double s2 = functional ? diff2.value() : sum2.value();
            double var = n > 1 ? std::max(0.0, (s2 - n * m * m) / (n - 1)) : 0.0;
            rep.batch_running_se.push_back(n > 0 ? std::sqrt(var / n) : 0.0);
        }
    }
    rep.n_samples = n;
    if (n == 0) throw std::runtime_error("run_girsanov: all samples excluded");
    if (functional) {
        // paired comparison: E[F(tau_*.) density] - E[F] should vanish
        double mean_diff = diff.value() / n;
        double var_diff = n > 1 ? std::max(0.0, (diff2.value() - n * mean_diff * mean_diff) / (n - 1)) : 0.0;
        rep.estimate = mean_diff;
        rep.std_error = std::sqrt(var_diff / n);
        rep.target = 0.0;
    } else {
        double mean = sum.value() / n;
        double var = n > 1 ? std::max(0.0, (sum2.value() - n * mean * mean) / (n - 1)) : 0.0;
        rep.estimate = mean;
        rep.std_error = std::sqrt(var / n);
        rep.target = 1.0;
    }
    double dev = rep.estimate - rep.target;
    rep.z_score = (rep.std_error > 0) ? dev / rep.std_error : (dev == 0.0 ? 0.0 : HUGE_VAL);
    rep.quad_delta_mean = rep.quad_delta_count > 0 ? delta.value() / rep.quad_delta_count : 0.0;
    auto t1 = std::chrono::steady_clock::now();
    rep.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    return rep;
}

// MC check of the Laplace functional (lp) for a box step function
// f = c 1_B: mean of exp(int f d(omega - sigma)) against the closed form
// exp(sigma(B)(e^c - c - 1)).
struct LaplaceCheck {
    double estimate = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double z_score = 0.0;
};

inline LaplaceCheck mc_laplace_box(double rate, double c, Vec2 lo, Vec2 hi,
                                   std::int64_t n_samples, std::uint64_t seed) {
    double mass = rate * (hi.x - lo.x) * (hi.y - lo.y);
    std::int64_t nbatches = (n_samples + detail::kBatch - 1) / detail::kBatch;
    std::vector<Kahan> sums(nbatches), sums2(nbatches);
    parallel_for(nbatches, [&](std::int64_t b) {
        std::int64_t lo_i = b * detail::kBatch;
        std::int64_t hi_i = std::min(n_samples, lo_i + detail::kBatch);
        for (std::int64_t i = lo_i; i < hi_i; ++i) {
            SplitMix64 rng = sample_stream(seed, static_cast<std::uint64_t>(i));
            PointConfiguration omega = geom::sample_ppp(rate, rng);
            int count = 0;
            for (const Vec2& p : omega.points)
                count += (p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y);
            double v = std::exp(c * count - c * mass);
            sums[b].add(v);
            sums2[b].add(v * v);
        }
    });
    Kahan sum, sum2;
    for (std::int64_t b = 0; b < nbatches; ++b) {
        sum.add(sums[b].value());
        sum2.add(sums2[b].value());
    }
    LaplaceCheck out;
    double n = static_cast<double>(n_samples);
    out.estimate = sum.value() / n;
    double var = std::max(0.0, (sum2.value() - n * out.estimate * out.estimate) / (n - 1));
    out.std_error = std::sqrt(var / n);
    out.target = std::exp(mass * (std::expm1(c) - c));
    out.z_score = out.std_error > 0 ? (out.estimate - out.target) / out.std_error : 0.0;
    return out;
}

}  // namespace poissonkit::mc
