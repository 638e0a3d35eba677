#pragma once

#include <poissonkit/combinatorics.hpp>
#include <poissonkit/partitions.hpp>
#include <poissonkit/polynomials.hpp>
#include <poissonkit/rational.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace poissonkit::moments {

// Deterministic integrand h of the compensated integral delta(h): a finite
// family of disjoint cells, cell i carrying value c_i on a set of mass s_i.
struct StepFunction {
    struct Cell {
        Rat value;
        Rat mass;  // >= 0
    };
    std::vector<Cell> cells;

    StepFunction() = default;
    StepFunction(std::initializer_list<std::pair<Rat, Rat>> init) {
        for (auto& [c, s] : init) cells.push_back({c, s});
    }

    void validate() const {
        for (const auto& c : cells)
            if (c.mass < 0) throw std::invalid_argument("StepFunction: negative mass");
    }
};

// integral of h^p dsigma = sum_i c_i^p s_i.
inline Rat power_integral(const StepFunction& h, int p) {
    if (p < 1) throw std::invalid_argument("power_integral: p < 1");
    Rat acc = 0;
    for (const auto& c : h.cells) acc += rat_pow(c.value, p) * c.mass;
    return acc;
}

// E[delta(h)^n] by the recursive covariance identity
// E[d^{n+1}] = sum_{k=1..n} binom(n,k) I_{k+1} E[d^{n-k}].
inline Rat moment_recursive(const StepFunction& h, int n) {
    if (n < 0) throw std::invalid_argument("moment_recursive: n < 0");
    std::vector<Rat> mom(n + 1);
    mom[0] = 1;
    if (n >= 1) mom[1] = 0;
    for (int m = 1; m < n; ++m) {
        Rat acc = 0;
        for (int k = 1; k <= m; ++k)
            acc += Rat(binomial(m, k)) * power_integral(h, k + 1) * mom[m - k];
        mom[m + 1] = acc;
    }
    return mom[n];
}

// E[delta(h)^n] by the closed gapped-index formula.
inline Rat moment_closed(const StepFunction& h, int n) {
    if (n < 1) throw std::invalid_argument("moment_closed: n < 1");
    Rat acc = 0;
    for (int a = 1; a <= n / 2; ++a) {
        comb::for_each_gapped_sequence(n, a, [&](const std::vector<int>& k) {
            Rat term = 1;
            for (int l = 0; l < a; ++l) {
                term *= Rat(binomial(k[l + 1] - 1, k[l]));
                term *= power_integral(h, k[l + 1] - k[l]);
            }
            acc += term;
        });
    }
    return acc;
}

// E[delta(h)^n] by summing cumulant products over all set partitions,
// kappa_1 = 0 and kappa_m = I_m for m >= 2.
inline Rat moment_cumulant(const StepFunction& h, int n) {
    if (n < 1) throw std::invalid_argument("moment_cumulant: n < 1");
    if (n > 12) throw std::length_error("moment_cumulant: n > 12 (Bell-number blowup)");
    std::vector<Rat> kappa(n + 1);
    kappa[1] = 0;
    for (int m = 2; m <= n; ++m) kappa[m] = power_integral(h, m);
    Rat acc = 0;
    for_each_set_partition(n, [&](const std::vector<int>& a, int nblocks) {
        std::vector<int> sz(nblocks, 0);
        for (int x : a) ++sz[x];
        Rat prod = 1;
        for (int s : sz) {
            if (s == 1) return;  // kappa_1 = 0 kills the partition
            prod *= kappa[s];
        }
        acc += prod;
    });
    return acc;
}

// E[(Z-lambda)^n] = sum_a lambda^a S2(n,a) for Z ~ Poisson(lambda).
inline Rat central_poisson_moment(int n, const Rat& lambda, const comb::StirlingTable& st) {
    if (n < 0 || lambda < 0) throw std::invalid_argument("central_poisson_moment: bad args");
    Rat acc = 0;
    for (int a = 0; a <= n / 2; ++a) acc += rat_pow(lambda, a) * Rat(st.s2_assoc(n, a));
    return acc;
}

// Upper bound on sum_{k>K} e^{-lambda} lambda^k/k! (k+lambda)^n, by the ratio
// test: for k > K the term ratio is at most
//   r(K) = lambda/(K+2) * ((K+2+lambda)/(K+1+lambda))^n,
// so the tail is bounded by term(K+1)/(1-r) once r(K) <= 1/2.  With n = 0
// this is the plain Poisson tail bound.
inline double poisson_polynomial_tail_bound(const Rat& lambda, int n, int K) {
    double lam = rat_to_double(lambda);
    double r = lam / (K + 2) * std::pow((K + 2 + lam) / (K + 1 + lam), n);
    if (!(r <= 0.5)) return HUGE_VAL;
    double log_term = -lam + (K + 1) * std::log(lam) - std::lgamma(K + 2) +
                      n * std::log(K + 1 + lam);
    return std::exp(log_term) / (1.0 - r);
}

// Smallest truncation K whose documented tail bound is below `bound`.
inline int poisson_trunc_for_tail(const Rat& lambda, int n, double bound) {
    for (int K = 1; K < 100000; ++K) {
        if (poisson_polynomial_tail_bound(lambda, n, K) <= bound) return K;
    }
    throw std::runtime_error("poisson_trunc_for_tail: no K found");
}

// Truncated E[C_n(Z,lambda)], Z ~ Poisson(lambda).  The inner sum
// sum_{k<=trunc} lambda^k/k! C_n(k,lambda) is exact rational; e^{-lambda}
// enters once at the end, so the only error is the documented Poisson tail
// (|C_n(k,lambda)| <= C_n(k,-lambda) <= (k+lambda)^n for integer k >= 0).
inline double charlier_mean(int n, const Rat& lambda, int trunc,
                            const comb::StirlingTable& st) {
    if (n < 0 || !(lambda > 0)) throw std::invalid_argument("charlier_mean: bad args");
    if (n == 0) return 1.0;  // C_0 = 1
    int needed = poisson_trunc_for_tail(lambda, n, 1e-14);
    if (trunc < needed)
        throw std::invalid_argument("charlier_mean: trunc below documented 1e-14 tail bound (need " +
                                    std::to_string(needed) + ")");
    poly::BivariatePoly cn = poly::charlier(n, st);
    Rat acc = 0;
    Rat w = 1;  // lambda^k / k!
    for (int k = 0; k <= trunc; ++k) {
        acc += w * cn.eval(Rat(k), lambda);
        w = w * lambda / (k + 1);
    }
    return rat_to_double(acc) * std::exp(-rat_to_double(lambda));
}

inline int charlier_mean_default_trunc(int n, const Rat& lambda) {
    return poisson_trunc_for_tail(lambda, n, 1e-14);
}

// Exact exponent description of the Laplace functional (lp):
// E[exp(integral f d(omega-sigma))] = exp(sum_i s_i (e^{c_i} - c_i - 1)).
struct LaplaceFunctional {
    double exponent = 0.0;
    double value = 1.0;
    std::string description;  // symbolic form of the exponent
};

inline LaplaceFunctional laplace_functional(const std::vector<std::pair<double, double>>& cells) {
    LaplaceFunctional out;
    std::string desc;
    for (auto& [c, s] : cells) {
        if (s < 0) throw std::invalid_argument("laplace_functional: negative mass");
        out.exponent += s * (std::expm1(c) - c);
        if (!desc.empty()) desc += " + ";
        desc += std::to_string(s) + "*(e^(" + std::to_string(c) + ") - " +
                std::to_string(c) + " - 1)";
    }
    if (desc.empty()) desc = "0";
    out.description = desc;
    out.value = std::exp(out.exponent);
    return out;
}

inline LaplaceFunctional laplace_functional(const StepFunction& f) {
    std::vector<std::pair<double, double>> cells;
    for (const auto& c : f.cells) cells.emplace_back(rat_to_double(c.value), rat_to_double(c.mass));
    return laplace_functional(cells);
}

}  // namespace poissonkit::moments
