#pragma once

#include <poissonkit/combinatorics.hpp>
#include <poissonkit/rational.hpp>

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace poissonkit::poly {

// Sparse exact polynomial in (y, lambda); key = (deg_y, deg_lambda).
// No zero coefficients are stored.
class BivariatePoly {
public:
    using Key = std::pair<int, int>;
    using Map = std::map<Key, Rat>;

    BivariatePoly() = default;
    static BivariatePoly constant(Rat c) {
        BivariatePoly p;
        p.add_term(0, 0, std::move(c));
        return p;
    }

    const Map& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(int dy, int dl, Rat c) {
        if (c == 0) return;
        auto it = terms_.find({dy, dl});
        if (it == terms_.end()) {
            terms_.emplace(Key{dy, dl}, std::move(c));
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    BivariatePoly& operator+=(const BivariatePoly& o) {
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
        return *this;
    }
    BivariatePoly& operator-=(const BivariatePoly& o) {
        for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
        return *this;
    }
    friend BivariatePoly operator+(BivariatePoly a, const BivariatePoly& b) { return a += b; }
    friend BivariatePoly operator-(BivariatePoly a, const BivariatePoly& b) { return a -= b; }

    friend BivariatePoly operator*(const BivariatePoly& a, const BivariatePoly& b) {
        BivariatePoly r;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_)
                r.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
        return r;
    }

    BivariatePoly& operator*=(const Rat& c) {
        if (c == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [k, v] : terms_) v *= c;
        return *this;
    }
    friend BivariatePoly operator*(BivariatePoly a, const Rat& c) { return a *= c; }
    friend BivariatePoly operator*(const Rat& c, BivariatePoly a) { return a *= c; }

    bool operator==(const BivariatePoly& o) const { return terms_ == o.terms_; }

    Rat eval(const Rat& y, const Rat& lam) const {
        Rat acc = 0;
        for (const auto& [k, c] : terms_) acc += c * rat_pow(y, k.first) * rat_pow(lam, k.second);
        return acc;
    }

    // Symbolic substitution y -> y + shift*lambda.
    BivariatePoly shift_y_by_lambda(int shift) const {
        BivariatePoly r;
        for (const auto& [k, c] : terms_) {
            const int a = k.first, b = k.second;
            for (int i = 0; i <= a; ++i) {
                Rat coef = c * Rat(binomial(a, i)) * rat_pow(Rat(shift), a - i);
                r.add_term(i, b + a - i, coef);
            }
        }
        return r;
    }

    // Substitution (y,lambda) -> (lambda,-lambda); result is univariate in lambda.
    BivariatePoly substitute_y_lambda_negate() const {
        BivariatePoly r;
        for (const auto& [k, c] : terms_) {
            Rat coef = (k.second % 2) ? -c : c;
            r.add_term(0, k.first + k.second, coef);
        }
        return r;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, c] : terms_) {
            os << (first ? "" : " + ") << rat_to_string(c);
            if (k.first) os << "*y^" << k.first;
            if (k.second) os << "*L^" << k.second;
            first = false;
        }
        return os.str();
    }

private:
    Map terms_;
};

// Truncated power series in an auxiliary variable t with BivariatePoly
// coefficients.  One engine validates both generating functions.
class TruncSeries {
public:
    explicit TruncSeries(int order) : c_(order + 1) {}

    int order() const { return static_cast<int>(c_.size()) - 1; }
    BivariatePoly& operator[](int i) { return c_[i]; }
    const BivariatePoly& operator[](int i) const { return c_[i]; }

    friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
        TruncSeries r(a.order());
        for (int i = 0; i <= a.order(); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (int j = 0; i + j <= a.order(); ++j) {
                if (b.c_[j].is_zero()) continue;
                r.c_[i + j] += a.c_[i] * b.c_[j];
            }
        }
        return r;
    }

    // exp of a series with zero constant term: sum_m S^m/m! terminates at
    // m = order since S has valuation >= 1.
    TruncSeries exp() const {
        if (!c_[0].is_zero()) throw std::invalid_argument("TruncSeries::exp: nonzero constant term");
        TruncSeries r(order());
        r.c_[0] = BivariatePoly::constant(1);
        TruncSeries power(order());
        power.c_[0] = BivariatePoly::constant(1);
        Rat inv_fact = 1;
        for (int m = 1; m <= order(); ++m) {
            power = power * (*this);
            inv_fact /= m;
            for (int i = m; i <= order(); ++i) r.c_[i] += power.c_[i] * inv_fact;
        }
        return r;
    }

private:
    std::vector<BivariatePoly> c_;
};

// Charlier polynomial C_n(y,lambda): coefficient of y^k is
// sum_{j=k..n} binom(n,j) (-lambda)^{n-j} s(j,k).  (Equivalently
// n! [r^n] e^{-r lambda} (1+r)^y; the generating-function route is
// charlier_from_gf below and the two must agree.)
inline BivariatePoly charlier(int n, const comb::StirlingTable& st) {
    if (n < 0) throw std::invalid_argument("charlier: n < 0");
    BivariatePoly p;
    for (int j = 0; j <= n; ++j) {
        Rat outer = Rat(binomial(n, j));
        if ((n - j) % 2) outer = -outer;
        for (int k = 0; k <= j; ++k) {
            Rat c = outer * Rat(st.s1(j, k));
            p.add_term(k, n - j, c);
        }
    }
    return p;
}

// n! [r^n] exp(y log(1+r) - lambda r), expanded symbolically.
inline BivariatePoly charlier_from_gf(int n) {
    TruncSeries a(n);
    for (int j = 1; j <= n; ++j) {
        BivariatePoly c;
        Rat inv_j = Rat(1) / j;
        if (j % 2 == 0) inv_j = -inv_j;
        c.add_term(1, 0, inv_j);  // y * (-1)^{j+1}/j
        if (j == 1) c.add_term(0, 1, Rat(-1));
        a[j] = c;
    }
    BivariatePoly r = a.exp()[n];
    Rat f{factorial(n)};
    return r * f;
}

// Generalized Bell polynomial B_n(y,lambda) built from
// B_n(y,l) = sum_k binom(n,k) y^k B_{n-k}(0,l), B_m(0,l) = sum_a (-l)^a S2(m,a).
inline BivariatePoly gen_bell(int n, const comb::StirlingTable& st) {
    if (n < 0) throw std::invalid_argument("gen_bell: n < 0");
    BivariatePoly p;
    for (int k = 0; k <= n; ++k) {
        const int m = n - k;
        for (int a = 0; a <= m / 2; ++a) {
            Int s = st.s2_assoc(m, a);
            if (s == 0) continue;
            Rat c = Rat(binomial(n, k)) * Rat(s);
            if (a % 2) c = -c;
            p.add_term(k, a, c);
        }
    }
    return p;
}

// n! [t^n] exp(t y - lambda (e^t - t - 1)).
inline BivariatePoly gen_bell_from_gf(int n) {
    TruncSeries a(n);
    Rat fact = 1;
    for (int j = 1; j <= n; ++j) {
        fact *= j;
        BivariatePoly c;
        if (j == 1) c.add_term(1, 0, Rat(1));       // y t
        else c.add_term(0, 1, Rat(-1) / Rat(fact)); // -lambda t^j/j!
        a[j] = c;
    }
    BivariatePoly r = a.exp()[n];
    Rat f{factorial(n)};
    return r * f;
}

// Touchard polynomial B_n(lambda) = sum_c lambda^c S(n,c); univariate in lambda.
inline BivariatePoly touchard(int n, const comb::StirlingTable& st) {
    if (n < 0) throw std::invalid_argument("touchard: n < 0");
    BivariatePoly p;
    for (int c = 0; c <= n; ++c) p.add_term(0, c, Rat(st.s2(n, c)));
    return p;
}

struct DualityReport {
    bool ok = true;
    std::string mismatch;  // offending monomial, when any
};

// Stirling-transform duality:
//   C_n(y,l) = sum_k s(n,k) B_k(y-l,l)     and
//   B_n(y,l) = sum_k S(n,k) C_k(y+l,l),
// both as exact polynomial identities.
inline DualityReport check_duality(int n, const comb::StirlingTable& st) {
    DualityReport rep;
    BivariatePoly lhs1 = charlier(n, st);
    BivariatePoly rhs1;
    for (int k = 0; k <= n; ++k) {
        Int s = st.s1(n, k);
        if (s == 0) continue;
        rhs1 += gen_bell(k, st).shift_y_by_lambda(-1) * Rat(s);
    }
    BivariatePoly lhs2 = gen_bell(n, st);
    BivariatePoly rhs2;
    for (int k = 0; k <= n; ++k) {
        Int s = st.s2(n, k);
        if (s == 0) continue;
        rhs2 += charlier(k, st).shift_y_by_lambda(+1) * Rat(s);
    }
    BivariatePoly d1 = lhs1 - rhs1;
    BivariatePoly d2 = lhs2 - rhs2;
    if (!d1.is_zero() || !d2.is_zero()) {
        rep.ok = false;
        const auto& bad = !d1.is_zero() ? d1 : d2;
        auto [k, c] = *bad.terms().begin();
        std::ostringstream os;
        os << (!d1.is_zero() ? "charlier" : "bell") << " direction, monomial y^"
           << k.first << " L^" << k.second << " differs by " << rat_to_string(c);
        rep.mismatch = os.str();
    }
    return rep;
}

}  // namespace poissonkit::poly
