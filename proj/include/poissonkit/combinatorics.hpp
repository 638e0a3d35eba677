#pragma once

#include <poissonkit/rational.hpp>

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace poissonkit::comb {

// Visits all sequences 0 = k_1 << k_2 << ... << k_{a+1} = n, where
// a << b means a < b-1.  k has a+1 entries.  These index sets drive the
// closed moment formula and the associated Stirling numbers.
template <typename Visit>
void for_each_gapped_sequence(int n, int a, Visit&& visit) {
    if (a == 0) {
        if (n == 0) {
            std::vector<int> k{0};
            visit(k);
        }
        return;
    }
    if (n < 2 * a) return;
    std::vector<int> k(a + 1);
    k[0] = 0;
    k[a] = n;
    auto rec = [&](auto&& self, int pos) -> void {
        if (pos == a) {
            if (k[a] > k[a - 1] + 1) visit(k);
            return;
        }
        for (int v = k[pos - 1] + 2; v + 2 * (a - pos) <= n; ++v) {
            k[pos] = v;
            self(self, pos + 1);
        }
    };
    if (a == 1) {
        if (n > 1) visit(k);
        return;
    }
    rec(rec, 1);
}

class StirlingTable {
public:
    explicit StirlingTable(int max_n = 64) : max_n_(max_n) { grow(0); }

    int max_n() const { return max_n_; }

    // Signed first kind: s(n+1,k) = s(n,k-1) - n*s(n,k).
    Int s1(int n, int k) const {
        check(n, k);
        grow(n);
        return s1_[n][k];
    }

    // Second kind via the triangular recurrence.
    Int s2(int n, int k) const {
        check(n, k);
        grow(n);
        return s2_[n][k];
    }

    // Second kind via the alternating-sum formula; independent of s2().
    Int s2_formula(int n, int c) const {
        check(n, c);
        Int acc = 0;
        for (int l = 0; l <= c; ++l) {
            Int term = binomial(c, l) * int_pow(Int(l), n);
            if ((c - l) % 2) acc -= term; else acc += term;
        }
        Int f = factorial(c);
        if (acc % f != 0) throw std::logic_error("s2_formula: non-integral");
        return acc / f;
    }

    // Associated second kind (blocks of size >= 2), from the gapped-index sum.
    Int s2_assoc(int n, int a) const {
        if (n < 0 || a < 0) throw std::invalid_argument("s2_assoc: negative index");
        Int acc = 0;
        for_each_gapped_sequence(n, a, [&](const std::vector<int>& k) {
            Int prod = 1;
            for (int l = 0; l + 1 <= a; ++l) prod *= binomial(k[l + 1] - 1, k[l]);
            acc += prod;
        });
        return acc;
    }

private:
    void check(int n, int k) const {
        if (n < 0 || k < 0 || k > n || n > max_n_)
            throw std::invalid_argument("StirlingTable: index out of range");
    }
    void grow(int n) const {
        for (int m = static_cast<int>(s1_.size()); m <= n; ++m) {
            std::vector<Int> r1(m + 1), r2(m + 1);
            if (m == 0) {
                r1[0] = 1;
                r2[0] = 1;
            } else {
                for (int k = 0; k <= m; ++k) {
                    Int a1 = (k > 0) ? s1_[m - 1][k - 1] : Int(0);
                    Int b1 = (k <= m - 1) ? s1_[m - 1][k] : Int(0);
                    r1[k] = a1 - (m - 1) * b1;
                    Int a2 = (k > 0) ? s2_[m - 1][k - 1] : Int(0);
                    Int b2 = (k <= m - 1) ? s2_[m - 1][k] : Int(0);
                    r2[k] = a2 + k * b2;
                }
            }
            s1_.push_back(std::move(r1));
            s2_.push_back(std::move(r2));
        }
    }

    int max_n_;
    mutable std::vector<std::vector<Int>> s1_, s2_;
};

struct PartitionShape {
    std::vector<int> block_sizes;  // the a blocks, each >= 1
    int singleton_count = 0;       // b

    int ground_size() const {
        int t = singleton_count;
        for (int l : block_sizes) t += l;
        return t;
    }
};

// The nested-product index sum of C(l_1,...,l_a,b), reparameterized: the
// outer sum over 0 = r_{b+1} < ... < r_0 = a+b+1 places the b singletons
// among the a blocks in increasing-maxima order, which is the same as
// choosing a nondecreasing vector q_1 <= ... <= q_a with q_p in [0,b] the
// number of singletons preceding block p; block p then contributes
// binom(l_1+...+l_p + q_p - 1, l_1+...+l_{p-1} + q_p).  This counts the
// partitions whose non-singleton blocks, listed by increasing block maximum,
// have exactly the sizes (l_1,...,l_a) in that order.
inline Int partition_count_sequence(const std::vector<int>& sizes, int b) {
    const int a = static_cast<int>(sizes.size());
    if (b < 0) throw std::invalid_argument("partition_count: negative singleton count");
    for (int l : sizes)
        if (l < 1) throw std::invalid_argument("partition_count: block size < 1");
    if (a == 0) return 1;  // b singletons, one partition

    std::vector<long> prefix(a + 1, 0);
    for (int p = 1; p <= a; ++p) prefix[p] = prefix[p - 1] + sizes[p - 1];

    Int total = 0;
    auto rec = [&](auto&& self, int p, int qmin, Int prod) -> void {
        if (p > a) {
            total += prod;
            return;
        }
        for (int q = qmin; q <= b; ++q)
            self(self, p + 1, q, prod * binomial(prefix[p] + q - 1, prefix[p - 1] + q));
    };
    rec(rec, 1, 0, Int(1));
    return total;
}

// Partitions of an (l_1+...+l_a+b)-set into blocks of the given size multiset
// plus b singletons.  When sizes repeat, the index-sum formula is summed over
// the distinct orderings of the multiset so the result counts unordered
// partitions; size-1 entries are folded into the singleton pool first (an
// unordered partition cannot distinguish them).  The enumeration oracle
// fixed this convention.
inline Int partition_count(const PartitionShape& shape) {
    std::vector<int> sizes;
    int b = shape.singleton_count;
    for (int l : shape.block_sizes) {
        if (l < 1) throw std::invalid_argument("partition_count: block size < 1");
        if (l == 1) ++b; else sizes.push_back(l);
    }
    std::sort(sizes.begin(), sizes.end());
    Int total = 0;
    do {
        total += partition_count_sequence(sizes, b);
    } while (std::next_permutation(sizes.begin(), sizes.end()));
    return total;
}

struct IdentityReport {
    bool ok = true;
    std::vector<std::string> failures;

    void fail(std::string msg) {
        ok = false;
        failures.push_back(std::move(msg));
    }
};

// Stirling inversion: sum_k S(n,k) s(k,l) = 1{n=l}.
inline IdentityReport check_identity_inv(int max_n, const StirlingTable& st) {
    IdentityReport rep;
    for (int n = 0; n <= max_n; ++n) {
        for (int l = 0; l <= n; ++l) {
            Int acc = 0;
            for (int k = l; k <= n; ++k) acc += st.s2(n, k) * st.s1(k, l);
            Int expect = (n == l) ? 1 : 0;
            if (acc != expect) {
                std::ostringstream os;
                os << "inv n=" << n << " l=" << l << " got " << acc;
                rep.fail(os.str());
            }
        }
    }
    return rep;
}

// S2(n,c) = sum_a (-1)^a C(n,a) S(n-a,c-a)  and its inverse
// S(n,a) = sum_c C(n,c) S2(n-c,a-c).
inline IdentityReport check_identity_id_fd(int max_n, const StirlingTable& st) {
    IdentityReport rep;
    for (int n = 0; n <= max_n; ++n) {
        for (int c = 0; c <= n; ++c) {
            Int acc = 0;
            for (int a = 0; a <= c; ++a) {
                Int term = binomial(n, a) * st.s2(n - a, c - a);
                if (a % 2) acc -= term; else acc += term;
            }
            if (acc != st.s2_assoc(n, c)) {
                std::ostringstream os;
                os << "id n=" << n << " c=" << c << " got " << acc
                   << " want " << st.s2_assoc(n, c);
                rep.fail(os.str());
            }
        }
        for (int a = 0; a <= n; ++a) {
            Int acc = 0;
            for (int c = 0; c <= a; ++c) acc += binomial(n, c) * st.s2_assoc(n - c, a - c);
            if (acc != st.s2(n, a)) {
                std::ostringstream os;
                os << "fd n=" << n << " a=" << a << " got " << acc
                   << " want " << st.s2(n, a);
                rep.fail(os.str());
            }
        }
    }
    return rep;
}

// C(a+b,a) S(n,a+b) = sum_{l<=b} sum_{k=l..n} C(n,k) C(k,l) S(k-l,a) S2(n-k,b-l).
inline IdentityReport check_lemma_ll(int a, int b, int n, const StirlingTable& st) {
    IdentityReport rep;
    if (a < 0 || b < 0 || n < 0) throw std::invalid_argument("check_lemma_ll: negative index");
    Int lhs = (a + b <= n) ? binomial(a + b, a) * st.s2(n, a + b) : Int(0);
    Int rhs = 0;
    for (int l = 0; l <= b; ++l) {
        for (int k = l; k <= n; ++k) {
            if (k - l < a || n - k < 2 * (b - l)) continue;
            rhs += binomial(n, k) * binomial(k, l) * st.s2(k - l, a) * st.s2_assoc(n - k, b - l);
        }
    }
    if (lhs != rhs) {
        std::ostringstream os;
        os << "lemma_ll a=" << a << " b=" << b << " n=" << n
           << " lhs=" << lhs << " rhs=" << rhs;
        rep.fail(os.str());
    }
    return rep;
}

}  // namespace poissonkit::comb
