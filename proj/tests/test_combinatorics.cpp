#include <poissonkit/combinatorics.hpp>
#include <poissonkit/partitions.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

using namespace poissonkit;
using comb::PartitionShape;
using comb::StirlingTable;

namespace {

// Oracle: expand the falling factorial x(x-1)...(x-n+1); coefficient of x^k
// is s(n,k).
std::vector<Int> falling_factorial_coeffs(int n) {
    std::vector<Int> c{1};  // constant polynomial 1
    for (int i = 0; i < n; ++i) {
        std::vector<Int> next(c.size() + 1, Int(0));
        for (size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= Int(i) * c[k];
        }
        c = std::move(next);
    }
    return c;
}

// Oracle: count permutations of n elements with exactly k cycles by direct
// enumeration (n small).
std::int64_t count_permutations_with_cycles(int n, int k) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::int64_t count = 0;
    do {
        std::vector<bool> seen(n, false);
        int cycles = 0;
        for (int i = 0; i < n; ++i) {
            if (seen[i]) continue;
            ++cycles;
            for (int j = i; !seen[j]; j = perm[j]) seen[j] = true;
        }
        if (cycles == k) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

std::int64_t count_partitions_into_blocks(int n, int k) {
    std::int64_t count = 0;
    for_each_set_partition(n, [&](const std::vector<int>&, int nb) {
        if (nb == k) ++count;
    });
    return count;
}

}  // namespace

TEST_CASE("stirling first kind: pinned values and recurrence") {
    StirlingTable st;
    CHECK(st.s1(0, 0) == 1);
    // 2 one-cycle permutations of 3 elements, sign (+1)
    CHECK(st.s1(3, 1) == 2);
    // coefficient of x^2 in x(x-1)(x-2)(x-3)
    CHECK(st.s1(4, 2) == 11);
    CHECK(st.s1(5, 5) == 1);
    CHECK(st.s1(4, 0) == 0);
    CHECK_THROWS_AS(st.s1(3, 4), std::invalid_argument);
    CHECK_THROWS_AS(st.s1(-1, 0), std::invalid_argument);
}

TEST_CASE("stirling first kind matches falling factorial for n <= 18") {
    StirlingTable st;
    for (int n = 0; n <= 18; ++n) {
        auto coeffs = falling_factorial_coeffs(n);
        for (int k = 0; k <= n; ++k) CHECK(st.s1(n, k) == coeffs[k]);
    }
}

TEST_CASE("unsigned stirling first kind counts permutation cycles") {
    StirlingTable st;
    for (int n = 1; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            Int expected = count_permutations_with_cycles(n, k);
            Int got = st.s1(n, k);
            if ((n - k) % 2) got = -got;
            CHECK(got == expected);
        }
    }
}

TEST_CASE("stirling second kind: pinned values, formula agreement") {
    StirlingTable st;
    CHECK(st.s2(4, 2) == 7);
    CHECK(st.s2(3, 2) == 3);
    for (int n = 0; n <= 10; ++n) CHECK(st.s2(n, n) == 1);
    for (int n = 0; n <= 18; ++n)
        for (int k = 0; k <= n; ++k) CHECK(st.s2(n, k) == st.s2_formula(n, k));
    for (int n = 1; n <= 8; ++n)
        for (int k = 1; k <= n; ++k)
            CHECK(st.s2(n, k) == Int(count_partitions_into_blocks(n, k)));
}

TEST_CASE("associated stirling numbers: pinned values and enumeration oracle") {
    StirlingTable st;
    CHECK(st.s2_assoc(2, 1) == 1);
    CHECK(st.s2_assoc(4, 2) == 3);
    CHECK(st.s2_assoc(6, 2) == 25);
    for (int n = 0; n <= 14; ++n)
        for (int a = 0; a <= n / 2 + 1; ++a)
            CHECK(st.s2_assoc(n, a) == Int(count_partitions_min_block2(n, a)));
    for (int n = 0; n <= 18; ++n)
        for (int a = 0; a <= 9; ++a)
            if (n < 2 * a) CHECK(st.s2_assoc(n, a) == 0);
}

TEST_CASE("partition_count: pinned shapes") {
    CHECK(comb::partition_count({{2}, 0}) == 1);
    CHECK(comb::partition_count({{2}, 1}) == 3);
    CHECK(comb::partition_count({{2, 2}, 0}) == 3);
    CHECK_THROWS_AS(comb::partition_count({{0}, 1}), std::invalid_argument);
}

TEST_CASE("partition_count matches enumeration for all shapes with ground <= 9") {
    // every multiset of block sizes >= 2 plus singleton count; the formula
    // counts unordered partitions even with repeated sizes
    auto check_shape = [&](const std::vector<int>& sizes, int b) {
        PartitionShape shape{sizes, b};
        int ground = shape.ground_size();
        std::vector<int> all = sizes;
        for (int i = 0; i < b; ++i) all.push_back(1);
        Int expected = (ground == 0) ? Int(1) : Int(count_partitions_with_shape(ground, all));
        CAPTURE(ground, b);
        CHECK(comb::partition_count(shape) == expected);
    };
    std::function<void(int, int, std::vector<int>&)> shapes =
        [&](int remaining, int min_size, std::vector<int>& sizes) {
            check_shape(sizes, remaining);  // leftover elements as singletons
            for (int l = min_size; l <= remaining; ++l) {
                sizes.push_back(l);
                shapes(remaining - l, l, sizes);
                sizes.pop_back();
            }
        };
    for (int ground = 0; ground <= 9; ++ground) {
        std::vector<int> sizes;
        shapes(ground, 2, sizes);
    }
    // size-1 entries listed as blocks rather than singletons behave the same
    check_shape({1}, 0);
    check_shape({1, 2}, 0);
    check_shape({1, 1, 2}, 1);
}

TEST_CASE("identity (inv): stirling inversion") {
    StirlingTable st;
    auto rep = comb::check_identity_inv(18, st);
    CHECK(rep.ok);
    CHECK(rep.failures.empty());
    // pinned cases
    Int acc = 0;
    for (int k = 3; k <= 5; ++k) acc += st.s2(5, k) * st.s1(k, 3);
    CHECK(acc == 0);
    acc = 0;
    for (int k = 1; k <= 8; ++k) acc += st.s2(8, k) * st.s1(k, 1);
    CHECK(acc == 0);
    acc = 0;
    for (int k = 5; k <= 5; ++k) acc += st.s2(5, k) * st.s1(k, 5);
    CHECK(acc == 1);
}

TEST_CASE("identities (id) and (fd)") {
    StirlingTable st;
    auto rep = comb::check_identity_id_fd(18, st);
    CHECK(rep.ok);
    // n=4, a=2 in (fd): S(4,2) = S2(4,2) + 4 S2(3,1) = 3 + 4
    CHECK(st.s2(4, 2) == st.s2_assoc(4, 2) + 4 * st.s2_assoc(3, 1));
    // n=2, c=1 in (id)
    CHECK(st.s2_assoc(2, 1) == st.s2(2, 1));
}

TEST_CASE("lemma (ll) double-sum identity") {
    StirlingTable st;
    for (int n = 0; n <= 18; ++n)
        for (int a = 0; a <= n; ++a)
            for (int b = 0; a + b <= n; ++b) CHECK(comb::check_lemma_ll(a, b, n, st).ok);
    CHECK(comb::check_lemma_ll(1, 0, 3, st).ok);
    CHECK(comb::check_lemma_ll(0, 1, 2, st).ok);
    CHECK(comb::check_lemma_ll(2, 1, 5, st).ok);
    CHECK(st.s2(5, 3) == 25);  // LHS of the (2,1,5) case is 3*25
}

TEST_CASE("(defin) ordered form sums to binom(n,b) S(n-b,a) over compositions") {
    StirlingTable st;
    for (int n = 0; n <= 9; ++n) {
        for (int b = 0; b <= n; ++b) {
            for (int a = 0; a <= n - b; ++a) {
                Int total = 0;
                std::vector<int> comp;
                std::function<void(int, int)> rec = [&](int rem, int parts) {
                    if (parts == 0) {
                        if (rem == 0) total += comb::partition_count_sequence(comp, b);
                        return;
                    }
                    for (int l = 1; l + parts - 1 <= rem; ++l) {
                        comp.push_back(l);
                        rec(rem - l, parts - 1);
                        comp.pop_back();
                    }
                };
                rec(n - b, a);
                Int expected = (a == 0 && n - b > 0) ? Int(0) : binomial(n, b) * st.s2(n - b, a);
                CAPTURE(n, b, a);
                CHECK(total == expected);
            }
        }
    }
}

TEST_CASE("gapped sequence iterator basics") {
    int count = 0;
    comb::for_each_gapped_sequence(6, 2, [&](const std::vector<int>& k) {
        REQUIRE(k.size() == 3);
        CHECK(k[0] == 0);
        CHECK(k[2] == 6);
        CHECK(k[1] >= 2);
        CHECK(k[1] <= 4);
        ++count;
    });
    CHECK(count == 3);
    comb::for_each_gapped_sequence(3, 2, [&](const std::vector<int>&) { FAIL("n<2a must not visit"); });
}
