#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace poissonkit {

// Enumerates set partitions of {0,..,n-1} as restricted growth strings:
// a[0]=0 and a[i] <= 1 + max(a[0..i-1]). visit(a, nblocks) is called once
// per partition; a[i] is the block index of element i.
template <typename Visit>
void for_each_set_partition(int n, Visit&& visit) {
    if (n <= 0) {
        std::vector<int> empty;
        visit(empty, 0);
        return;
    }
    std::vector<int> a(n, 0), m(n, 0);  // m[i] = max(a[0..i])
    while (true) {
        visit(a, m[n - 1] + 1);
        int i = n - 1;
        while (i > 0 && a[i] == m[i - 1] + 1) --i;
        if (i == 0) break;
        ++a[i];
        m[i] = std::max(a[i], m[i - 1]);
        for (int j = i + 1; j < n; ++j) {
            a[j] = 0;
            m[j] = m[i];
        }
    }
}

// Block-size multiset of an RGS partition, sorted descending.
inline std::vector<int> block_sizes(const std::vector<int>& a, int nblocks) {
    std::vector<int> sz(nblocks, 0);
    for (int x : a) ++sz[x];
    std::sort(sz.begin(), sz.end(), std::greater<int>());
    return sz;
}

// Number of partitions of an n-set into exactly `a` blocks, all of size >= 2.
// Direct enumeration with singleton pruning; elements are placed in order and
// each new block is opened by the smallest unplaced element.
inline std::int64_t count_partitions_min_block2(int n, int a) {
    if (a == 0) return n == 0 ? 1 : 0;
    if (n < 2 * a) return 0;
    std::int64_t count = 0;
    std::vector<int> sz;
    sz.reserve(a);
    auto rec = [&](auto&& self, int placed) -> void {
        int remaining = n - placed;
        int singles = 0;
        for (int s : sz) singles += (s == 1);
        if (singles > remaining) return;
        if (placed == n) {
            if (static_cast<int>(sz.size()) == a && singles == 0) ++count;
            return;
        }
        for (auto& s : sz) {
            ++s;
            self(self, placed + 1);
            --s;
        }
        if (static_cast<int>(sz.size()) < a) {
            sz.push_back(1);
            self(self, placed + 1);
            sz.pop_back();
        }
    };
    rec(rec, 0);
    return count;
}

// Number of partitions of an n-set whose block sizes match the given
// multiset (enumeration oracle; sizes need not be sorted).
inline std::int64_t count_partitions_with_shape(int n, std::vector<int> sizes) {
    std::sort(sizes.begin(), sizes.end(), std::greater<int>());
    std::int64_t count = 0;
    for_each_set_partition(n, [&](const std::vector<int>& a, int nblocks) {
        if (nblocks != static_cast<int>(sizes.size())) return;
        if (block_sizes(a, nblocks) == sizes) ++count;
    });
    return count;
}

}  // namespace poissonkit
