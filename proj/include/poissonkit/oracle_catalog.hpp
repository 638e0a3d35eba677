#pragma once

#include <poissonkit/finite_oracle.hpp>

#include <string>
#include <vector>

namespace poissonkit::oracle {

template <typename S>
struct NamedProcess {
    std::string name;
    Process<S> u;
    bool anticipating = false;
};

template <typename S>
struct NamedFunctional {
    std::string name;
    Functional<S> f;
};

// All counts at most 1: a window that keeps every catalog process globally
// bounded, so the sup-based error radius is a genuine bound and the
// truncated expectations coincide with the untruncated ones.
inline bool in_unit_window(const Counts& k, int m) {
    for (int i = 0; i < m; ++i)
        if (k[i] > 1) return false;
    return true;
}

// Window-localized catalog (dyadic values): the default set used by the
// acceptance checks for duality/isometry/commutation.
template <typename S>
std::vector<NamedProcess<S>> standard_catalog(const CellSpace<S>& sp) {
    const int m = sp.m;
    auto w = [m](const Counts& k) { return in_unit_window(k, m); };
    std::vector<NamedProcess<S>> cat;
    cat.push_back({"det_window",
                   [w](const Counts& k, int) { return w(k) ? S(1) / S(2) : S(0); },
                   true});  // anticipating through the window indicator
    cat.push_back({"lower_reads_window",
                   [w](const Counts& k, int i) {
                       if (!w(k)) return S(0);
                       if (i == 1) return k[0] >= 1 ? S(1) / S(4) : S(0);
                       if (i == 2) return k[1] == 0 ? S(1) / S(2) : S(0);
                       return S(1) / S(8);
                   },
                   true});
    cat.push_back({"cross_anticipating",
                   [w](const Counts& k, int i) {
                       if (!w(k)) return S(0);
                       if (i == 0) return k[1] == 0 ? S(1) / S(2) : S(0);
                       if (i == 1) return k[0] == 0 ? S(1) / S(2) : S(0);
                       return S(0);
                   },
                   true});
    cat.push_back({"self_reading",
                   [w](const Counts& k, int i) {
                       if (i != 0 || !w(k)) return S(0);
                       return k[0] >= 1 ? S(1) / S(2) : S(0);
                   },
                   true});
    cat.push_back({"indicator_origin",
                   [m](const Counts& k, int) {
                       for (int i = 0; i < m; ++i)
                           if (k[i] != 0) return S(0);
                       return S(1) / S(2);
                   },
                   true});
    cat.push_back({"clipped_counts",
                   [w, m](const Counts& k, int i) {
                       if (!w(k)) return S(0);
                       if (i == 0) return S(std::min(k[std::min(1, m - 1)], 1)) / S(2);
                       if (i == 1 && m > 2) return S(std::min(k[2], 1)) / S(4);
                       return S(0);
                   },
                   true});
    return cat;
}

// Unbounded classics for unit-level checks (their honest radii are larger).
template <typename S>
std::vector<NamedProcess<S>> unbounded_catalog(const CellSpace<S>& sp) {
    const int m = sp.m;
    std::vector<NamedProcess<S>> cat;
    cat.push_back({"deterministic_one", [](const Counts&, int) { return S(1); }, false});
    if (m >= 2) {
        cat.push_back({"count_of_next_cell",
                       [m](const Counts& k, int i) { return S(k[(i + 1) % m]); },
                       true});
    }
    cat.push_back({"own_presence",
                   [](const Counts& k, int i) { return k[i] >= 1 ? S(1) : S(0); },
                   true});
    return cat;
}

template <typename S>
std::vector<NamedFunctional<S>> standard_functionals(const CellSpace<S>& sp) {
    const int m = sp.m;
    std::vector<NamedFunctional<S>> fs;
    fs.push_back({"one", [](const Counts&) { return S(1); }});
    fs.push_back({"cell0_present", [](const Counts& k) { return k[0] >= 1 ? S(1) : S(0); }});
    fs.push_back({"clipped_cell1", [m](const Counts& k) {
                      return S(std::min(k[std::min(1, m - 1)], 2)) / S(2);
                  }});
    fs.push_back({"corner", [m](const Counts& k) {
                      return (k[0] >= 1 && k[m - 1] == 0) ? S(1) : S(0);
                  }});
    return fs;
}

// tau catalogs for the l12 / t1.1 checks.  Labels index into a value table g.
inline TauRule tau_identity(int m) {
    TauRule t;
    t.label = [](const Counts&, int i) { return i; };
    t.reads.assign(m, 0u);
    return t;
}

// Cell i's label depends only on cells j < i: quasi-nilpotent by the
// acyclic reads graph (the cell analogue of adaptedness).
inline TauRule tau_adapted(int m) {
    TauRule t;
    t.label = [](const Counts& k, int i) {
        int offset = 0;
        for (int j = 0; j < i; ++j) offset += (k[j] >= 1) ? 1 : 0;
        return i + (offset % 2 == 0 ? 0 : 3);
    };
    std::vector<std::uint32_t> reads(m, 0u);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j) reads[i] |= 1u << j;
    t.reads = std::move(reads);
    return t;
}

// Genuine 2-cycle: cell 0 reads cell 1 and vice versa; the cyclic product
// D_{t0} tau(.,t1) D_{t1} tau(.,t0) does not vanish.
inline TauRule tau_cyclic_counterexample(int m) {
    TauRule t;
    t.label = [](const Counts& k, int i) {
        if (i == 0) return k[1] >= 1 ? 3 : 0;
        if (i == 1) return k[0] >= 1 ? 4 : 1;
        return i;
    };
    std::vector<std::uint32_t> reads(m, 0u);
    reads[0] = 1u << 1;
    if (m > 1) reads[1] = 1u << 0;
    t.reads = std::move(reads);
    return t;
}

}  // namespace poissonkit::oracle
