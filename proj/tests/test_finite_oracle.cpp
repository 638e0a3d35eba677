#include <poissonkit/finite_oracle.hpp>
#include <poissonkit/moments.hpp>
#include <poissonkit/oracle_catalog.hpp>
#include <poissonkit/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace poissonkit;
using namespace poissonkit::oracle;

namespace {

CellSpace<double> acceptance_space() {
    return make_cell_space<double>({Rat(1), Rat(3, 4), Rat(1, 2)}, 8);
}

CellSpace<Rat> exact_space(int K = 5) {
    return make_cell_space<Rat>({Rat(1), Rat(3, 4), Rat(1, 2)}, K);
}

}  // namespace

TEST_CASE("cell space: tail bound and guards") {
    auto sp = acceptance_space();
    CHECK(sp.tail_bound > 0);
    CHECK(sp.tail_bound < 2e-6);
    CHECK_THROWS_AS(make_cell_space<double>(std::vector<Rat>(8, Rat(1)), 10),
                    std::length_error);
    CHECK_THROWS_AS(make_cell_space<double>({Rat(-1)}, 4), std::invalid_argument);
}

TEST_CASE("expectation: poisson mean and variance on one cell") {
    auto sp = make_cell_space<double>({Rat(1)}, 20);
    auto one = expectation<double>(sp, [](const Counts&) { return 1.0; });
    CHECK(one.value() <= 1.0 + 1e-15);
    CHECK(one.value() >= 1.0 - sp.tail_bound - 1e-15);
    auto mean = expectation<double>(sp, [](const Counts& k) { return double(k[0]); });
    CHECK_THAT(mean.value(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    auto var = expectation<double>(sp, [](const Counts& k) {
        double c = k[0] - 1.0;
        return c * c;
    });
    CHECK_THAT(var.value(), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("finite difference basics") {
    Functional<double> f1 = [](const Counts& k) { return double(k[0]); };
    auto d1 = finite_difference(f1, 0);
    Functional<double> f2 = [](const Counts& k) { return double(k[0]) * k[0]; };
    auto d2 = finite_difference(f2, 0);
    Functional<double> f3 = [](const Counts& k) { return k[1] >= 1 ? 1.0 : 0.0; };
    auto d3 = finite_difference(f3, 0);
    Counts k{};
    k[0] = 3;
    k[1] = 2;
    CHECK(d1(k) == 1.0);
    CHECK(d2(k) == 2.0 * 3 + 1);
    CHECK(d3(k) == 0.0);
}

TEST_CASE("skorohod delta: cell form") {
    auto sp = acceptance_space();
    auto del1 = skorohod_delta<double>(sp, [](const Counts&, int) { return 1.0; });
    Counts k{};
    k[0] = 2;
    k[1] = 1;
    k[2] = 0;
    CHECK(del1(k) == (2 + 1 + 0) - (1.0 + 0.75 + 0.5));
    // u on cell 0 reading cell 1's count: contribution k0*k1 - sigma0*k1
    auto del2 = skorohod_delta<double>(sp, [](const Counts& kk, int i) {
        return i == 0 ? double(kk[1]) : 0.0;
    });
    CHECK(del2(k) == 2.0 * 1 - 1.0 * 1);
    auto del3 = skorohod_delta<double>(sp, [](const Counts& kk, int i) {
        return i == 0 ? (kk[0] >= 1 ? 1.0 : 0.0) : 0.0;
    });
    CHECK(del3(k) == 2.0 * (2 - 1 >= 1 ? 1 : 0) - 1.0 * 1);
}

TEST_CASE("duality: pinned examples") {
    auto sp1 = make_cell_space<double>({Rat(1)}, 20);
    auto c = check_duality<double>(
        sp1, [](const Counts&, int) { return 1.0; },
        [](const Counts& k) { return double(k[0]); }, "dual_u1_Fk");
    CHECK(c.pass);
    CHECK_THAT(c.lhs, Catch::Matchers::WithinAbs(1.0, 1e-10));
    CHECK_THAT(c.rhs, Catch::Matchers::WithinAbs(1.0, 1e-10));

    auto sp = acceptance_space();
    auto c2 = check_duality<double>(
        sp, [](const Counts&, int) { return 1.0; }, [](const Counts&) { return 1.0; },
        "dual_u1_F1");
    CHECK(c2.pass);
    CHECK(std::abs(c2.lhs) < 1e-15);  // DF = 0 identically

    // anticipating across cells
    auto c3 = check_duality<double>(
        sp, [](const Counts& k, int i) { return i == 0 ? double(k[1]) : 0.0; },
        [](const Counts& k) { return double(k[1]); }, "dual_anticipating");
    CHECK(c3.pass);
}

TEST_CASE("zero mean of the skorohod integral for every catalog process") {
    auto sp = acceptance_space();
    for (auto& cat : {standard_catalog<double>(sp), unbounded_catalog<double>(sp)}) {
        for (const auto& np : cat) {
            auto del = skorohod_delta<double>(sp, np.u);
            auto e = expectation<double>(sp, del);
            CAPTURE(np.name);
            CHECK(std::abs(e.value()) <= e.radius() + e.rounding());
        }
    }
}

TEST_CASE("product rule (prdr) holds pointwise exactly") {
    auto sp = acceptance_space();
    // deterministic pseudo-random dyadic tables
    auto table_fn = [](std::uint64_t salt) {
        return [salt](const Counts& k) {
            SplitMix64 g(salt ^ (k[0] * 1315423911u) ^ (k[1] * 2654435761u) ^
                         (k[2] * 0x9E3779B9u));
            return double(int(g.next() % 17) - 8) / 8.0;
        };
    };
    Functional<double> F = table_fn(101), G = table_fn(202);
    for (int i = 0; i < sp.m; ++i) {
        auto dFG = finite_difference<double>([F, G](const Counts& k) { return F(k) * G(k); }, i);
        auto dF = finite_difference(F, i), dG = finite_difference(G, i);
        for_each_lattice_point(sp, sp.trunc + 2, [&](const Counts& k) {
            double lhs = dFG(k);
            double rhs = F(k) * dG(k) + G(k) * dF(k) + dF(k) * dG(k);
            REQUIRE(lhs == rhs);
        });
    }
}

TEST_CASE("isometry: pinned and anticipating examples") {
    auto sp = acceptance_space();
    auto c1 = check_isometry<double>(sp, [](const Counts&, int) { return 1.0; }, "iso_u1");
    CHECK(c1.pass);
    double var = 1.0 + 0.75 + 0.5;
    CHECK_THAT(c1.lhs, Catch::Matchers::WithinAbs(var, c1.radius + 1e-9));

    // cross term vanishes: D_2 u_1 * D_1 u_2 with u_2 = 0
    auto c2 = check_isometry<double>(
        sp, [](const Counts& k, int i) { return i == 0 ? double(k[1]) : 0.0; }, "iso_one_sided");
    CHECK(c2.pass);

    // symmetric dependence: cross term 2*sigma1*sigma2 enters
    auto c3 = check_isometry<double>(
        sp,
        [](const Counts& k, int i) {
            if (i == 0) return double(k[1]);
            if (i == 1) return double(k[0]);
            return 0.0;
        },
        "iso_symmetric");
    CHECK(c3.pass);
}

TEST_CASE("commutation is pointwise exact for dyadic catalogs") {
    auto sp = acceptance_space();
    for (auto& cat : {standard_catalog<double>(sp), unbounded_catalog<double>(sp)}) {
        for (const auto& np : cat) {
            auto c = check_commutation<double>(sp, np.u, "comm_" + np.name);
            CAPTURE(np.name);
            CHECK(c.pass);
            CHECK(c.gap == 0.0);
        }
    }
}

TEST_CASE("catalog checks stay within sub-1e-5 radii (acceptance config)") {
    auto sp = acceptance_space();
    auto cat = standard_catalog<double>(sp);
    auto fs = standard_functionals<double>(sp);
    REQUIRE(cat.size() >= 6);
    int anticipating = 0;
    for (const auto& np : cat) anticipating += np.anticipating;
    CHECK(anticipating >= 3);
    for (size_t i = 0; i < cat.size(); ++i) {
        auto cd = check_duality<double>(sp, cat[i].u, fs[i % fs.size()].f,
                                        "duality_" + cat[i].name);
        CAPTURE(cd.id, cd.gap, cd.radius);
        CHECK(cd.pass);
        CHECK(cd.radius < 1e-5);
        auto ci = check_isometry<double>(sp, cat[i].u, "isometry_" + cat[i].name);
        CAPTURE(ci.id, ci.gap, ci.radius);
        CHECK(ci.pass);
        CHECK(ci.radius < 1e-5);
    }
}

TEST_CASE("exact rational mode certifies the double mode") {
    auto spd = make_cell_space<double>({Rat(1), Rat(3, 4), Rat(1, 2)}, 5);
    auto spr = exact_space(5);
    auto catd = standard_catalog<double>(spd);
    auto catr = standard_catalog<Rat>(spr);
    auto fsd = standard_functionals<double>(spd);
    auto fsr = standard_functionals<Rat>(spr);
    for (size_t i = 0; i < catd.size(); ++i) {
        auto cd = check_duality<double>(spd, catd[i].u, fsd[i % fsd.size()].f, "d");
        auto cr = check_duality<Rat>(spr, catr[i].u, fsr[i % fsr.size()].f, "r");
        CAPTURE(catd[i].name);
        // window-localized integrands: the truncated identity is exact
        CHECK(cr.exact_zero_gap);
        CHECK(std::abs(cd.gap - cr.gap) < 1e-12);
        CHECK_THAT(cd.lhs, Catch::Matchers::WithinAbs(cr.lhs, 1e-12));
        auto ir = check_isometry<Rat>(spr, catr[i].u, "ir");
        CHECK(ir.exact_zero_gap);
    }
    // commutation in exact arithmetic
    for (const auto& np : catr) {
        auto c = check_commutation<Rat>(spr, np.u, "comm_exact");
        CHECK(c.pass);
        CHECK(c.exact_zero_gap);
    }
}

TEST_CASE("l221: deterministic and random sets") {
    auto sp = acceptance_space();
    // deterministic A = cell 0
    Process<double> Adet = [](const Counts&, int i) { return i == 0 ? 1.0 : 0.0; };
    Functional<double> one = [](const Counts&) { return 1.0; };
    auto c2 = check_prop_l221<double>(sp, one, Adet, 2, "l221_det_n2");
    CHECK(c2.pass);
    CHECK_THAT(c2.lhs, Catch::Matchers::WithinAbs(1.0, c2.radius + 1e-9));  // sigma(A)=1
    auto c4 = check_prop_l221<double>(sp, one, Adet, 4, "l221_det_n4");
    CHECK(c4.pass);
    // central moment: sigma + 3 sigma^2 with sigma = 1
    CHECK_THAT(c4.lhs, Catch::Matchers::WithinAbs(4.0, c4.radius + 1e-6));

    // random set: cell 0 present iff k1 >= 1
    Process<double> Arand = [](const Counts& k, int i) {
        return (i == 0 && k[1] >= 1) ? 1.0 : 0.0;
    };
    auto cr = check_prop_l221<double>(sp, one, Arand, 2, "l221_rand_n2");
    CHECK(cr.pass);
    // with a nontrivial F as well
    Functional<double> F = [](const Counts& k) { return k[2] >= 1 ? 1.0 : 0.0; };
    auto cf = check_prop_l221<double>(sp, F, Arand, 3, "l221_rand_F_n3");
    CHECK(cf.pass);
    CHECK_THROWS_AS(check_prop_l221<double>(sp, one, Adet, 5), std::invalid_argument);
}

TEST_CASE("l221 exact mode: windowed random set gives exactly zero gap") {
    auto spr = exact_space(6);
    Process<Rat> A = [](const Counts& k, int i) {
        if (!in_unit_window(k, 3)) return Rat(0);
        return (i == 0 && k[1] >= 1) ? Rat(1) : Rat(0);
    };
    Functional<Rat> F = [](const Counts& k) { return k[2] >= 1 ? Rat(1) : Rat(0); };
    for (int n = 1; n <= 3; ++n) {
        auto c = check_prop_l221<Rat>(spr, F, A, n, "l221_exact");
        CAPTURE(n);
        CHECK(c.exact_zero_gap);
    }
}

TEST_CASE("p12: deterministic and count-dependent random sets") {
    auto sp = acceptance_space();
    Process<double> Adet = [](const Counts&, int i) { return i == 0 ? 1.0 : 0.0; };
    auto c1 = check_prop_p12<double>(sp, {Adet}, {1}, "p12_det_k1");
    CHECK(c1.pass);
    CHECK(std::abs(c1.rhs) == 0.0);  // Delta_s 1_A(s) = 0 identically
    auto c2 = check_prop_p12<double>(sp, {Adet}, {2}, "p12_det_k2");
    CHECK(c2.pass);
    CHECK(std::abs(c2.rhs) == 0.0);

    // cross-dependent single random set: nonzero on both sides
    Process<double> Across = [](const Counts& k, int i) {
        if (i == 0) return k[1] >= 1 ? 1.0 : 0.0;
        if (i == 1) return k[0] >= 1 ? 1.0 : 0.0;
        return 0.0;
    };
    auto c3 = check_prop_p12<double>(sp, {Across}, {2}, "p12_cross_k2");
    CHECK(c3.pass);
    CHECK(std::abs(c3.rhs) > 1e-3);

    // two disjoint random sets, mixed orders, sum k = 5
    Process<double> A1 = [](const Counts& k, int i) {
        return (i == 0 && k[2] >= 1) ? 1.0 : 0.0;
    };
    Process<double> A2 = [](const Counts& k, int i) {
        if (i == 1) return 1.0;
        if (i == 0) return k[2] == 0 ? 1.0 : 0.0;  // disjoint from A1 on cell 0
        return 0.0;
    };
    auto c4 = check_prop_p12<double>(sp, {A1, A2}, {2, 3}, "p12_pair_k5");
    CHECK(c4.pass);

    // disjointness violation detected
    Process<double> Abad = [](const Counts&, int i) { return i == 0 ? 1.0 : 0.0; };
    CHECK_THROWS_AS(check_prop_p12<double>(sp, {Adet, Abad}, {1, 1}), std::invalid_argument);
}

TEST_CASE("p12 exact mode on a reduced lattice") {
    auto spr = exact_space(4);
    Process<Rat> Across = [](const Counts& k, int i) {
        if (!in_unit_window(k, 3)) return Rat(0);
        if (i == 0) return k[1] >= 1 ? Rat(1) : Rat(0);
        if (i == 1) return k[0] >= 1 ? Rat(1) : Rat(0);
        return Rat(0);
    };
    auto c = check_prop_p12<Rat>(spr, {Across}, {2}, "p12_exact");
    CHECK(c.exact_zero_gap);
    CHECK(std::abs(c.lhs) > 1e-6);  // genuinely nonzero identity
}

TEST_CASE("t11: identity and adapted maps pass, cyclic map is detected") {
    auto sp = acceptance_space();
    std::vector<Rat> g{Rat(3, 32), Rat(-1, 16), Rat(1, 8), Rat(5, 64), Rat(-3, 64), Rat(1, 32)};

    auto r1 = check_lemma_l12_and_t11<double>(sp, tau_identity(3), g, 4);
    CHECK(r1.locality_ok);
    CHECK(r1.own_cell_free);
    CHECK(r1.reads_acyclic);
    CHECK_FALSE(r1.cycle.found);
    CHECK(r1.l12_products_vanish);
    CHECK(r1.series.pass);
    CHECK_THAT(r1.series.rhs, Catch::Matchers::WithinAbs(1.0, 1e-12));  // all terms vanish
    for (double t : r1.term_values) CHECK(t == 0.0);

    auto r2 = check_lemma_l12_and_t11<double>(sp, tau_adapted(3), g, 3);
    CHECK(r2.reads_acyclic);
    CHECK_FALSE(r2.cycle.found);
    CHECK(r2.l12_products_vanish);
    CHECK(r2.series.pass);

    auto r3 = check_lemma_l12_and_t11<double>(sp, tau_cyclic_counterexample(3), g, 2);
    CHECK_FALSE(r3.reads_acyclic);
    CHECK(r3.cycle.found);  // the deliberate counterexample is caught
    CHECK(r3.cycle.cells.size() >= 2);

    // mis-declared locality raises a configuration error
    TauRule lying = tau_cyclic_counterexample(3);
    lying.reads.assign(3, 0u);
    CHECK_THROWS_AS(check_lemma_l12_and_t11<double>(sp, lying, g, 2), std::invalid_argument);
}

TEST_CASE("t11 series terms are exactly zero in rational mode for adapted tau") {
    auto spr = exact_space(4);
    std::vector<Rat> g{Rat(3, 32), Rat(-1, 16), Rat(1, 8), Rat(5, 64), Rat(-3, 64), Rat(1, 32)};
    auto r = check_lemma_l12_and_t11<Rat>(spr, tau_adapted(3), g, 3);
    CHECK(r.l12_products_vanish);
    for (double t : r.term_values) CHECK(t == 0.0);
}
