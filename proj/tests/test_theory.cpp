#include <catch2/catch_amalgamated.hpp>

#include "pqk/theory.hpp"

using namespace pqk;

TEST_CASE("globally random circuit closed form") {
    auto p = rqc_stats(3, 1);
    REQUIRE(p.mean == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(p.variance == Catch::Approx(1.0 / 108.0).margin(1e-15));
    auto q = rqc_stats(4, 2);
    REQUIRE(q.mean == Catch::Approx(0.25).margin(1e-15));
    REQUIRE(q.variance == Catch::Approx(15.0 / (16.0 * 289.0)).margin(1e-15));
    REQUIRE_THROWS_AS(rqc_stats(3, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(rqc_stats(3, 4), std::invalid_argument);
}

TEST_CASE("one-layer variance with a product input is 0.03 at m = 2") {
    double v = ala_variance_exact(2, 1, 1, ConeCase::Middle, product_profile(2, 1));
    REQUIRE(v == Catch::Approx(0.03).margin(1e-15));
}

TEST_CASE("two-layer variance with a product input, frozen oracle") {
    // prefactor 4/75, bracket (-2 - 1/4 + 4*3)^2 / 5^4
    const double oracle = (4.0 / 75.0) * 9.75 * 9.75 / 625.0;
    REQUIRE(oracle == Catch::Approx(8.112e-3).margin(1e-8));
    for (ConeCase cc : {ConeCase::Middle, ConeCase::Edge}) {
        double v = ala_variance_exact(2, 1, 2, cc, product_profile(2, 2));
        REQUIRE(v == Catch::Approx(oracle).margin(1e-15));
    }
}

TEST_CASE("three-layer variances with a product input, frozen oracles") {
    // middle: pref0 * s^2/(s+1)^8 * (-5 - 4/s - 1/s^2 + s * 10)^2, s = 4
    const double bm = -5.0 - 1.0 - 1.0 / 16.0 + 4.0 * 10.0;
    const double middle = (4.0 / 75.0) * 16.0 / 390625.0 * bm * bm;
    double vm = ala_variance_exact(2, 1, 3, ConeCase::Middle, product_profile(2, 3));
    REQUIRE(vm == Catch::Approx(middle).margin(1e-15));
    REQUIRE(vm == Catch::Approx(2.516e-3).margin(2e-6));

    // edge: pref0 * s/(s+1)^4 * (-2/sqrt(s) - s^{-3/2} + sqrt(s) * 3)^2
    const double be = -1.0 - 0.125 + 2.0 * 3.0;
    const double edge = (4.0 / 75.0) * 4.0 / 625.0 * be * be;
    double ve = ala_variance_exact(2, 1, 3, ConeCase::Edge, product_profile(2, 2));
    REQUIRE(ve == Catch::Approx(edge).margin(1e-15));
}

TEST_CASE("variance decreases with depth for product inputs") {
    double v1 = ala_variance_exact(2, 1, 1, ConeCase::Middle, product_profile(2, 1));
    double v2 = ala_variance_exact(2, 1, 2, ConeCase::Middle, product_profile(2, 2));
    double v3 = ala_variance_exact(2, 1, 3, ConeCase::Middle, product_profile(2, 3));
    REQUIRE(v1 > v2);
    REQUIRE(v2 > v3);
}

TEST_CASE("degeneracy bridge: one full-width block equals the global circuit") {
    for (int m = 1; m <= 6; ++m)
        for (int nk : {1, m}) {
            double ala =
                ala_variance_exact(m, nk, 1, ConeCase::Middle, product_profile(m, 1));
            double rqc = rqc_stats(m, nk).variance;
            INFO("m=" << m << " nk=" << nk);
            REQUIRE(std::abs(ala - rqc) <= 1e-12);
        }
}

TEST_CASE("completely mixed input kills the variance") {
    for (int L : {1, 2, 3}) {
        int blocks = (L == 1) ? 1 : (L == 2 ? 2 : 3);
        double v = ala_variance_exact(2, 1, L, ConeCase::Middle,
                                      completely_mixed_profile(2, blocks));
        REQUIRE(std::abs(v) < 1e-15);
    }
    auto p = ala_variance_bound(2, 1, 7, ConeCase::Middle, completely_mixed_profile(2, 7));
    REQUIRE(p.variance == 0.0);
    REQUIRE(p.formula_id == "ala_bound_mixed");
}

TEST_CASE("general-L bound: exponential decay with sane per-layer slope") {
    auto var_of = [](int L, ConeCase cc) {
        int blocks = cc == ConeCase::Middle ? L : 1 + (L - 1 + 1) / 2;
        return ala_variance_bound(2, 1, L, cc, product_profile(2, blocks)).variance;
    };
    // middle: monotone per layer
    {
        double prev = var_of(4, ConeCase::Middle);
        for (int L = 5; L <= 8; ++L) {
            double cur = var_of(L, ConeCase::Middle);
            double slope = std::log(cur / prev);
            INFO("middle L=" << L << " slope=" << slope);
            REQUIRE(cur < prev);
            REQUIRE(slope > -5.0);
            REQUIRE(slope < -0.5);
            prev = cur;
        }
    }
    // edge: the odd/even sqrt factor alternates, so compare equal parity
    for (int L = 4; L <= 6; ++L) {
        double slope = std::log(var_of(L + 2, ConeCase::Edge) / var_of(L, ConeCase::Edge));
        INFO("edge L=" << L << " -> " << L + 2 << " slope=" << slope);
        REQUIRE(slope > -8.0);
        REQUIRE(slope < -1.0);
    }
}

TEST_CASE("bound marks exact regimes with the right formula ids") {
    auto e = ala_variance_bound(2, 1, 2, ConeCase::Middle, product_profile(2, 2));
    REQUIRE(e.formula_id == "ala_exact_L2");
    REQUIRE(e.variance ==
            Catch::Approx(ala_variance_exact(2, 1, 2, ConeCase::Middle,
                                             product_profile(2, 2)))
                .margin(1e-15));
    auto b = ala_variance_bound(2, 1, 5, ConeCase::Edge, product_profile(2, 3));
    REQUIRE(b.formula_id == "ala_bound_edge");
    REQUIRE(b.lower_bound);
}

TEST_CASE("profile lookups fail loudly when an entry is absent") {
    PurityProfile p = product_profile(2, 1);
    REQUIRE_THROWS_AS(ala_variance_exact(2, 1, 2, ConeCase::Middle, p),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(ala_variance_exact(2, 1, 4, ConeCase::Middle, p),
                      std::invalid_argument);
}

TEST_CASE("purity profile from explicit initial states") {
    AlaSpec spec(4, 2, 1, BlockKind::HaarBlock);
    SubsystemMask k0(4, {0});
    auto pz = purity_profile(prepare_initial(InitKind::AllZero, 4), spec, k0);
    REQUIRE(pz.at(0, 1) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(pz.is_product());
    auto pg = purity_profile(prepare_initial(InitKind::GHZ, 4), spec, k0);
    REQUIRE(pg.at(0, 1) == Catch::Approx(0.5).margin(1e-12));

    // two-layer middle: runs over first-layer blocks {0,1}, {2,3}; the full
    // register run is pure by definition
    AlaSpec two(4, 2, 2, BlockKind::HaarBlock);
    SubsystemMask k1(4, {1});
    auto pghz = purity_profile(prepare_initial(InitKind::GHZ, 4), two, k1);
    REQUIRE(pghz.at(0, 1) == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(pghz.at(1, 1) == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(pghz.at(0, 2) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("GHZ variance through the closed form differs from product") {
    AlaSpec spec(4, 2, 1, BlockKind::HaarBlock);
    auto pg = purity_profile(prepare_initial(InitKind::GHZ, 4), spec,
                             SubsystemMask(4, {0}));
    double vg = ala_variance_exact(2, 1, 1, ConeCase::Middle, pg);
    // bracket (1/2 - 1/4)^2 versus (1 - 1/4)^2: a factor of 9
    REQUIRE(vg == Catch::Approx(0.03 / 9.0).margin(1e-15));
}
