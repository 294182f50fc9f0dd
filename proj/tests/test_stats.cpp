#include <catch2/catch_amalgamated.hpp>

#include "pqk/stats.hpp"

using namespace pqk;

namespace {

EstimateConfig global_haar_cfg(int n, std::size_t pairs) {
    EstimateConfig cfg;
    cfg.family = CircuitFamily::GlobalHaar;
    cfg.spec = AlaSpec(n, n, 1, BlockKind::HaarBlock);
    cfg.kappa = SubsystemMask(n, {0});
    cfg.pairs = pairs;
    cfg.seed = 404;
    return cfg;
}

}  // namespace

TEST_CASE("config validation couples mode and family") {
    EstimateConfig cfg = global_haar_cfg(2, 1000);
    REQUIRE_NOTHROW(cfg.validate());
    cfg.mode = SamplingMode::DataEnsemble;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    EstimateConfig bad;
    bad.family = CircuitFamily::AlaReupload;
    bad.spec = AlaSpec(4, 2, 2, BlockKind::ReuploadBlock);
    bad.kappa = SubsystemMask(4, {1});
    bad.mode = SamplingMode::HaarEnsemble;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("haar-ensemble estimate hits the known mean") {
    EstimateConfig cfg = global_haar_cfg(2, 4000);
    auto rep = estimate_kernel_stats(cfg);
    REQUIRE(rep.samples == 4000);
    REQUIRE(std::abs(rep.mean - 0.5) < 5.0 * rep.mean_se);
    REQUIRE(rep.theory.has_value());
    REQUIRE(rep.theory->formula_id == "rqc_exact");
    REQUIRE(std::abs(rep.variance - rep.theory->variance) < 5.0 * rep.var_se);
}

TEST_CASE("standard error shrinks like 1/sqrt(N)") {
    auto r1 = estimate_kernel_stats(global_haar_cfg(2, 2000));
    auto r2 = estimate_kernel_stats(global_haar_cfg(2, 8000));
    double ratio = r2.mean_se / r1.mean_se;
    REQUIRE(ratio > 0.3);
    REQUIRE(ratio < 0.8);
}

TEST_CASE("estimates are bitwise deterministic and thread-invariant") {
    EstimateConfig cfg = global_haar_cfg(3, 1200);
    cfg.threads = 1;
    auto a = estimate_kernel_stats(cfg);
    auto b = estimate_kernel_stats(cfg);
    cfg.threads = 4;
    auto c = estimate_kernel_stats(cfg);
    REQUIRE(a.mean == b.mean);
    REQUIRE(a.variance == b.variance);
    REQUIRE(a.mean == c.mean);
    REQUIRE(a.variance == c.variance);
    REQUIRE(a.var_se == c.var_se);
}

TEST_CASE("theory attachment for brickwork Haar circuits") {
    EstimateConfig cfg;
    cfg.family = CircuitFamily::AlaHaar;
    cfg.spec = AlaSpec(4, 2, 1, BlockKind::HaarBlock);
    cfg.kappa = SubsystemMask(4, {0});
    auto t = match_theory(cfg);
    REQUIRE(t.has_value());
    REQUIRE(t->formula_id == "ala_exact_L1");
    REQUIRE(t->variance == Catch::Approx(0.03).margin(1e-15));
    REQUIRE(t->mean == Catch::Approx(0.5).margin(1e-15));

    // idle-edge kappa has no valid cone: silently no theory
    EstimateConfig bad = cfg;
    bad.spec = AlaSpec(4, 2, 2, BlockKind::HaarBlock);
    REQUIRE(!match_theory(bad).has_value());
}

TEST_CASE("data-ensemble protocol produces sane pooled statistics") {
    EstimateConfig cfg;
    cfg.family = CircuitFamily::AlaReupload;
    cfg.spec = AlaSpec(4, 2, 2, BlockKind::ReuploadBlock);
    cfg.kappa = SubsystemMask(4, {1});
    cfg.mode = SamplingMode::DataEnsemble;
    cfg.datasets = 3;
    cfg.parameter_sets = 3;
    cfg.points = 6;
    cfg.seed = 7;
    auto rep = estimate_kernel_stats(cfg);
    REQUIRE(rep.samples == 9 * 15);  // 9 cells, C(6,2) pairs each
    REQUIRE(rep.mean > 0.1);
    REQUIRE(rep.mean < 1.0);
    REQUIRE(rep.variance > 0.0);
    REQUIRE(rep.mean_se > 0.0);
    REQUIRE(!rep.theory.has_value());

    // pooled variance differs from the mean of within-cell variances
    EstimateConfig unpooled = cfg;
    unpooled.pool_cells = false;
    auto rep2 = estimate_kernel_stats(unpooled);
    REQUIRE(rep2.mean == rep.mean);
    REQUIRE(rep2.variance != rep.variance);
}

TEST_CASE("covariance of a mask with itself is its variance") {
    EstimateConfig cfg = global_haar_cfg(3, 1000);
    auto rep = estimate_covariance(cfg, SubsystemMask(3, {0}), SubsystemMask(3, {0}));
    REQUIRE(rep.covariance.has_value());
    REQUIRE(*rep.covariance == Catch::Approx(rep.variance).margin(1e-15));
    REQUIRE(rep.cov_se.has_value());
}

TEST_CASE("gram concentration summary is reproducible") {
    AlaSpec spec(4, 2, 2, BlockKind::ReuploadBlock);
    auto a = gram_concentration(spec, InitKind::AllZero, 0, 10, 5);
    auto b = gram_concentration(spec, InitKind::AllZero, 0, 10, 5);
    REQUIRE(a.offdiag_mean == b.offdiag_mean);
    REQUIRE(a.offdiag_std == b.offdiag_std);
    REQUIRE(a.offdiag_std > 0.0);
    REQUIRE(a.offdiag_std_se > 0.0);
    REQUIRE(a.points == 10);
}

TEST_CASE("sweep captures invalid grid points instead of aborting") {
    EstimateConfig base;
    base.family = CircuitFamily::AlaHaar;
    base.spec = AlaSpec(4, 2, 2, BlockKind::HaarBlock);
    base.kappa = SubsystemMask(4, {1});
    base.pairs = 200;
    base.seed = 3;
    SweepGrid grid;
    grid.qubit_counts = {4, 5};  // n = 5 is invalid for Haar blocks of width 2
    grid.inits = {InitKind::AllZero};
    auto rows = sweep(SweepKind::Qubits, grid, base);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].error.empty());
    REQUIRE(rows[0].report.has_value());
    REQUIRE(!rows[1].error.empty());
    REQUIRE(!rows[1].report.has_value());
}

TEST_CASE("depth sweep expands init replicates for Haar initial states") {
    EstimateConfig base;
    base.family = CircuitFamily::AlaReupload;
    base.spec = AlaSpec(4, 2, 2, BlockKind::ReuploadBlock);
    base.kappa = SubsystemMask(4, {1});
    base.mode = SamplingMode::DataEnsemble;
    base.datasets = 2;
    base.parameter_sets = 2;
    base.points = 4;
    base.seed = 9;
    SweepGrid grid;
    grid.depths = {1, 2};
    grid.inits = {InitKind::AllZero, InitKind::HaarRandom};
    grid.haar_init_replicates = 3;
    auto rows = sweep(SweepKind::Depth, grid, base);
    REQUIRE(rows.size() == 2 * (1 + 3));
    for (const auto& r : rows) REQUIRE(r.error.empty());
}
