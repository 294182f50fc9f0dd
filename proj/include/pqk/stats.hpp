// Monte-Carlo estimation of kernel mean/variance/covariance and the
// experiment sweeps (depth, position, qubit-count, Gram concentration).

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqk/ansatz.hpp"
#include "pqk/haar.hpp"
#include "pqk/kernels.hpp"
#include "pqk/parallel.hpp"
#include "pqk/qstate.hpp"
#include "pqk/theory.hpp"

namespace pqk {

enum class CircuitFamily { GlobalHaar, AlaHaar, AlaReupload };
enum class SamplingMode { HaarEnsemble, DataEnsemble };

struct EstimateConfig {
    CircuitFamily family = CircuitFamily::AlaHaar;
    AlaSpec spec;
    InitKind init = InitKind::AllZero;
    std::uint64_t init_seed = 0;  // replicate id for a HaarRandom init
    SubsystemMask kappa;
    SamplingMode mode = SamplingMode::HaarEnsemble;
    std::size_t pairs = 20000;  // HaarEnsemble sample count
    int datasets = 5;           // DataEnsemble cells: datasets x parameter_sets
    int points = 50;
    int parameter_sets = 5;
    bool pool_cells = true;  // pooled-pairs variance (default) vs per-cell mean
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (mode == SamplingMode::HaarEnsemble) {
            if (family == CircuitFamily::AlaReupload)
                throw std::invalid_argument("EstimateConfig: HaarEnsemble needs a Haar circuit");
            if (pairs < 2) throw std::invalid_argument("EstimateConfig: pairs must be >= 2");
        } else {
            if (family != CircuitFamily::AlaReupload)
                throw std::invalid_argument(
                    "EstimateConfig: DataEnsemble needs a re-upload circuit");
            if (datasets < 1 || parameter_sets < 1 || points < 2)
                throw std::invalid_argument("EstimateConfig: invalid ensemble counts");
        }
    }
};

struct EstimateReport {
    double mean = 0.0;
    double mean_se = 0.0;
    double variance = 0.0;
    double var_se = 0.0;
    std::optional<double> covariance;
    std::optional<double> cov_se;
    std::size_t samples = 0;
    EstimateConfig config;
    std::optional<TheoryPrediction> theory;
};

namespace detail {

struct Moments {
    double mean, mean_se, var, var_se;
};

// Mean and unbiased variance with batch-based standard errors. Batches are
// defined by contiguous index ranges so the result is seed-deterministic.
inline Moments pooled_moments(const std::vector<double>& xs, int nbatch) {
    const std::size_t n = xs.size();
    if (n < 4) throw std::invalid_argument("pooled_moments: too few samples");
    if (n < std::size_t(2 * nbatch)) nbatch = std::max(2, int(n / 2));
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(n);
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= double(n - 1);

    const std::size_t per = n / std::size_t(nbatch);
    std::vector<double> bmeans, bvars;
    for (int b = 0; b < nbatch; ++b) {
        double bm = 0.0;
        for (std::size_t i = std::size_t(b) * per; i < std::size_t(b + 1) * per; ++i)
            bm += xs[i];
        bm /= double(per);
        double bv = 0.0;
        for (std::size_t i = std::size_t(b) * per; i < std::size_t(b + 1) * per; ++i)
            bv += (xs[i] - bm) * (xs[i] - bm);
        bv /= double(per - 1);
        bmeans.push_back(bm);
        bvars.push_back(bv);
    }
    auto spread_se = [nbatch](const std::vector<double>& v) {
        double mu = 0.0;
        for (double x : v) mu += x;
        mu /= double(nbatch);
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu);
        s /= double(nbatch - 1);
        return std::sqrt(s / double(nbatch));
    };
    return {mean, spread_se(bmeans), var, spread_se(bvars)};
}

inline CircuitInstance draw_haar_instance(const EstimateConfig& cfg, std::uint64_t stream) {
    return build_instance(cfg.spec, {}, {}, derive_seed(cfg.seed, {stream}));
}

inline Statevector initial_state(const EstimateConfig& cfg) {
    return prepare_initial(cfg.init, cfg.spec.n, cfg.init_seed);
}

inline std::vector<double> uniform_angles(std::mt19937_64& rng, std::size_t count) {
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    std::vector<double> v(count);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace detail

// Attaches the matching closed form when one exists for the configuration;
// silently omits it otherwise (e.g. middle-case L > 3 with a non-product
// profile).
inline std::optional<TheoryPrediction> match_theory(const EstimateConfig& cfg) {
    const int nk = cfg.kappa.size();
    try {
        if (cfg.family == CircuitFamily::GlobalHaar)
            return rqc_stats(cfg.spec.n, nk);
        if (cfg.family != CircuitFamily::AlaHaar) return std::nullopt;

        auto cone = light_cone(cfg.spec, cfg.kappa);
        int first_blocks = 0;
        for (const auto& site : cone)
            if (site.d == 1) ++first_blocks;
        ConeCase cc = ConeCase::Middle;
        if (cfg.spec.L == 3) cc = (first_blocks == 2) ? ConeCase::Edge : ConeCase::Middle;

        PurityProfile prof = purity_profile(detail::initial_state(cfg), cfg.spec, cfg.kappa);
        TheoryPrediction p =
            ala_variance_bound(cfg.spec.m, nk, cfg.spec.L, cc, prof);
        p.n = cfg.spec.n;
        return p;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// HaarEnsemble: independent (U, U') block realizations per sample.
// DataEnsemble: the 25-setting protocol; all unordered pairs x != x' from
// each (dataset, parameter-set) cell, pooled by default.
inline EstimateReport estimate_kernel_stats(const EstimateConfig& cfg) {
    cfg.validate();
    EstimateReport rep;
    rep.config = cfg;

    if (cfg.mode == SamplingMode::HaarEnsemble) {
        const Statevector init = detail::initial_state(cfg);
        std::vector<double> ks(cfg.pairs);
        parallel_for(cfg.pairs, cfg.threads, [&](std::size_t i) {
            auto u = detail::draw_haar_instance(cfg, 2 * i);
            auto v = detail::draw_haar_instance(cfg, 2 * i + 1);
            ks[i] = pqk_kappa(apply_instance(u, init), apply_instance(v, init), cfg.kappa);
        });
        auto mm = detail::pooled_moments(ks, kBatchCount);
        rep.mean = mm.mean;
        rep.mean_se = mm.mean_se;
        rep.variance = mm.var;
        rep.var_se = mm.var_se;
        rep.samples = cfg.pairs;
        rep.theory = match_theory(cfg);
        return rep;
    }

    // DataEnsemble
    const Statevector init = detail::initial_state(cfg);
    const int cells = cfg.datasets * cfg.parameter_sets;
    const std::size_t ppc = std::size_t(cfg.points) * (cfg.points - 1) / 2;
    std::vector<std::vector<double>> cell_vals(static_cast<std::size_t>(cells));
    parallel_for(std::size_t(cells), cfg.threads, [&](std::size_t c) {
        const int ds = int(c) / cfg.parameter_sets;
        const int ps = int(c) % cfg.parameter_sets;
        auto drng = make_stream(cfg.seed, {0x64617461u, std::uint64_t(ds)});
        auto prng = make_stream(cfg.seed, {0x706172u, std::uint64_t(ps)});
        std::vector<std::vector<double>> data(std::size_t(cfg.points));
        for (auto& x : data) x = detail::uniform_angles(drng, std::size_t(cfg.spec.n));
        auto theta = detail::uniform_angles(prng, param_count(cfg.spec));

        std::vector<Statevector> states;
        states.reserve(data.size());
        for (const auto& x : data)
            states.push_back(apply_instance(build_instance(cfg.spec, x, theta), init));

        auto& vals = cell_vals[c];
        vals.reserve(ppc);
        for (std::size_t i = 0; i < states.size(); ++i)
            for (std::size_t j = i + 1; j < states.size(); ++j)
                vals.push_back(pqk_kappa(states[i], states[j], cfg.kappa));
    });

    std::vector<double> cell_means(static_cast<std::size_t>(cells));
    std::vector<double> cell_vars(static_cast<std::size_t>(cells));
    std::vector<double> pooled;
    pooled.reserve(std::size_t(cells) * ppc);
    for (int c = 0; c < cells; ++c) {
        const auto& vals = cell_vals[std::size_t(c)];
        double mu = 0.0;
        for (double v : vals) mu += v;
        mu /= double(vals.size());
        double s2 = 0.0;
        for (double v : vals) s2 += (v - mu) * (v - mu);
        s2 /= double(vals.size() - 1);
        cell_means[std::size_t(c)] = mu;
        cell_vars[std::size_t(c)] = s2;
        pooled.insert(pooled.end(), vals.begin(), vals.end());
    }

    double gmean = 0.0;
    for (double v : pooled) gmean += v;
    gmean /= double(pooled.size());
    double gvar = 0.0;
    if (cfg.pool_cells) {
        for (double v : pooled) gvar += (v - gmean) * (v - gmean);
        gvar /= double(pooled.size() - 1);
    } else {
        for (double v : cell_vars) gvar += v;
        gvar /= double(cells);
    }
    // Cells are the batches: data points within a cell are shared across
    // pairs, so pair values are correlated inside a cell.
    auto spread_se = [cells](const std::vector<double>& v) {
        double mu = 0.0;
        for (double x : v) mu += x;
        mu /= double(cells);
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu);
        s /= double(cells - 1);
        return std::sqrt(s / double(cells));
    };
    rep.mean = gmean;
    rep.mean_se = spread_se(cell_means);
    rep.variance = gvar;
    rep.var_se = spread_se(cell_vars);
    rep.samples = pooled.size();
    return rep;
}

// Sample covariance of (k^(kappa), k^(kappa')) over a shared Haar ensemble.
inline EstimateReport estimate_covariance(const EstimateConfig& cfg,
                                          const SubsystemMask& kappa_a,
                                          const SubsystemMask& kappa_b) {
    EstimateConfig c = cfg;
    c.kappa = kappa_a;
    c.validate();
    if (c.mode != SamplingMode::HaarEnsemble)
        throw std::invalid_argument("estimate_covariance: HaarEnsemble only");

    const Statevector init = detail::initial_state(c);
    std::vector<double> ka(c.pairs), kb(c.pairs);
    parallel_for(c.pairs, c.threads, [&](std::size_t i) {
        auto u = detail::draw_haar_instance(c, 2 * i);
        auto v = detail::draw_haar_instance(c, 2 * i + 1);
        Statevector su = apply_instance(u, init), sv = apply_instance(v, init);
        ka[i] = pqk_kappa(su, sv, kappa_a);
        kb[i] = pqk_kappa(su, sv, kappa_b);
    });

    auto mm = detail::pooled_moments(ka, kBatchCount);
    EstimateReport rep;
    rep.config = c;
    rep.samples = c.pairs;
    rep.mean = mm.mean;
    rep.mean_se = mm.mean_se;
    rep.variance = mm.var;
    rep.var_se = mm.var_se;

    double ma = mm.mean, mb = 0.0;
    for (double x : kb) mb += x;
    mb /= double(c.pairs);
    double cov = 0.0;
    for (std::size_t i = 0; i < c.pairs; ++i) cov += (ka[i] - ma) * (kb[i] - mb);
    cov /= double(c.pairs - 1);

    int nbatch = kBatchCount;
    const std::size_t per = c.pairs / std::size_t(nbatch);
    std::vector<double> bcovs;
    for (int b = 0; b < nbatch; ++b) {
        double bma = 0.0, bmb = 0.0;
        for (std::size_t i = std::size_t(b) * per; i < std::size_t(b + 1) * per; ++i) {
            bma += ka[i];
            bmb += kb[i];
        }
        bma /= double(per);
        bmb /= double(per);
        double bc = 0.0;
        for (std::size_t i = std::size_t(b) * per; i < std::size_t(b + 1) * per; ++i)
            bc += (ka[i] - bma) * (kb[i] - bmb);
        bc /= double(per - 1);
        bcovs.push_back(bc);
    }
    double mu = 0.0;
    for (double x : bcovs) mu += x;
    mu /= double(nbatch);
    double s = 0.0;
    for (double x : bcovs) s += (x - mu) * (x - mu);
    s /= double(nbatch - 1);

    rep.covariance = cov;
    rep.cov_se = std::sqrt(s / double(nbatch));
    rep.theory = match_theory(c);
    return rep;
}

enum class SweepKind { Depth, Position, Qubits, GramStudy };

struct GramSummary {
    int n = 0;
    InitKind init = InitKind::AllZero;
    std::uint64_t init_seed = 0;
    std::size_t points = 0;
    double offdiag_mean = 0.0;
    double offdiag_std = 0.0;
    double offdiag_std_se = 0.0;  // delete-one-point jackknife
};

struct SweepRow {
    std::optional<EstimateReport> report;
    std::optional<GramSummary> gram;
    std::string label;
    std::string error;  // nonempty when the grid point was invalid
};

struct SweepGrid {
    std::vector<int> depths;
    std::vector<int> positions;      // 1-based qubit positions for kappa
    std::vector<int> qubit_counts;
    std::vector<InitKind> inits;
    int haar_init_replicates = 5;
    std::size_t gram_points = 100;
};

// Off-diagonal concentration summary of a PerKappa Gram matrix.
inline GramSummary gram_concentration(const AlaSpec& spec, InitKind init,
                                      std::uint64_t init_seed, std::size_t npoints,
                                      std::uint64_t seed) {
    auto drng = make_stream(seed, {0x6772616du});
    std::vector<std::vector<double>> data(npoints);
    for (auto& x : data) x = detail::uniform_angles(drng, std::size_t(spec.n));
    auto theta = detail::uniform_angles(drng, param_count(spec));

    KernelTask task(KernelKind::PerKappa, spec, init);
    task.init_seed = init_seed;
    const int mid = (spec.n + 1) / 2 - 1;  // ceil(n/2)-th qubit, 0-based
    task.kappas = {SubsystemMask(spec.n, {mid})};
    GramMatrix g = gram(data, theta, task);

    const std::size_t N = g.N;
    std::vector<double> off;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
            off.push_back(g.entries(Eigen::Index(i), Eigen::Index(j)));
    double mu = 0.0;
    for (double v : off) mu += v;
    mu /= double(off.size());
    double s2 = 0.0;
    for (double v : off) s2 += (v - mu) * (v - mu);
    s2 /= double(off.size() - 1);

    // Jackknife over data points (entries sharing a point are correlated).
    std::vector<double> jk;
    for (std::size_t drop = 0; drop < N; ++drop) {
        double m1 = 0.0, cnt = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = i + 1; j < N; ++j) {
                if (i == drop || j == drop) continue;
                m1 += g.entries(Eigen::Index(i), Eigen::Index(j));
                cnt += 1.0;
            }
        m1 /= cnt;
        double v1 = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = i + 1; j < N; ++j) {
                if (i == drop || j == drop) continue;
                double d = g.entries(Eigen::Index(i), Eigen::Index(j)) - m1;
                v1 += d * d;
            }
        jk.push_back(std::sqrt(v1 / (cnt - 1.0)));
    }
    double jmu = 0.0;
    for (double v : jk) jmu += v;
    jmu /= double(N);
    double jv = 0.0;
    for (double v : jk) jv += (v - jmu) * (v - jmu);
    jv *= double(N - 1) / double(N);

    GramSummary gs;
    gs.n = spec.n;
    gs.init = init;
    gs.init_seed = init_seed;
    gs.points = npoints;
    gs.offdiag_mean = mu;
    gs.offdiag_std = std::sqrt(s2);
    gs.offdiag_std_se = std::sqrt(jv);
    return gs;
}

inline const char* init_kind_name(InitKind k) {
    switch (k) {
        case InitKind::AllZero: return "all_zero";
        case InitKind::GHZ: return "ghz";
        case InitKind::HaarRandom: return "haar_random";
        case InitKind::ExplicitVector: return "explicit";
    }
    return "?";
}

// One report per grid point; invalid points are reported per-row and the
// sweep continues.
inline std::vector<SweepRow> sweep(SweepKind kind, const SweepGrid& grid,
                                   const EstimateConfig& base) {
    std::vector<SweepRow> rows;
    auto run_cfg = [&](EstimateConfig cfg, const std::string& label) {
        SweepRow row;
        row.label = label;
        try {
            row.report = estimate_kernel_stats(cfg);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    };
    auto inits_of = [&](InitKind init) {
        std::vector<std::uint64_t> reps;
        if (init == InitKind::HaarRandom)
            for (int r = 0; r < grid.haar_init_replicates; ++r)
                reps.push_back(std::uint64_t(r) + 1);
        else
            reps.push_back(0);
        return reps;
    };

    switch (kind) {
        case SweepKind::Depth:
            for (int L : grid.depths)
                for (InitKind init : grid.inits)
                    for (std::uint64_t r : inits_of(init)) {
                        EstimateConfig cfg = base;
                        cfg.init = init;
                        cfg.init_seed = r;
                        try {
                            cfg.spec = AlaSpec(base.spec.n, base.spec.m, L, base.spec.kind);
                        } catch (const std::exception& e) {
                            SweepRow row;
                            row.label = "L=" + std::to_string(L);
                            row.error = e.what();
                            rows.push_back(std::move(row));
                            continue;
                        }
                        run_cfg(cfg, "L=" + std::to_string(L) + " init=" +
                                         init_kind_name(init) + " rep=" + std::to_string(r));
                    }
            break;
        case SweepKind::Position:
            for (int pos : grid.positions)
                for (InitKind init : grid.inits)
                    for (std::uint64_t r : inits_of(init)) {
                        EstimateConfig cfg = base;
                        cfg.init = init;
                        cfg.init_seed = r;
                        std::string label = "kappa=" + std::to_string(pos) + " init=" +
                                            init_kind_name(init);
                        if (pos < 1 || pos > base.spec.n) {
                            SweepRow row;
                            row.label = label;
                            row.error = "position out of range";
                            rows.push_back(std::move(row));
                            continue;
                        }
                        cfg.kappa = SubsystemMask(base.spec.n, {pos - 1});
                        run_cfg(cfg, label);
                    }
            break;
        case SweepKind::Qubits:
            for (int n : grid.qubit_counts)
                for (InitKind init : grid.inits)
                    for (std::uint64_t r : inits_of(init)) {
                        EstimateConfig cfg = base;
                        cfg.init = init;
                        cfg.init_seed = r;
                        std::string label = "n=" + std::to_string(n) + " init=" +
                                            init_kind_name(init);
                        try {
                            cfg.spec = AlaSpec(n, base.spec.m, base.spec.L, base.spec.kind);
                            cfg.kappa = SubsystemMask(n, {(n + 1) / 2 - 1});
                        } catch (const std::exception& e) {
                            SweepRow row;
                            row.label = label;
                            row.error = e.what();
                            rows.push_back(std::move(row));
                            continue;
                        }
                        run_cfg(cfg, label);
                    }
            break;
        case SweepKind::GramStudy:
            for (int n : grid.qubit_counts)
                for (InitKind init : grid.inits)
                    for (std::uint64_t r : inits_of(init)) {
                        SweepRow row;
                        row.label = "n=" + std::to_string(n) + " init=" + init_kind_name(init);
                        try {
                            AlaSpec spec(n, base.spec.m, base.spec.L, base.spec.kind);
                            row.gram = gram_concentration(spec, init, r, grid.gram_points,
                                                          base.seed);
                        } catch (const std::exception& e) {
                            row.error = e.what();
                        }
                        rows.push_back(std::move(row));
                    }
            break;
    }
    return rows;
}

inline const char* family_name(CircuitFamily f) {
    switch (f) {
        case CircuitFamily::GlobalHaar: return "global_haar";
        case CircuitFamily::AlaHaar: return "ala_haar";
        case CircuitFamily::AlaReupload: return "ala_reupload";
    }
    return "?";
}

inline std::string kappa_string(const SubsystemMask& k) {
    std::string s;
    for (std::size_t i = 0; i < k.kept.size(); ++i) {
        if (i) s += "|";
        s += std::to_string(k.kept[i]);
    }
    return s;
}

inline void write_report_csv_header(std::ofstream& out) {
    out << "seed,circuit,n,m,L,kappa,init,samples,mean,mean_se,var,var_se,"
           "theory_mean,theory_var,formula_id\n";
}

inline void write_report_csv_row(std::ofstream& out, const EstimateReport& r) {
    const auto& c = r.config;
    out.precision(12);
    out << c.seed << "," << family_name(c.family) << "," << c.spec.n << "," << c.spec.m
        << "," << c.spec.L << "," << kappa_string(c.kappa) << ","
        << init_kind_name(c.init) << "," << r.samples << "," << r.mean << "," << r.mean_se
        << "," << r.variance << "," << r.var_se << ",";
    if (r.theory)
        out << r.theory->mean << "," << r.theory->variance << "," << r.theory->formula_id;
    else
        out << ",,";
    out << "\n";
}

}  // namespace pqk
