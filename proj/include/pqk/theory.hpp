// Closed-form expectation/variance evaluators for projected quantum kernels
// over random circuits and brickwork ansatzes, plus initial-state purity
// profiles feeding them.
//
// Exact variance formulas are implemented for L in {1, 2, 3}. The general-L
// structural forms carry positive coefficients that are not numerically
// pinned down, so everything beyond L = 3 is exposed as a lower bound only
// (exact for the completely mixed profile, where the variance is zero).

#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "pqk/ansatz.hpp"
#include "pqk/qstate.hpp"

namespace pqk {

enum class ConeCase { Middle, Edge };

// Purities Tr[rho_{0,h}^2] for contiguous unions h of first-layer blocks
// under the light cone. Keys are (first block offset within the cone, run
// length in blocks).
struct PurityProfile {
    int m = 0;
    std::map<std::pair<int, int>, double> runs;

    double at(int first, int len) const {
        auto it = runs.find({first, len});
        if (it == runs.end())
            throw std::invalid_argument("PurityProfile: missing entry (" +
                                        std::to_string(first) + "," +
                                        std::to_string(len) + ")");
        return it->second;
    }

    bool is_product(double tol = 1e-12) const {
        for (const auto& [k, v] : runs)
            if (std::abs(v - 1.0) > tol) return false;
        return true;
    }

    bool is_completely_mixed(double tol = 1e-12) const {
        for (const auto& [k, v] : runs)
            if (std::abs(v - std::pow(2.0, -double(m) * k.second)) > tol) return false;
        return true;
    }
};

inline PurityProfile product_profile(int m, int cone_blocks) {
    PurityProfile p;
    p.m = m;
    for (int len = 1; len <= cone_blocks; ++len)
        for (int first = 0; first + len <= cone_blocks; ++first)
            p.runs[{first, len}] = 1.0;
    return p;
}

inline PurityProfile completely_mixed_profile(int m, int cone_blocks) {
    PurityProfile p;
    p.m = m;
    for (int len = 1; len <= cone_blocks; ++len)
        for (int first = 0; first + len <= cone_blocks; ++first)
            p.runs[{first, len}] = std::pow(2.0, -double(m) * len);
    return p;
}

struct TheoryPrediction {
    double mean = 0.0;
    double variance = 0.0;
    bool lower_bound = false;
    std::string formula_id;
    int n = 0, m = 0, L = 0, n_kappa = 0;
};

// Globally random circuit, exact.
inline TheoryPrediction rqc_stats(int n, int n_kappa) {
    if (n_kappa < 1 || n_kappa > n)
        throw std::invalid_argument("rqc_stats: need 1 <= n_kappa <= n");
    TheoryPrediction p;
    p.n = n;
    p.n_kappa = n_kappa;
    p.formula_id = "rqc_exact";
    p.mean = std::pow(2.0, -double(n_kappa));
    const double t2k = std::pow(2.0, 2.0 * n_kappa);
    const double dn = std::pow(2.0, double(n));
    p.variance = (t2k - 1.0) / (t2k * (dn + 1.0) * (dn + 1.0));
    return p;
}

// The mean is 2^{-n_kappa} for every circuit family and initial state.
inline double ala_mean(int n_kappa) {
    if (n_kappa < 1) throw std::invalid_argument("ala_mean: n_kappa must be >= 1");
    return std::pow(2.0, -double(n_kappa));
}

namespace detail {

// Shared prefactor 2^{2m}(2^{2nk}-1) / ((2^{2m}-1)^2 2^{2nk}).
inline double master_prefactor(int m, int n_kappa) {
    const double s2 = std::pow(2.0, 2.0 * m);
    const double t2k = std::pow(2.0, 2.0 * n_kappa);
    return s2 * (t2k - 1.0) / ((s2 - 1.0) * (s2 - 1.0) * t2k);
}

}  // namespace detail

// Exact variance for L in {1, 2, 3}. The L <= 2 formulas hold for both the
// middle and the edge placement; at L = 3 the two cases differ.
inline double ala_variance_exact(int m, int n_kappa, int L, ConeCase cone,
                                 const PurityProfile& profile) {
    if (L < 1 || L > 3)
        throw std::invalid_argument("ala_variance_exact: exact forms exist for L in {1,2,3}");
    const double s = std::pow(2.0, double(m));
    const double pref0 = detail::master_prefactor(m, n_kappa);

    if (L == 1) {
        const double p = profile.at(0, 1);
        const double b = p - 1.0 / s;
        return pref0 * b * b;
    }
    if (L == 2) {
        const double sum = profile.at(0, 1) + profile.at(1, 1) + profile.at(0, 2);
        const double b = -2.0 - 1.0 / s + s * sum;
        return pref0 / std::pow(s + 1.0, 4.0) * b * b;
    }
    if (cone == ConeCase::Middle) {
        // Cone blocks 0,1,2 with the kappa block above block 1.
        const double sum = 3.0 * profile.at(1, 1) + profile.at(0, 1) + profile.at(2, 1) +
                           2.0 * profile.at(0, 2) + 2.0 * profile.at(1, 2) +
                           profile.at(0, 3);
        const double b = -5.0 - 4.0 / s - 1.0 / (s * s) + s * sum;
        return pref0 * s * s / std::pow(s + 1.0, 8.0) * b * b;
    }
    // Edge: cone blocks 0,1 with the kappa block above block 0.
    const double sum = 2.0 * profile.at(0, 1) + profile.at(0, 2);
    const double b = -2.0 / std::sqrt(s) - 1.0 / (s * std::sqrt(s)) + std::sqrt(s) * sum;
    return pref0 * s / std::pow(s + 1.0, 4.0) * b * b;
}

// Lower bound for general L. Saturates the exact formula where one exists;
// for product profiles beyond L = 3 the bracketed sum is replaced by its
// dominant 2^m-per-term product-state value, and the result is flagged as a
// bound, never as exact.
inline TheoryPrediction ala_variance_bound(int m, int n_kappa, int L, ConeCase cone,
                                           const PurityProfile& profile) {
    TheoryPrediction p;
    p.m = m;
    p.L = L;
    p.n_kappa = n_kappa;
    p.mean = ala_mean(n_kappa);
    p.lower_bound = true;

    if (profile.is_completely_mixed()) {
        p.variance = 0.0;
        p.formula_id = "ala_bound_mixed";
        return p;
    }
    if (L <= 3) {
        p.variance = ala_variance_exact(m, n_kappa, L, cone, profile);
        p.formula_id = "ala_exact_L" + std::to_string(L);
        return p;
    }
    if (!profile.is_product())
        throw std::invalid_argument(
            "ala_variance_bound: only product or completely mixed profiles are "
            "evaluable for L > 3");

    const double s = std::pow(2.0, double(m));
    const double t2k = std::pow(2.0, 2.0 * n_kappa);
    const double nterms = double(profile.runs.size());
    if (cone == ConeCase::Middle) {
        const double pref = std::pow(2.0, 2.0 * m * (L - 1)) * (t2k - 1.0) /
                            (std::pow(std::pow(2.0, 2.0 * m) - 1.0, 2.0) *
                             std::pow(s + 1.0, 4.0 * (L - 1)) * t2k);
        const double b = s * nterms;
        p.variance = pref * b * b;
        p.formula_id = "ala_bound_middle";
    } else {
        const double pref = std::pow(2.0, double(m) * L) * (t2k - 1.0) /
                            (std::pow(std::pow(2.0, 2.0 * m) - 1.0, 2.0) *
                             std::pow(s + 1.0, 2.0 * (L - 1)) * t2k);
        const double b = (L % 2 == 1 ? std::sqrt(s) : s) * nterms;
        p.variance = pref * b * b;
        p.formula_id = "ala_bound_edge";
    }
    return p;
}

// Computes the profile for an explicit initial state from the light-cone
// geometry of (spec, kappa).
inline PurityProfile purity_profile(const Statevector& init, const AlaSpec& spec,
                                    const SubsystemMask& kappa) {
    if (init.n != spec.n)
        throw std::invalid_argument("purity_profile: state/spec size mismatch");
    auto cone = light_cone(spec, kappa);
    int lmin = spec.n, lmax = -1;
    for (const auto& site : cone)
        if (site.d == 1) {
            lmin = std::min(lmin, site.l);
            lmax = std::max(lmax, site.l);
        }
    const int blocks = lmax - lmin + 1;

    PurityProfile prof;
    prof.m = spec.m;
    for (int len = 1; len <= blocks; ++len)
        for (int first = 0; first + len <= blocks; ++first) {
            std::vector<int> support;
            for (int l = lmin + first; l < lmin + first + len; ++l) {
                auto t = block_targets(spec, BlockSite{l, 1});
                support.insert(support.end(), t.begin(), t.end());
            }
            if (int(support.size()) == spec.n) {
                prof.runs[{first, len}] = 1.0;  // pure state, full register
            } else {
                prof.runs[{first, len}] =
                    purity(reduced_density(init, SubsystemMask(spec.n, support)));
            }
        }
    return prof;
}

}  // namespace pqk
