// Fidelity and projected quantum kernels plus Gram-matrix assembly.

#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqk/ansatz.hpp"
#include "pqk/qstate.hpp"

namespace pqk {

inline double fidelity_kernel(const Statevector& a, const Statevector& b) {
    if (a.n != b.n) throw std::invalid_argument("fidelity_kernel: size mismatch");
    return std::norm(a.amps.dot(b.amps));
}

inline double pqk_kappa(const Statevector& a, const Statevector& b,
                        const SubsystemMask& kappa) {
    return hs_inner(reduced_density(a, kappa), reduced_density(b, kappa));
}

inline std::vector<SubsystemMask> single_qubit_masks(int n) {
    std::vector<SubsystemMask> out;
    for (int q = 0; q < n; ++q) out.emplace_back(n, std::vector<int>{q});
    return out;
}

inline double pqk_linear(const Statevector& a, const Statevector& b,
                         const std::vector<SubsystemMask>& kappas) {
    if (kappas.empty()) throw std::invalid_argument("pqk_linear: empty kappa list");
    double s = 0.0;
    for (const auto& k : kappas) s += pqk_kappa(a, b, k);
    return s;
}

inline double pqk_gaussian(const Statevector& a, const Statevector& b,
                           const std::vector<SubsystemMask>& kappas, double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("pqk_gaussian: gamma must be > 0");
    if (kappas.empty()) throw std::invalid_argument("pqk_gaussian: empty kappa list");
    double dist2 = 0.0;
    for (const auto& k : kappas) {
        Matrix diff = reduced_density(a, k).mat - reduced_density(b, k).mat;
        dist2 += diff.squaredNorm();
    }
    return std::exp(-gamma * dist2);
}

enum class KernelKind { Fidelity, PerKappa, LinearProjected, GaussianProjected };

struct KernelTask {
    KernelKind kind = KernelKind::LinearProjected;
    AlaSpec spec;
    InitKind init = InitKind::AllZero;
    std::uint64_t init_seed = 0;        // HaarRandom init replicate
    std::vector<SubsystemMask> kappas;  // PerKappa: exactly one entry
    double gamma = 1.0;

    KernelTask() = default;
    KernelTask(KernelKind k, AlaSpec s, InitKind i) : kind(k), spec(std::move(s)), init(i) {
        if (kind == KernelKind::GaussianProjected && gamma <= 0.0)
            throw std::invalid_argument("KernelTask: gamma must be > 0");
    }
};

struct GramMatrix {
    std::size_t N = 0;
    Eigen::MatrixXd entries;
    KernelTask task;
};

inline double kernel_value(const KernelTask& task, const Statevector& a,
                           const Statevector& b,
                           const std::vector<SubsystemMask>& kappas) {
    switch (task.kind) {
        case KernelKind::Fidelity:
            return fidelity_kernel(a, b);
        case KernelKind::PerKappa:
            return pqk_kappa(a, b, kappas.at(0));
        case KernelKind::LinearProjected:
            return pqk_linear(a, b, kappas);
        case KernelKind::GaussianProjected:
            return pqk_gaussian(a, b, kappas, task.gamma);
    }
    throw std::logic_error("kernel_value: unknown kind");
}

// Evaluates each state once and reuses it across all (i, j) pairs. The
// diagonal is computed, not assumed.
inline GramMatrix gram(const std::vector<std::vector<double>>& dataset,
                       const std::vector<double>& theta, const KernelTask& task) {
    const std::size_t N = dataset.size();
    if (N == 0) throw std::invalid_argument("gram: empty dataset");
    for (const auto& x : dataset)
        if (int(x.size()) != task.spec.n)
            throw std::invalid_argument("gram: data dimension must equal n");

    Statevector init = prepare_initial(task.init, task.spec.n, task.init_seed);
    std::vector<Statevector> states;
    states.reserve(N);
    for (const auto& x : dataset)
        states.push_back(apply_instance(build_instance(task.spec, x, theta), init));

    std::vector<SubsystemMask> kappas =
        task.kappas.empty() ? single_qubit_masks(task.spec.n) : task.kappas;

    GramMatrix g;
    g.N = N;
    g.task = task;
    g.entries.resize(Eigen::Index(N), Eigen::Index(N));
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i; j < N; ++j) {
            double v = kernel_value(task, states[i], states[j], kappas);
            g.entries(Eigen::Index(i), Eigen::Index(j)) = v;
            g.entries(Eigen::Index(j), Eigen::Index(i)) = v;
        }
    return g;
}

inline const char* kernel_kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::Fidelity: return "fidelity";
        case KernelKind::PerKappa: return "per_kappa";
        case KernelKind::LinearProjected: return "linear";
        case KernelKind::GaussianProjected: return "gaussian";
    }
    return "?";
}

// Row-major CSV with a metadata header line.
inline void write_gram_csv(const GramMatrix& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_gram_csv: cannot open " + path);
    out << "# kernel=" << kernel_kind_name(g.task.kind) << " n=" << g.task.spec.n
        << " m=" << g.task.spec.m << " L=" << g.task.spec.L << " N=" << g.N;
    if (g.task.kind == KernelKind::GaussianProjected) out << " gamma=" << g.task.gamma;
    out << "\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < g.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.entries.cols(); ++j) {
            if (j) out << ",";
            out << g.entries(i, j);
        }
        out << "\n";
    }
}

inline Eigen::MatrixXd read_gram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_gram_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(Eigen::Index(rows.size()), Eigen::Index(rows.empty() ? 0 : rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::runtime_error("read_gram_csv: ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    }
    return m;
}

}  // namespace pqk
