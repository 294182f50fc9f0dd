// Dense statevector and density-matrix primitives.
//
// Convention: qubit 0 is the most significant bit of the amplitude index,
// so |q0 q1 ... q_{n-1}> lives at index (q0 << (n-1)) | ... | q_{n-1}.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "pqk/rng.hpp"

namespace pqk {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTol = 1e-10;

// Memory guard; 2^14 complex doubles keeps everything desk-scale.
inline int& max_qubits() {
    static int v = 14;
    return v;
}

struct Statevector {
    int n = 0;
    Vector amps;

    Statevector() = default;
    Statevector(int n_, Vector a) : n(n_), amps(std::move(a)) {
        if (n < 1) throw std::invalid_argument("Statevector: n must be >= 1");
        if (amps.size() != (Eigen::Index(1) << n))
            throw std::invalid_argument("Statevector: length must be 2^n");
        check_norm();
    }

    std::size_t dim() const { return std::size_t(1) << n; }

    void check_norm() const {
        double s = amps.squaredNorm();
        if (std::abs(s - 1.0) > kNormTol)
            throw std::runtime_error("Statevector: norm drift beyond 1e-10");
    }
};

struct DensityMatrix {
    int k = 0;
    Matrix mat;

    DensityMatrix() = default;
    DensityMatrix(int k_, Matrix m) : k(k_), mat(std::move(m)) {
        const Eigen::Index d = Eigen::Index(1) << k;
        if (mat.rows() != d || mat.cols() != d)
            throw std::invalid_argument("DensityMatrix: dimension mismatch");
        if ((mat - mat.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
            throw std::runtime_error("DensityMatrix: not Hermitian");
        if (std::abs(mat.trace().real() - 1.0) > 1e-10 ||
            std::abs(mat.trace().imag()) > 1e-10)
            throw std::runtime_error("DensityMatrix: trace != 1");
    }

    std::size_t dim() const { return std::size_t(1) << k; }
};

struct SubsystemMask {
    int n = 0;
    std::vector<int> kept;  // ordered qubit indices retained

    SubsystemMask() = default;
    SubsystemMask(int n_, std::vector<int> kept_) : n(n_), kept(std::move(kept_)) {
        if (kept.empty()) throw std::invalid_argument("SubsystemMask: empty mask");
        std::vector<int> s = kept;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw std::invalid_argument("SubsystemMask: duplicate indices");
        for (int q : kept)
            if (q < 0 || q >= n)
                throw std::invalid_argument("SubsystemMask: index out of range");
        kept = std::move(s);
    }

    int size() const { return int(kept.size()); }
};

enum class InitKind { AllZero, GHZ, HaarRandom, ExplicitVector };

inline Statevector prepare_initial(InitKind kind, int n, std::uint64_t seed = 0,
                                   const Vector* explicit_amps = nullptr) {
    if (n < 1) throw std::invalid_argument("prepare_initial: n must be >= 1");
    if (n > max_qubits())
        throw std::invalid_argument("prepare_initial: n exceeds configured maximum");
    const Eigen::Index d = Eigen::Index(1) << n;
    switch (kind) {
        case InitKind::AllZero: {
            Vector v = Vector::Zero(d);
            v[0] = 1.0;
            return Statevector(n, std::move(v));
        }
        case InitKind::GHZ: {
            Vector v = Vector::Zero(d);
            v[0] = v[d - 1] = 1.0 / std::sqrt(2.0);
            return Statevector(n, std::move(v));
        }
        case InitKind::HaarRandom: {
            // A normalized vector of iid complex Gaussians is distributed as a
            // column of a Haar-sampled unitary.
            auto rng = make_stream(seed, {0x68616172u});  // "haar"
            std::normal_distribution<double> g(0.0, 1.0);
            Vector v(d);
            for (Eigen::Index i = 0; i < d; ++i) v[i] = Complex(g(rng), g(rng));
            v /= v.norm();
            return Statevector(n, std::move(v));
        }
        case InitKind::ExplicitVector: {
            if (!explicit_amps)
                throw std::invalid_argument("prepare_initial: missing explicit vector");
            return Statevector(n, *explicit_amps);  // ctor validates norm
        }
    }
    throw std::logic_error("prepare_initial: unknown kind");
}

// Applies u on `targets` (targets[0] is the most significant bit of u's
// index space), identity elsewhere.
inline Statevector apply_block(const Statevector& state, const Matrix& u,
                               const std::vector<int>& targets) {
    const int m = int(targets.size());
    const Eigen::Index bd = Eigen::Index(1) << m;
    if (u.rows() != bd || u.cols() != bd)
        throw std::invalid_argument("apply_block: matrix/target size mismatch");
    if ((u * u.adjoint() - Matrix::Identity(bd, bd)).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("apply_block: matrix is not unitary");
    {
        std::vector<int> s = targets;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw std::invalid_argument("apply_block: duplicate targets");
        for (int q : s)
            if (q < 0 || q >= state.n)
                throw std::invalid_argument("apply_block: target out of range");
    }

    const int n = state.n;
    std::vector<std::size_t> tbit(m);
    for (int j = 0; j < m; ++j) tbit[j] = std::size_t(1) << (n - 1 - targets[j]);
    std::size_t tmask = 0;
    for (auto b : tbit) tmask |= b;

    Vector out = state.amps;
    const std::size_t dim = state.dim();
    std::vector<std::size_t> idx(static_cast<std::size_t>(bd));
    Vector in(bd), res(bd);
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & tmask) continue;  // iterate over non-target assignments
        for (std::size_t r = 0; r < std::size_t(bd); ++r) {
            std::size_t i = base;
            for (int j = 0; j < m; ++j)
                if (r & (std::size_t(1) << (m - 1 - j))) i |= tbit[j];
            idx[r] = i;
            in[Eigen::Index(r)] = state.amps[Eigen::Index(i)];
        }
        res.noalias() = u * in;
        for (std::size_t r = 0; r < std::size_t(bd); ++r)
            out[Eigen::Index(idx[r])] = res[Eigen::Index(r)];
    }
    Statevector sv;
    sv.n = n;
    sv.amps = std::move(out);
    sv.check_norm();
    return sv;
}

inline DensityMatrix reduced_density(const Statevector& state,
                                     const SubsystemMask& keep) {
    if (keep.n != state.n)
        throw std::invalid_argument("reduced_density: mask/state size mismatch");
    const int n = state.n;
    const int k = keep.size();
    std::vector<int> comp;
    {
        std::vector<bool> kept(n, false);
        for (int q : keep.kept) kept[q] = true;
        for (int q = 0; q < n; ++q)
            if (!kept[q]) comp.push_back(q);
    }
    const int c = int(comp.size());
    const Eigen::Index dk = Eigen::Index(1) << k;
    const std::size_t dc = std::size_t(1) << c;

    auto compose = [&](std::size_t a, std::size_t e) {
        std::size_t i = 0;
        for (int j = 0; j < k; ++j)
            if (a & (std::size_t(1) << (k - 1 - j)))
                i |= std::size_t(1) << (n - 1 - keep.kept[j]);
        for (int j = 0; j < c; ++j)
            if (e & (std::size_t(1) << (c - 1 - j)))
                i |= std::size_t(1) << (n - 1 - comp[j]);
        return i;
    };

    Matrix rho = Matrix::Zero(dk, dk);
    for (std::size_t a = 0; a < std::size_t(dk); ++a)
        for (std::size_t b = 0; b < std::size_t(dk); ++b) {
            Complex s = 0.0;
            for (std::size_t e = 0; e < dc; ++e)
                s += state.amps[Eigen::Index(compose(a, e))] *
                     std::conj(state.amps[Eigen::Index(compose(b, e))]);
            rho(Eigen::Index(a), Eigen::Index(b)) = s;
        }
    return DensityMatrix(k, std::move(rho));
}

inline double hs_inner(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.k != b.k) throw std::invalid_argument("hs_inner: dimension mismatch");
    Complex t = (a.mat * b.mat).trace();
    if (std::abs(t.imag()) > 1e-10)
        throw std::runtime_error("hs_inner: non-real trace");
    return t.real();
}

inline double purity(const DensityMatrix& a) { return hs_inner(a, a); }

}  // namespace pqk
