// Haar-random unitary sampling and Monte-Carlo verification of the
// first- and second-moment integral identities used by the theory module.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "pqk/qstate.hpp"
#include "pqk/rng.hpp"

namespace pqk {

// Ginibre matrix -> QR, with each column's phase fixed by the sign of the
// corresponding diagonal of R. The phase correction is what makes the
// distribution Haar rather than merely unitary.
inline Matrix sample_haar_unitary(int d, std::mt19937_64& rng) {
    if (d < 2) throw std::invalid_argument("sample_haar_unitary: d must be >= 2");
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        Complex rjj = r(j, j);
        Complex ph = (std::abs(rjj) > 0.0) ? rjj / std::abs(rjj) : Complex(1.0);
        q.col(j) *= ph;
    }
    return q;
}

inline Matrix sample_haar_unitary(int d, std::uint64_t seed,
                                  std::initializer_list<std::uint64_t> ids = {}) {
    auto rng = make_stream(seed, ids);
    return sample_haar_unitary(d, rng);
}

// Partial trace over the trailing tensor factor of an operator on
// H_bar (x) H_w, with dim(H_bar) = dbar and dim(H_w) = dw.
inline Matrix ptrace_last(const Matrix& a, int dbar, int dw) {
    if (a.rows() != Eigen::Index(dbar) * dw || a.cols() != a.rows())
        throw std::invalid_argument("ptrace_last: dimension mismatch");
    Matrix out = Matrix::Zero(dbar, dbar);
    for (int i = 0; i < dbar; ++i)
        for (int j = 0; j < dbar; ++j)
            for (int k = 0; k < dw; ++k) out(i, j) += a(i * dw + k, j * dw + k);
    return out;
}

enum class MomentLemma { L1, L2, L3 };

struct MomentOperands {
    int d = 0;
    Matrix a, b;
    std::optional<Matrix> c, dd;

    MomentOperands(int dim, Matrix a_, Matrix b_) : d(dim), a(std::move(a_)), b(std::move(b_)) {
        validate();
    }
    MomentOperands(int dim, Matrix a_, Matrix b_, Matrix c_, Matrix d_)
        : d(dim), a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), dd(std::move(d_)) {
        validate();
    }

    void validate() const {
        if (d < 2) throw std::invalid_argument("MomentOperands: d must be >= 2");
        auto chk = [&](const Matrix& m) {
            if (m.rows() != d || m.cols() != d)
                throw std::invalid_argument("MomentOperands: matrix not d x d");
        };
        chk(a);
        chk(b);
        if (c) chk(*c);
        if (dd) chk(*dd);
    }
};

// Exact right-hand sides of the t-design trace identities.
inline Complex closed_moment(MomentLemma lemma, const MomentOperands& ops) {
    const double d = double(ops.d);
    switch (lemma) {
        case MomentLemma::L1:
            return ops.a.trace() * ops.b.trace() / d;
        case MomentLemma::L2: {
            if (!ops.c || !ops.dd)
                throw std::invalid_argument("closed_moment: L2 requires C and D");
            const Matrix &a = ops.a, &b = ops.b, &c = *ops.c, &dm = *ops.dd;
            Complex t1 = a.trace() * c.trace() * (b * dm).trace() +
                         (a * c).trace() * b.trace() * dm.trace();
            Complex t2 = a.trace() * b.trace() * c.trace() * dm.trace() +
                         (a * c).trace() * (b * dm).trace();
            return t1 / (d * d - 1.0) - t2 / (d * (d * d - 1.0));
        }
        case MomentLemma::L3: {
            if (!ops.c || !ops.dd)
                throw std::invalid_argument("closed_moment: L3 requires C and D");
            const Matrix &a = ops.a, &b = ops.b, &c = *ops.c, &dm = *ops.dd;
            Complex t1 = a.trace() * b.trace() * c.trace() * dm.trace() +
                         (a * c).trace() * (b * dm).trace();
            Complex t2 = a.trace() * c.trace() * (b * dm).trace() +
                         (a * c).trace() * b.trace() * dm.trace();
            return t1 / (d * d - 1.0) - t2 / (d * (d * d - 1.0));
        }
    }
    throw std::logic_error("closed_moment: unknown lemma");
}

struct MomentEstimate {
    Complex value;
    double se = 0.0;  // batch-means standard error of the (complex) mean
    std::size_t samples = 0;
};

inline constexpr int kBatchCount = 50;

// Batch-means SE of the mean of `xs` with `nbatch` equal batches.
inline double batch_means_se(const std::vector<double>& xs, int nbatch = kBatchCount) {
    const std::size_t n = xs.size();
    if (n < std::size_t(2 * nbatch)) nbatch = std::max(2, int(n / 2));
    const std::size_t per = n / std::size_t(nbatch);
    std::vector<double> means(static_cast<std::size_t>(nbatch));
    double grand = 0.0;
    for (int b = 0; b < nbatch; ++b) {
        double s = 0.0;
        for (std::size_t i = std::size_t(b) * per; i < std::size_t(b + 1) * per; ++i)
            s += xs[i];
        means[std::size_t(b)] = s / double(per);
        grand += means[std::size_t(b)];
    }
    grand /= double(nbatch);
    double var = 0.0;
    for (double mu : means) var += (mu - grand) * (mu - grand);
    var /= double(nbatch - 1);
    return std::sqrt(var / double(nbatch));
}

inline MomentEstimate estimate_moment(MomentLemma lemma, const MomentOperands& ops,
                                      std::size_t samples, std::uint64_t seed) {
    if (samples < 100)
        throw std::invalid_argument("estimate_moment: need at least 100 samples");
    if ((lemma == MomentLemma::L2 || lemma == MomentLemma::L3) && (!ops.c || !ops.dd))
        throw std::invalid_argument("estimate_moment: missing C or D");
    std::vector<double> re(samples), im(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        Matrix w = sample_haar_unitary(ops.d, seed, {0x6d6f6dULL, i});
        Complex v;
        switch (lemma) {
            case MomentLemma::L1:
                v = (w * ops.a * w.adjoint() * ops.b).trace();
                break;
            case MomentLemma::L2:
                v = (w * ops.a * w.adjoint() * ops.b * w * (*ops.c) * w.adjoint() *
                     (*ops.dd))
                        .trace();
                break;
            case MomentLemma::L3:
                v = (w * ops.a * w.adjoint() * ops.b).trace() *
                    (w * (*ops.c) * w.adjoint() * (*ops.dd)).trace();
                break;
        }
        re[i] = v.real();
        im[i] = v.imag();
    }
    double mre = 0.0, mim = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        mre += re[i];
        mim += im[i];
    }
    mre /= double(samples);
    mim /= double(samples);
    double se_re = batch_means_se(re);
    double se_im = batch_means_se(im);
    return MomentEstimate{Complex(mre, mim), std::hypot(se_re, se_im), samples};
}

}  // namespace pqk
