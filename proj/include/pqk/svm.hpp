// Kernel SVM dual training (projected coordinate descent) and prediction
// over precomputed Gram matrices. The dual is box-constrained only: the
// prediction rule carries no intercept, so no equality constraint applies.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pqk {

struct SvmModel {
    std::vector<double> alpha;
    std::vector<int> labels;  // +1 / -1
    double C = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;

    std::vector<std::size_t> support_vectors() const {
        std::vector<std::size_t> sv;
        for (std::size_t i = 0; i < alpha.size(); ++i)
            if (alpha[i] > 1e-8) sv.push_back(i);
        return sv;
    }
};

inline double svm_dual_objective(const Eigen::MatrixXd& g, const std::vector<int>& y,
                                 const std::vector<double>& alpha) {
    const std::size_t n = alpha.size();
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj -= alpha[i];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            obj += 0.5 * alpha[i] * alpha[j] * y[i] * y[j] *
                   g(Eigen::Index(i), Eigen::Index(j));
    return obj;
}

// Minimizes L(a) = -sum a_i + (1/2) sum a_i a_j y_i y_j G_ij subject to
// 0 <= a_i <= C, to projected-gradient residual <= tol.
inline SvmModel train_dual(const Eigen::MatrixXd& g, const std::vector<int>& y,
                           double C = std::numeric_limits<double>::infinity(),
                           double tol = 1e-8, int max_iter = 10000) {
    const std::size_t n = y.size();
    if (std::size_t(g.rows()) != n || std::size_t(g.cols()) != n)
        throw std::invalid_argument("train_dual: Gram/label size mismatch");
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("train_dual: Gram matrix not symmetric");
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-6)
            throw std::invalid_argument("train_dual: Gram matrix not PSD");
    }
    for (int yi : y)
        if (yi != 1 && yi != -1)
            throw std::invalid_argument("train_dual: labels must be +1/-1");

    SvmModel model;
    model.labels = y;
    model.C = C;
    model.alpha.assign(n, 0.0);
    if (C <= 0.0) {
        model.converged = true;
        return model;
    }

    // grad_i = -1 + sum_j Q_ij a_j with Q_ij = y_i y_j G_ij
    std::vector<double> grad(n, -1.0);
    for (int it = 0; it < max_iter; ++it) {
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double qii = g(Eigen::Index(i), Eigen::Index(i));
            if (qii <= 1e-14) continue;  // flat direction, leave at bound
            double ai = model.alpha[i];
            double cand = ai - grad[i] / qii;
            double clipped = std::min(std::max(cand, 0.0), C);
            double delta = clipped - ai;
            if (delta != 0.0) {
                model.alpha[i] = clipped;
                for (std::size_t j = 0; j < n; ++j)
                    grad[j] += delta * y[i] * y[j] * g(Eigen::Index(i), Eigen::Index(j));
            }
            // projected gradient at the updated point
            double pg = grad[i];
            if (model.alpha[i] <= 0.0) pg = std::min(pg, 0.0);
            if (model.alpha[i] >= C) pg = std::max(pg, 0.0);
            residual = std::max(residual, std::abs(pg));
        }
        model.iterations = it + 1;
        if (residual <= tol) {
            model.converged = true;
            return model;
        }
    }
    model.converged = false;  // reported, not silent
    return model;
}

// sign(sum_i a_i y_i k(x_new, x_i)); an exact zero maps to +1.
inline int predict(const SvmModel& model, const std::vector<double>& k_new) {
    if (k_new.size() != model.alpha.size())
        throw std::invalid_argument("predict: kernel vector length mismatch");
    double f = 0.0;
    for (std::size_t i = 0; i < k_new.size(); ++i)
        f += model.alpha[i] * model.labels[i] * k_new[i];
    return f < 0.0 ? -1 : 1;
}

}  // namespace pqk
