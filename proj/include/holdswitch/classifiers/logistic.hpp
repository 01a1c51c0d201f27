#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/classifiers/spec.hpp"

namespace holdswitch::classifiers {

inline constexpr double kLogregGradTol = 1e-6;
inline constexpr int kLogregMaxIter = 10'000;

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct LogisticModel {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    int iterations = 0;

    double decision_value(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return x.dot(weights) + intercept; }

    ProbabilityMatrix predict_proba(const FeatureMatrix& x) const {
        ProbabilityMatrix p(x.rows(), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double z = decision_value(x.row(i));
            p(i, 0) = sigmoid(-z);
            p(i, 1) = sigmoid(z);
        }
        return p;
    }
};

/// Minimises mean log-loss + strength * (l1_ratio |w|_1 + (1 - l1_ratio)/2 |w|^2)
/// with accelerated proximal gradient; the intercept is not penalised.
/// Stops when the gradient-mapping norm drops below 1e-6.
inline LogisticModel fit_logistic(const FeatureMatrix& x, const LabelVector& y, const Hyper& hyper) {
    const Eigen::Index n = x.rows();
    const Eigen::Index f = x.cols();
    const double lam1 = hyper.strength * hyper.l1_ratio;
    const double lam2 = hyper.strength * (1.0 - hyper.l1_ratio);

    // Lipschitz constant of the smooth part: 0.25 * lambda_max([X 1]^T [X 1]) / n + lam2.
    Eigen::MatrixXd aug(n, f + 1);
    aug << x, Eigen::VectorXd::Ones(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(aug.transpose() * aug, Eigen::EigenvaluesOnly);
    const double lipschitz = 0.25 * eig.eigenvalues().maxCoeff() / static_cast<double>(n) + lam2;
    const double step = 1.0 / std::max(lipschitz, 1e-12);

    // theta = [w; b]
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(f + 1);
    Eigen::VectorXd prev = theta;
    Eigen::VectorXd residual(n);
    double momentum = 1.0;

    auto gradient = [&](const Eigen::VectorXd& point) {
        const Eigen::VectorXd z = aug * point;
        for (Eigen::Index i = 0; i < n; ++i)
            // d/dz of log-loss, written so relabelling negates it exactly.
            residual[i] = y[static_cast<std::size_t>(i)] == 1 ? -sigmoid(-z[i]) : sigmoid(z[i]);
        Eigen::VectorXd g = aug.transpose() * residual / static_cast<double>(n);
        g.head(f) += lam2 * point.head(f);
        return g;
    };
    auto prox = [&](Eigen::VectorXd v) {
        const double thr = step * lam1;
        for (Eigen::Index k = 0; k < f; ++k) {
            const double a = std::abs(v[k]) - thr;
            v[k] = a > 0.0 ? std::copysign(a, v[k]) : 0.0;
        }
        return v;
    };

    LogisticModel model;
    int it = 0;
    for (; it < kLogregMaxIter; ++it) {
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        const Eigen::VectorXd look = theta + ((momentum - 1.0) / next_momentum) * (theta - prev);
        const Eigen::VectorXd next = prox(look - step * gradient(look));
        const double mapping_norm = (look - next).norm() / step;
        prev = theta;
        theta = next;
        momentum = next_momentum;
        if (mapping_norm < kLogregGradTol) break;
    }
    model.weights = theta.head(f);
    model.intercept = theta[f];
    model.iterations = it;
    return model;
}

}  // namespace holdswitch::classifiers
