#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/classifiers/spec.hpp"

namespace holdswitch::classifiers {

inline constexpr double kSmoTolerance = 1e-3;
inline constexpr long kSmoMaxIter = 200'000;

struct KernelFn {
    Kernel kind = Kernel::linear;
    double gamma = 1.0;
    double coef0 = 0.0;
    int degree = 3;

    double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
        switch (kind) {
            case Kernel::linear: return a.dot(b);
            case Kernel::rbf: return std::exp(-gamma * (a - b).squaredNorm());
            case Kernel::poly: return std::pow(gamma * a.dot(b) + coef0, degree);
            case Kernel::sigmoid: return std::tanh(gamma * a.dot(b) + coef0);
        }
        return 0.0;
    }
};

/// Sigmoid map from decision value to P(class 1): 1 / (1 + exp(a f + b)).
struct SigmoidCalibration {
    double a = 0.0;
    double b = 0.0;

    double prob_positive(double f) const {
        const double z = f * a + b;
        return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    }
};

/// Fits the calibration by regularised-target Newton iteration with
/// backtracking (Lin, Lin and Weng's variant of Platt scaling).
inline SigmoidCalibration fit_sigmoid(const std::vector<double>& dec, const LabelVector& y) {
    const std::size_t n = dec.size();
    double prior1 = 0.0, prior0 = 0.0;
    for (int label : y) (label == 1 ? prior1 : prior0) += 1.0;
    const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo_target = 1.0 / (prior0 + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = y[i] == 1 ? hi_target : lo_target;

    constexpr int max_iter = 100;
    constexpr double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;
    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

    auto objective = [&](double aa, double bb) {
        double fval = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = dec[i] * aa + bb;
            fval += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return fval;
    };
    double fval = objective(a, b);
    for (int iter = 0; iter < max_iter; ++iter) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = dec[i] * a + b;
            double p, q;
            if (z >= 0.0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= min_step) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step *= 0.5;
        }
        if (step < min_step) break;
    }
    return {a, b};
}

struct SvmModel {
    KernelFn kernel;
    FeatureMatrix support;        // support vectors, one per row
    Eigen::VectorXd coef;         // alpha_i * y_i
    double rho = 0.0;
    SigmoidCalibration calibration;
    long iterations = 0;

    double decision_value(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        double s = -rho;
        for (Eigen::Index i = 0; i < support.rows(); ++i) s += coef[i] * kernel(support.row(i), x);
        return s;
    }

    ProbabilityMatrix predict_proba(const FeatureMatrix& x) const {
        ProbabilityMatrix p(x.rows(), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double p1 = calibration.prob_positive(decision_value(x.row(i)));
            p(i, 1) = p1;
            p(i, 0) = 1.0 - p1;
        }
        return p;
    }
};

/// C-SVC dual solved by sequential minimal optimisation over maximal
/// violating pairs; stops once the KKT gap is below 1e-3. Class 1 maps to +1.
inline SvmModel fit_svm(const FeatureMatrix& x, const LabelVector& labels, Kernel kind, const Hyper& hyper) {
    const Eigen::Index n = x.rows();
    SvmModel model;
    model.kernel.kind = kind;
    model.kernel.gamma = hyper.gamma > 0.0 ? hyper.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, x.cols()));
    model.kernel.coef0 = hyper.coef0;
    model.kernel.degree = hyper.degree;
    const double c = hyper.c;

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) k(i, j) = k(j, i) = model.kernel(x.row(i), x.row(j));

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - e
    auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
    auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };
    constexpr double tau = 1e-12;

    long iter = 0;
    for (; iter < kSmoMaxIter; ++iter) {
        Eigen::Index i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || gmax - gmin < kSmoTolerance) break;

        const double old_ai = alpha[i], old_aj = alpha[j];
        const double quad = std::max(k(i, i) + k(j, j) - 2.0 * k(i, j), tau);
        if (y[i] != y[j]) {
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_ai, dj = alpha[j] - old_aj;
        for (Eigen::Index t = 0; t < n; ++t) grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
    }
    model.iterations = iter;

    // rho: mean over free vectors, else midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    if (n_free > 0) model.rho = sum_free / n_free;
    else if (std::isfinite(ub) && std::isfinite(lb)) model.rho = 0.5 * (ub + lb);
    else model.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);

    std::vector<Eigen::Index> sv;
    for (Eigen::Index t = 0; t < n; ++t)
        if (alpha[t] > 0) sv.push_back(t);
    model.support.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    model.coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t s = 0; s < sv.size(); ++s) {
        model.support.row(static_cast<Eigen::Index>(s)) = x.row(sv[s]);
        model.coef[static_cast<Eigen::Index>(s)] = alpha[sv[s]] * y[sv[s]];
    }

    std::vector<double> dec(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
        // Training decision values straight from the gradient: f = y (G + 1) - rho.
        dec[static_cast<std::size_t>(t)] = y[t] * (grad[t] + 1.0) - model.rho;
    }
    model.calibration = fit_sigmoid(dec, labels);
    return model;
}

}  // namespace holdswitch::classifiers
