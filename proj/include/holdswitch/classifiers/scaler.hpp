#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "holdswitch/error.hpp"

namespace holdswitch::classifiers {

inline constexpr double kDegenerateStd = 1e-12;

/// Per-column z-scoring with population statistics. Columns whose standard
/// deviation is below 1e-12 are only centred.
class StandardScaler {
public:
    StandardScaler() = default;
    StandardScaler(Eigen::RowVectorXd mean, Eigen::RowVectorXd scale) : mean_(std::move(mean)), scale_(std::move(scale)) {}

    static StandardScaler fit(const Eigen::MatrixXd& x) {
        if (x.rows() == 0 || x.cols() == 0) throw ClassifierError("cannot fit scaler on an empty matrix");
        Eigen::RowVectorXd mean = x.colwise().mean();
        Eigen::RowVectorXd scale(x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double var = (x.col(c).array() - mean[c]).square().mean();
            const double sd = std::sqrt(var);
            scale[c] = sd < kDegenerateStd ? 1.0 : sd;
        }
        return {std::move(mean), std::move(scale)};
    }

    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const {
        if (x.cols() != mean_.size()) throw ClassifierError("scaler feature-count mismatch");
        return ((x.rowwise() - mean_).array().rowwise() / scale_.array()).matrix();
    }

    const Eigen::RowVectorXd& mean() const { return mean_; }
    const Eigen::RowVectorXd& scale() const { return scale_; }

private:
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
};

inline std::pair<StandardScaler, Eigen::MatrixXd> standardize(const Eigen::MatrixXd& train) {
    auto scaler = StandardScaler::fit(train);
    auto out = scaler.transform(train);
    return {std::move(scaler), std::move(out)};
}

}  // namespace holdswitch::classifiers
