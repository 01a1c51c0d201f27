#pragma once

#include <Eigen/Dense>

#include "holdswitch/agents.hpp"
#include "holdswitch/classifiers/spec.hpp"

namespace holdswitch::classifiers {

/// Per-day feature rows for one agent: portfolio weights p[d] h[d] / P,
/// followed by the one-day share change h_t - h_{t-1} (all-cash before day 0).
/// T x 2D.
inline FeatureMatrix holdings_features(const HoldingsTrajectory& traj, const PricePanel& panel, double initial_balance) {
    const auto cash = cash_ledger(traj, panel, initial_balance);
    const auto t_count = static_cast<Eigen::Index>(traj.num_dates());
    const auto dims = traj.holdings.cols();
    FeatureMatrix out(t_count, 2 * dims);
    for (Eigen::Index t = 0; t < t_count; ++t) {
        const Eigen::VectorXd p = panel.prices_at(static_cast<std::size_t>(t));
        const Eigen::VectorXd h = traj.holdings.row(t).transpose().cast<double>();
        const double value = cash[static_cast<std::size_t>(t)] + p.dot(h);
        out.row(t).head(dims) = (p.cwiseProduct(h) / value).transpose();
        if (t == 0)
            out.row(t).tail(dims) = h.transpose();
        else
            out.row(t).tail(dims) = (traj.holdings.row(t) - traj.holdings.row(t - 1)).cast<double>();
    }
    return out;
}

}  // namespace holdswitch::classifiers
