#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "holdswitch/error.hpp"

namespace holdswitch {

using Shares = std::int64_t;
using Holdings = Eigen::Matrix<Shares, Eigen::Dynamic, 1>;

inline constexpr double kDefaultInitialBalance = 1'000'000.0;
inline constexpr double kDefaultCostRate = 0.001;

/// Portfolio state [p, h, b]: prices, integer holdings, cash balance.
class PortfolioState {
public:
    PortfolioState(Eigen::VectorXd prices, Holdings holdings, double balance, std::size_t date_index = 0)
        : prices_(std::move(prices)), holdings_(std::move(holdings)), balance_(balance), date_index_(date_index) {
        if (prices_.size() != holdings_.size()) throw EnvError("prices and holdings differ in length");
        if (prices_.size() == 0) throw EnvError("empty portfolio state");
        if (!prices_.allFinite() || prices_.minCoeff() <= 0.0) throw EnvError("prices must be positive");
        if (holdings_.minCoeff() < 0) throw EnvError("holdings must be non-negative");
        if (!std::isfinite(balance_) || balance_ < 0.0) throw EnvError("balance must be non-negative");
        if (!(value() > 0.0)) throw EnvError("portfolio value must be positive");
    }

    static PortfolioState all_cash(Eigen::VectorXd prices, double balance, std::size_t date_index = 0) {
        Holdings h = Holdings::Zero(prices.size());
        return PortfolioState(std::move(prices), std::move(h), balance, date_index);
    }

    const Eigen::VectorXd& prices() const { return prices_; }
    const Holdings& holdings() const { return holdings_; }
    double balance() const { return balance_; }
    std::size_t date_index() const { return date_index_; }
    Eigen::Index dims() const { return prices_.size(); }

    /// P = b + p^T h.
    double value() const { return balance_ + prices_.dot(holdings_.cast<double>()); }

private:
    Eigen::VectorXd prices_;
    Holdings holdings_;
    double balance_;
    std::size_t date_index_;
};

inline double portfolio_value(const PortfolioState& s) { return s.value(); }

/// Share deltas per ticker; negative sells, positive buys.
struct TradeAction {
    Holdings deltas;

    static TradeAction zero(Eigen::Index dims) { return {Holdings::Zero(dims)}; }
    bool is_zero() const { return (deltas.array() == 0).all(); }
};

struct EnvConfig {
    double cost_rate = kDefaultCostRate;
    std::optional<double> turbulence_threshold;

    void validate() const {
        if (!(cost_rate >= 0.0 && cost_rate < 1.0)) throw ConfigError("cost_rate must lie in [0, 1)");
        if (turbulence_threshold && !(*turbulence_threshold >= 0.0))
            throw ConfigError("turbulence_threshold must be non-negative");
    }
};

/// c_t = rate * sum_d p[d] * |a[d]|.
inline double transaction_cost(const Eigen::VectorXd& prices, const Holdings& deltas, double cost_rate) {
    return cost_rate * prices.dot(deltas.cwiseAbs().cast<double>());
}

/// Cash after executing `deltas` at `prices`, cost charged once. Shared by
/// clipping and stepping so both see bit-identical balances.
inline double cash_after(double balance, const Eigen::VectorXd& prices, const Holdings& deltas, double cost_rate) {
    double buys = 0.0;
    double sells = 0.0;
    for (Eigen::Index d = 0; d < deltas.size(); ++d) {
        const double notional = prices[d] * static_cast<double>(deltas[d]);
        if (deltas[d] > 0)
            buys += notional;
        else
            sells -= notional;
    }
    return balance - buys + sells - transaction_cost(prices, deltas, cost_rate);
}

/// Makes a raw action feasible: sells are clipped to held shares and settle
/// first, then buys are admitted in ascending ticker order, each cut to the
/// largest whole share count the remaining cash covers net of costs.
inline TradeAction clip_action(const PortfolioState& state, const TradeAction& raw, double cost_rate) {
    const auto dims = state.dims();
    if (raw.deltas.size() != dims) throw EnvError("action length does not match portfolio");
    const auto& p = state.prices();
    const auto& h = state.holdings();

    Holdings out = Holdings::Zero(dims);
    for (Eigen::Index d = 0; d < dims; ++d)
        if (raw.deltas[d] < 0) out[d] = -std::min<Shares>(-raw.deltas[d], h[d]);

    for (Eigen::Index d = 0; d < dims; ++d) {
        if (raw.deltas[d] <= 0) continue;
        const double available = cash_after(state.balance(), p, out, cost_rate);
        if (available <= 0.0) break;
        const double per_share = p[d] * (1.0 + cost_rate);
        Shares n = std::min<Shares>(raw.deltas[d], static_cast<Shares>(std::floor(available / per_share)));
        while (n > 0) {
            out[d] = n;
            if (cash_after(state.balance(), p, out, cost_rate) >= 0.0) break;
            --n;
        }
        out[d] = std::max<Shares>(n, 0);
    }
    return {out};
}

struct StepResult {
    PortfolioState state;
    double reward = 0.0;
    TradeAction executed;
    double cost = 0.0;
    bool halted = false;
};

/// One MDP transition. Trades fill at the current prices, the cost is deducted
/// from cash once, and the reward is the change in portfolio value. When
/// turbulence exceeds the configured threshold the requested action is
/// replaced by a full liquidation.
inline StepResult step(const PortfolioState& state, const TradeAction& action, const Eigen::VectorXd& next_prices,
                       const EnvConfig& config, std::optional<double> turbulence = std::nullopt) {
    if (next_prices.size() != state.dims()) throw EnvError("next_prices length does not match portfolio");
    if (!next_prices.allFinite() || next_prices.minCoeff() <= 0.0) throw EnvError("next prices must be positive");
    if (action.deltas.size() != state.dims()) throw EnvError("action length does not match portfolio");

    const bool halted = turbulence && config.turbulence_threshold && *turbulence > *config.turbulence_threshold;
    TradeAction exec = halted ? TradeAction{-state.holdings()} : action;

    const Holdings next_h = state.holdings() + exec.deltas;
    if (next_h.minCoeff() < 0) throw EnvError("infeasible action: sells exceed holdings");
    const double cost = transaction_cost(state.prices(), exec.deltas, config.cost_rate);
    const double next_b = cash_after(state.balance(), state.prices(), exec.deltas, config.cost_rate);
    if (next_b < 0.0) throw EnvError("infeasible action: negative balance");

    PortfolioState next(next_prices, next_h, next_b, state.date_index() + 1);
    const double reward = next.value() - state.value();
    return StepResult{std::move(next), reward, std::move(exec), cost, halted};
}

}  // namespace holdswitch
