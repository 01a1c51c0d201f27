#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/csv.hpp"
#include "holdswitch/data.hpp"
#include "holdswitch/error.hpp"
#include "holdswitch/market_env.hpp"

namespace holdswitch {

using HoldingsMatrix = Eigen::Matrix<Shares, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr const char* kReplayHeader = "date,ticker,shares";
inline constexpr std::size_t kMomentumRebalanceDays = 21;
inline constexpr std::size_t kDefaultMomentumLookback = 63;

/// Daily holdings of one agent, aligned to a panel. Row t is what the agent
/// holds after trading at the close of date t.
struct HoldingsTrajectory {
    std::vector<Date> dates;
    HoldingsMatrix holdings;
    int agent_id = 0;
    std::string label;

    Holdings row(std::size_t t) const { return holdings.row(static_cast<Eigen::Index>(t)).transpose(); }
    std::size_t num_dates() const { return dates.size(); }
};

/// Replays a trajectory's trades with no costs from an all-cash start and
/// returns the cash held after each day's trades. Throws on the first day
/// whose trades cannot be paid for.
inline std::vector<double> cash_ledger(const HoldingsTrajectory& traj, const PricePanel& panel, double initial_balance) {
    if (traj.num_dates() != panel.num_dates() || traj.holdings.cols() != static_cast<Eigen::Index>(panel.num_tickers()))
        throw AgentError("trajectory shape does not match panel");
    std::vector<double> cash(traj.num_dates());
    double balance = initial_balance;
    Holdings prev = Holdings::Zero(traj.holdings.cols());
    for (std::size_t t = 0; t < traj.num_dates(); ++t) {
        Holdings cur = traj.row(t);
        if (cur.minCoeff() < 0) throw AgentError("negative holdings on " + traj.dates[t].str());
        balance = cash_after(balance, panel.prices_at(t), cur - prev, 0.0);
        if (balance < 0.0) throw AgentError("unaffordable holdings on " + traj.dates[t].str());
        cash[t] = balance;
        prev = std::move(cur);
    }
    return cash;
}

namespace detail {

// Whole shares buying an equal slice of `value` in each selected ticker.
inline Holdings equal_split(double value, const Eigen::VectorXd& prices, const std::vector<Eigen::Index>& picks) {
    Holdings h = Holdings::Zero(prices.size());
    if (picks.empty() || value <= 0.0) return h;
    const double slice = value / static_cast<double>(picks.size());
    for (auto d : picks) h[d] = static_cast<Shares>(std::floor(slice / prices[d]));
    // Rounding guard: the floored basket must fit inside `value`.
    for (auto it = picks.rbegin(); it != picks.rend() && cash_after(value, prices, h, 0.0) < 0.0; ++it)
        while (h[*it] > 0 && cash_after(value, prices, h, 0.0) < 0.0) --h[*it];
    return h;
}

inline HoldingsTrajectory make_trajectory(const PricePanel& panel, int agent_id, std::string label) {
    HoldingsTrajectory traj;
    traj.dates = panel.dates();
    traj.holdings = HoldingsMatrix::Zero(static_cast<Eigen::Index>(panel.num_dates()),
                                         static_cast<Eigen::Index>(panel.num_tickers()));
    traj.agent_id = agent_id;
    traj.label = std::move(label);
    return traj;
}

}  // namespace detail

/// Equal-weight purchase on day 0, held to the end.
inline HoldingsTrajectory buy_and_hold(const PricePanel& panel, double initial_balance, int agent_id = 0) {
    auto traj = detail::make_trajectory(panel, agent_id, "buy_and_hold");
    std::vector<Eigen::Index> all(panel.num_tickers());
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    const Holdings h = detail::equal_split(initial_balance, panel.prices_at(0), all);
    traj.holdings.rowwise() = h.transpose();
    return traj;
}

/// Holds the top half of tickers ranked by trailing `lookback`-day return,
/// equal-weighted, re-ranked every 21 days from day `lookback`. All cash before.
inline HoldingsTrajectory momentum_agent(const PricePanel& panel, std::size_t lookback, double initial_balance,
                                         int agent_id = 0) {
    if (lookback < 1) throw AgentError("momentum lookback must be >= 1");
    if (lookback >= panel.num_dates()) throw AgentError("momentum lookback must be shorter than the panel");
    auto traj = detail::make_trajectory(panel, agent_id, "momentum");
    const auto dims = static_cast<Eigen::Index>(panel.num_tickers());
    const std::size_t keep = std::max<std::size_t>(1, panel.num_tickers() / 2);
    const auto& close = panel.close();

    double cash = initial_balance;
    Holdings held = Holdings::Zero(dims);
    for (std::size_t t = lookback; t < panel.num_dates(); ++t) {
        if ((t - lookback) % kMomentumRebalanceDays == 0) {
            const auto ti = static_cast<Eigen::Index>(t);
            const auto tb = static_cast<Eigen::Index>(t - lookback);
            std::vector<Eigen::Index> order(static_cast<std::size_t>(dims));
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            std::vector<double> trailing(order.size());
            for (Eigen::Index d = 0; d < dims; ++d) trailing[static_cast<std::size_t>(d)] = close(ti, d) / close(tb, d) - 1.0;
            std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return trailing[static_cast<std::size_t>(a)] > trailing[static_cast<std::size_t>(b)];
            });
            order.resize(keep);
            std::sort(order.begin(), order.end());
            const Eigen::VectorXd p = panel.prices_at(t);
            const double value = cash + p.dot(held.cast<double>());
            Holdings next = detail::equal_split(value, p, order);
            // Same guard against the incremental ledger the validator replays.
            for (auto it = order.rbegin(); it != order.rend(); ++it)
                while (next[*it] > 0 && cash_after(cash, p, next - held, 0.0) < 0.0) --next[*it];
            cash = cash_after(cash, p, next - held, 0.0);
            held = std::move(next);
        }
        traj.holdings.row(static_cast<Eigen::Index>(t)) = held.transpose();
    }
    return traj;
}

/// Loads an externally produced trajectory (long format date,ticker,shares).
/// Every panel date and ticker must be present; rows outside the panel are
/// ignored.
inline HoldingsTrajectory replay_trajectory(const std::string& path, const PricePanel& panel, double initial_balance,
                                            int agent_id = 0) {
    auto lines = csv::read_lines(path);
    if (!lines) throw AgentError("cannot open trajectory file: " + path);
    if (lines->empty() || (*lines)[0] != kReplayHeader)
        throw AgentError("trajectory header must be exactly: " + std::string(kReplayHeader));

    std::map<std::string, Eigen::Index> column;
    for (std::size_t d = 0; d < panel.num_tickers(); ++d) column[panel.tickers()[d]] = static_cast<Eigen::Index>(d);

    auto traj = detail::make_trajectory(panel, agent_id, std::filesystem::path(path).stem().string());
    HoldingsMatrix filled = HoldingsMatrix::Zero(traj.holdings.rows(), traj.holdings.cols());
    for (std::size_t i = 1; i < lines->size(); ++i) {
        auto f = csv::split((*lines)[i]);
        const auto where = " (line " + std::to_string(i + 1) + ")";
        if (f.size() != 3) throw AgentError("expected 3 columns" + where);
        auto date = Date::parse(f[0]);
        if (!date) throw AgentError("malformed date" + where);
        auto shares = csv::to_int(f[2]);
        if (!shares) throw AgentError("shares must be an integer" + where);
        if (*shares < 0) throw AgentError("negative shares on " + date->str());
        auto t = panel.index_of(*date);
        auto col = column.find(std::string(f[1]));
        if (!t || col == column.end()) continue;
        const auto ti = static_cast<Eigen::Index>(*t);
        if (filled(ti, col->second)) throw AgentError("duplicate row for " + std::string(f[1]) + " on " + date->str());
        filled(ti, col->second) = 1;
        traj.holdings(ti, col->second) = *shares;
    }
    for (Eigen::Index t = 0; t < filled.rows(); ++t)
        if ((filled.row(t).array() == 0).any())
            throw AgentError("trajectory missing holdings for " + panel.dates()[static_cast<std::size_t>(t)].str());
    cash_ledger(traj, panel, initial_balance);
    return traj;
}

inline void write_trajectory_csv(const HoldingsTrajectory& traj, const std::vector<std::string>& tickers,
                                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw AgentError("cannot write trajectory file: " + path);
    out << kReplayHeader << '\n';
    for (std::size_t t = 0; t < traj.num_dates(); ++t)
        for (std::size_t d = 0; d < tickers.size(); ++d)
            out << traj.dates[t].str() << ',' << tickers[d] << ','
                << traj.holdings(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) << '\n';
}

enum class AgentKind { replay, buy_and_hold, momentum };

struct AgentSpec {
    AgentKind kind = AgentKind::buy_and_hold;
    std::string path;
    std::size_t lookback = kDefaultMomentumLookback;

    /// Accepts `buy_and_hold`, `momentum`, `momentum:<days>` or `replay:<path>`.
    static AgentSpec parse(const std::string& text) {
        AgentSpec spec;
        const auto colon = text.find(':');
        const std::string head = text.substr(0, colon);
        const std::string arg = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
        if (head == "buy_and_hold" && arg.empty()) {
            spec.kind = AgentKind::buy_and_hold;
        } else if (head == "momentum") {
            spec.kind = AgentKind::momentum;
            if (!arg.empty()) {
                auto v = csv::to_int(arg);
                if (!v || *v < 1) throw AgentError("momentum lookback must be a positive integer: " + text);
                spec.lookback = static_cast<std::size_t>(*v);
            }
        } else if (head == "replay" && !arg.empty()) {
            spec.kind = AgentKind::replay;
            spec.path = arg;
        } else {
            throw AgentError("unknown agent spec '" + text + "' (expected buy_and_hold, momentum[:days] or replay:<path>)");
        }
        return spec;
    }
};

inline HoldingsTrajectory make_agent(const AgentSpec& spec, const PricePanel& panel, double initial_balance,
                                     int agent_id) {
    switch (spec.kind) {
        case AgentKind::replay: return replay_trajectory(spec.path, panel, initial_balance, agent_id);
        case AgentKind::buy_and_hold: return buy_and_hold(panel, initial_balance, agent_id);
        case AgentKind::momentum: return momentum_agent(panel, spec.lookback, initial_balance, agent_id);
    }
    throw AgentError("unreachable agent kind");
}

}  // namespace holdswitch
