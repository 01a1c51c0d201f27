#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "holdswitch/date.hpp"
#include "holdswitch/error.hpp"

namespace holdswitch::metrics {

inline constexpr double kTradingDaysPerYear = 252.0;
// Dispersion or mean below this is treated as zero.
inline constexpr double kDegenerate = 1e-14;

struct EquitySeries {
    std::vector<Date> dates;
    std::vector<double> values;
};

/// The four reported metrics. `max_drawdown` is the positive loss fraction;
/// undefined ratios are NaN.
struct MetricReport {
    double cumulative_return = 0.0;
    double max_drawdown = 0.0;
    double sharpe = 0.0;
    double calmar = 0.0;
    double risk_free_rate = 0.0;
};

namespace detail {
inline void require_series(std::span<const double> v) {
    if (v.size() < 2) throw MetricError("metric needs at least 2 values");
    for (double x : v)
        if (!(x > 0.0) || !std::isfinite(x)) throw MetricError("portfolio values must be positive and finite");
}
}  // namespace detail

/// P_last / P_first - 1.
inline double cumulative_return(std::span<const double> values) {
    detail::require_series(values);
    return values.back() / values.front() - 1.0;
}

/// Largest peak-to-later-trough loss, max over i < j of 1 - P_j / P_i.
inline double max_drawdown(std::span<const double> values) {
    detail::require_series(values);
    double peak = values.front();
    double worst = 0.0;
    for (double v : values) {
        peak = std::max(peak, v);
        worst = std::max(worst, 1.0 - v / peak);
    }
    return worst;
}

inline std::vector<double> simple_returns(std::span<const double> values) {
    detail::require_series(values);
    std::vector<double> r(values.size() - 1);
    for (std::size_t t = 0; t + 1 < values.size(); ++t) r[t] = values[t + 1] / values[t] - 1.0;
    return r;
}

/// Annualised Sharpe of daily returns against an annual risk-free rate, using
/// the sample standard deviation of excess returns. Zero excess mean with zero
/// dispersion gives 0; any other zero-dispersion input is undefined.
inline double sharpe_ratio(std::span<const double> daily_returns, double risk_free_annual = 0.0) {
    if (daily_returns.size() < 2) throw MetricError("Sharpe needs at least 2 returns");
    const double rf_daily = risk_free_annual / kTradingDaysPerYear;
    const auto n = static_cast<double>(daily_returns.size());
    double mean = 0.0;
    for (double r : daily_returns) mean += r - rf_daily;
    mean /= n;
    double ss = 0.0;
    for (double r : daily_returns) ss += (r - rf_daily - mean) * (r - rf_daily - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd < kDegenerate) {
        if (std::abs(mean) < kDegenerate) return 0.0;
        throw MetricError("undefined Sharpe: zero return dispersion");
    }
    return mean / sd * std::sqrt(kTradingDaysPerYear);
}

/// (P_last / P_first)^(252 / n) - 1 with n the number of daily returns.
inline double annualized_return(std::span<const double> values) {
    detail::require_series(values);
    const auto n = static_cast<double>(values.size() - 1);
    return std::pow(values.back() / values.front(), kTradingDaysPerYear / n) - 1.0;
}

/// (annualised return - R_f) / max drawdown.
inline double calmar_ratio(std::span<const double> values, double risk_free_annual = 0.0) {
    const double mdd = max_drawdown(values);
    if (mdd <= 0.0) throw MetricError("undefined Calmar: zero drawdown");
    return (annualized_return(values) - risk_free_annual) / mdd;
}

inline MetricReport evaluate(std::span<const double> values, double risk_free_annual = 0.0) {
    MetricReport m;
    m.risk_free_rate = risk_free_annual;
    m.cumulative_return = cumulative_return(values);
    m.max_drawdown = max_drawdown(values);
    const auto r = simple_returns(values);
    try {
        m.sharpe = sharpe_ratio(r, risk_free_annual);
    } catch (const MetricError&) {
        m.sharpe = std::numeric_limits<double>::quiet_NaN();
    }
    try {
        m.calmar = calmar_ratio(values, risk_free_annual);
    } catch (const MetricError&) {
        m.calmar = std::numeric_limits<double>::quiet_NaN();
    }
    return m;
}

inline MetricReport evaluate(const EquitySeries& s, double risk_free_annual = 0.0) {
    return evaluate(std::span<const double>(s.values), risk_free_annual);
}

/// Field-wise arithmetic mean.
inline MetricReport average(std::span<const MetricReport> reports) {
    if (reports.empty()) throw MetricError("nothing to average");
    MetricReport m;
    m.risk_free_rate = reports.front().risk_free_rate;
    m.cumulative_return = m.max_drawdown = m.sharpe = m.calmar = 0.0;
    for (const auto& r : reports) {
        m.cumulative_return += r.cumulative_return;
        m.max_drawdown += r.max_drawdown;
        m.sharpe += r.sharpe;
        m.calmar += r.calmar;
    }
    const auto n = static_cast<double>(reports.size());
    m.cumulative_return /= n;
    m.max_drawdown /= n;
    m.sharpe /= n;
    m.calmar /= n;
    return m;
}

}  // namespace holdswitch::metrics
