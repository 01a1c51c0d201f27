#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "holdswitch/data.hpp"
#include "holdswitch/random.hpp"

namespace holdswitch::synth {

// Per-ticker parameters are drawn uniformly from these annualised ranges.
inline constexpr double kDriftMin = -0.05;
inline constexpr double kDriftMax = 0.10;
inline constexpr double kVolMin = 0.10;
inline constexpr double kVolMax = 0.40;
inline constexpr double kStartPriceMin = 20.0;
inline constexpr double kStartPriceMax = 200.0;
inline constexpr double kMinPrice = 0.01;

struct GbmParams {
    double drift = 0.0;
    double vol = 0.0;
    double start = 100.0;
};

/// Standard normal by Box-Muller on the engine's raw bits, so output does not
/// depend on the standard library's distribution implementations.
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = unit_uniform(rng);
    while (u1 <= 0.0) u1 = unit_uniform(rng);
    const double u2 = unit_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double round4(double x) { return std::max(kMinPrice, std::round(x * 1e4) / 1e4); }

inline std::vector<Date> business_days(Date first, std::size_t count) {
    std::vector<Date> out;
    Date d = first;
    while (out.size() < count) {
        const std::chrono::weekday wd{std::chrono::sys_days{d.ymd()}};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
        d = d.next_day();
    }
    return out;
}

inline std::string ticker_name(std::size_t d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "SYN%02zu", d);
    return buf;
}

/// Geometric Brownian motion OHLCV bars for `tickers` symbols over `days`
/// business days from 2020-01-02, ordered by date then ticker.
inline std::vector<OhlcvBar> generate(std::uint64_t seed, std::size_t tickers, std::size_t days) {
    if (tickers < 1) throw DataError("synth needs at least 1 ticker");
    if (days < 2) throw DataError("synth needs at least 2 days");
    std::mt19937_64 rng(seed);
    std::vector<GbmParams> params(tickers);
    for (auto& p : params) {
        p.drift = kDriftMin + (kDriftMax - kDriftMin) * unit_uniform(rng);
        p.vol = kVolMin + (kVolMax - kVolMin) * unit_uniform(rng);
        p.start = kStartPriceMin + (kStartPriceMax - kStartPriceMin) * unit_uniform(rng);
    }
    const auto dates = business_days(Date(2020, 1, 2), days);
    const double dt = 1.0 / 252.0;
    std::vector<double> last(tickers);
    for (std::size_t d = 0; d < tickers; ++d) last[d] = params[d].start;

    std::vector<OhlcvBar> bars;
    bars.reserve(tickers * days);
    for (std::size_t t = 0; t < days; ++t) {
        for (std::size_t d = 0; d < tickers; ++d) {
            const auto& p = params[d];
            const double open = round4(last[d]);
            const double shock = standard_normal(rng);
            const double raw_close =
                last[d] * std::exp((p.drift - 0.5 * p.vol * p.vol) * dt + p.vol * std::sqrt(dt) * shock);
            const double close = round4(raw_close);
            const double wiggle = std::abs(standard_normal(rng)) * 0.25 * p.vol * std::sqrt(dt);
            OhlcvBar bar;
            bar.date = dates[t];
            bar.ticker = ticker_name(d);
            bar.open = open;
            bar.close = close;
            bar.high = std::max({round4(std::max(open, close) * (1.0 + wiggle)), open, close});
            bar.low = std::min({round4(std::min(open, close) * (1.0 - wiggle)), open, close});
            bar.volume = std::floor(100'000.0 + 900'000.0 * unit_uniform(rng));
            bars.push_back(std::move(bar));
            last[d] = raw_close;
        }
    }
    return bars;
}

inline void write_ohlcv_csv(const std::vector<OhlcvBar>& bars, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << kOhlcvHeader << '\n';
    char line[160];
    for (const auto& b : bars) {
        std::snprintf(line, sizeof line, "%s,%s,%.4f,%.4f,%.4f,%.4f,%.0f\n", b.date.str().c_str(), b.ticker.c_str(),
                      b.open, b.high, b.low, b.close, b.volume);
        out << line;
    }
    if (!out) throw DataError("failed writing " + path);
}

}  // namespace holdswitch::synth
