#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "holdswitch/agents.hpp"
#include "holdswitch/backtest.hpp"
#include "holdswitch/config_file.hpp"
#include "holdswitch/csv.hpp"

namespace holdswitch {

/// Effective settings of a backtest or sweep run: the engine configuration
/// plus where inputs come from and outputs go.
struct RunSettings {
    BacktestConfig config;
    std::string data;
    std::string agent_a = "buy_and_hold";
    std::string agent_b = "momentum";
    std::vector<std::string> symbols;
    std::string out = "out";
    std::vector<double> tau_grid;
};

/// Keys accepted in config files; each is also a long flag of the same name.
inline const std::set<std::string>& run_setting_keys() {
    static const std::set<std::string> keys = {
        "data",         "agent-a",           "agent-b",          "symbols",           "start",
        "end",          "initial-balance",   "cost-rate",        "turbulence-threshold", "turbulence-window",
        "tau",          "tau-grid",          "group",            "validation-window", "rebalance-window",
        "iterations",   "seed",              "epsilon",          "risk-free-rate",    "folds",
        "out"};
    return keys;
}

namespace detail {

inline double parse_real(const std::string& key, const std::string& v) {
    auto x = csv::to_double(v);
    if (!x || !std::isfinite(*x)) throw ConfigError(key + ": not a number '" + v + "'");
    return *x;
}

inline long long parse_integer(const std::string& key, const std::string& v, long long min) {
    auto x = csv::to_int(v);
    if (!x) throw ConfigError(key + ": not an integer '" + v + "'");
    if (*x < min) throw ConfigError(key + ": must be >= " + std::to_string(min));
    return *x;
}

inline Date parse_date(const std::string& key, const std::string& v) {
    auto d = Date::parse(v);
    if (!d) throw ConfigError(key + ": not an ISO date '" + v + "'");
    return *d;
}

}  // namespace detail

/// Comma-separated tau values, each in [0, 1].
inline std::vector<double> parse_tau_grid(const std::string& text) {
    std::vector<double> grid;
    for (auto field : csv::split(text)) {
        const auto v = trim(field);
        if (v.empty()) throw ConfigError("tau-grid: empty entry in '" + text + "'");
        const double t = detail::parse_real("tau-grid", v);
        if (t < 0.0 || t > 1.0) throw ConfigError("tau-grid: value " + v + " outside [0, 1]");
        grid.push_back(t);
    }
    if (grid.empty()) throw ConfigError("tau-grid: empty");
    return grid;
}

inline void apply_setting(RunSettings& s, const std::string& raw_key, const std::string& v) {
    const auto key = canonical_key(raw_key);
    auto& c = s.config;
    if (key == "data") s.data = v;
    else if (key == "agent-a") s.agent_a = v;
    else if (key == "agent-b") s.agent_b = v;
    else if (key == "symbols") {
        s.symbols.clear();
        for (auto f : csv::split(v))
            if (auto t = trim(f); !t.empty()) s.symbols.push_back(t);
    } else if (key == "start") c.date_range.start = detail::parse_date(key, v);
    else if (key == "end") c.date_range.end = detail::parse_date(key, v);
    else if (key == "initial-balance") c.initial_balance = detail::parse_real(key, v);
    else if (key == "cost-rate") c.cost_rate = detail::parse_real(key, v);
    else if (key == "turbulence-threshold") {
        if (v == "off" || v == "none" || v.empty()) c.turbulence_threshold.reset();
        else c.turbulence_threshold = detail::parse_real(key, v);
    } else if (key == "turbulence-window") c.turbulence_window = static_cast<std::size_t>(detail::parse_integer(key, v, 1));
    else if (key == "tau") {
        c.tau = detail::parse_real(key, v);
        if (c.tau < 0.0 || c.tau > 1.0) throw ConfigError("tau: " + v + " outside [0, 1]");
    } else if (key == "tau-grid") s.tau_grid = parse_tau_grid(v);
    else if (key == "group") c.classifier_group = static_cast<int>(detail::parse_integer(key, v, 1));
    else if (key == "validation-window") c.validation_window = static_cast<std::size_t>(detail::parse_integer(key, v, 1));
    else if (key == "rebalance-window") c.rebalance_window = static_cast<std::size_t>(detail::parse_integer(key, v, 1));
    else if (key == "iterations") c.iterations = static_cast<std::size_t>(detail::parse_integer(key, v, 1));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(detail::parse_integer(key, v, 0));
    else if (key == "epsilon") c.epsilon = detail::parse_real(key, v);
    else if (key == "risk-free-rate") c.risk_free_rate = detail::parse_real(key, v);
    else if (key == "folds") c.folds = static_cast<std::size_t>(detail::parse_integer(key, v, 2));
    else if (key == "out") s.out = v;
    else throw ConfigError("unknown key '" + key + "'");
}

/// File values first, then overrides; later keys win.
inline RunSettings resolve_settings(const std::map<std::string, std::string>& file_values,
                                    const std::map<std::string, std::string>& overrides) {
    RunSettings s;
    for (const auto& [k, v] : file_values) apply_setting(s, k, v);
    for (const auto& [k, v] : overrides) apply_setting(s, k, v);
    s.config.validate();
    return s;
}

inline nlohmann::json inputs_json(const RunSettings& s) {
    nlohmann::json j;
    j["data"] = s.data;
    j["agent_a"] = s.agent_a;
    j["agent_b"] = s.agent_b;
    j["symbols"] = s.symbols;
    return j;
}

}  // namespace holdswitch
