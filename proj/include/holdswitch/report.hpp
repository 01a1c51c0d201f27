#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "holdswitch/backtest.hpp"
#include "holdswitch/csv.hpp"

namespace holdswitch {

inline constexpr const char* kMetricsHeader =
    "model,classifier_group,tau,cumulative_returns,sharpe_ratio,calmar_ratio,max_drawdown";
inline constexpr const char* kMetricColumns[] = {"cumulative_returns", "sharpe_ratio", "calmar_ratio",
                                                 "max_drawdown"};

inline nlohmann::json to_json(const BacktestConfig& c) {
    nlohmann::json j;
    j["start"] = c.date_range.start ? nlohmann::json(c.date_range.start->str()) : nlohmann::json(nullptr);
    j["end"] = c.date_range.end ? nlohmann::json(c.date_range.end->str()) : nlohmann::json(nullptr);
    j["initial_balance"] = c.initial_balance;
    j["cost_rate"] = c.cost_rate;
    j["turbulence_threshold"] = c.turbulence_threshold ? nlohmann::json(*c.turbulence_threshold) : nlohmann::json(nullptr);
    j["turbulence_window"] = c.turbulence_window;
    j["tau"] = c.tau;
    j["group"] = c.classifier_group;
    j["validation_window"] = c.validation_window;
    j["rebalance_window"] = c.rebalance_window;
    j["iterations"] = c.iterations;
    j["seed"] = c.seed;
    j["epsilon"] = c.epsilon;
    j["risk_free_rate"] = c.risk_free_rate;
    j["folds"] = c.folds;
    return j;
}

/// Metric cells in summary-table order; drawdown is written negated.
inline std::string metric_cells(const metrics::MetricReport& m) {
    return csv::num(m.cumulative_return) + "," + csv::num(m.sharpe) + "," + csv::num(m.calmar) + "," +
           csv::num(-m.max_drawdown);
}

inline std::string metrics_csv(const BacktestReport& r) {
    std::ostringstream out;
    out << kMetricsHeader << '\n';
    out << r.ensemble.label << ',' << r.config.classifier_group << ',' << csv::num(r.config.tau) << ','
        << metric_cells(r.ensemble.average) << '\n';
    for (const auto* base : {&r.agent_a, &r.agent_b})
        out << base->label << ",-,-," << metric_cells(base->average) << '\n';
    return out.str();
}

/// Date plus the iteration-mean equity of the ensemble and each base agent.
inline std::string equity_csv(const BacktestReport& r) {
    std::ostringstream out;
    out << "date,ensemble,agent_a,agent_b\n";
    const auto& dates = r.ensemble.curves.front().dates;
    auto mean_at = [](const StrategyResult& s, std::size_t t) {
        double sum = 0.0;
        for (const auto& c : s.curves) sum += c.values[t];
        return sum / static_cast<double>(s.curves.size());
    };
    for (std::size_t t = 0; t < dates.size(); ++t)
        out << dates[t].str() << ',' << csv::num(mean_at(r.ensemble, t)) << ',' << csv::num(mean_at(r.agent_a, t))
            << ',' << csv::num(mean_at(r.agent_b, t)) << '\n';
    return out.str();
}

inline std::string decisions_csv(const BacktestReport& r) {
    std::ostringstream out;
    out << "iteration,date,sigma_bar,tau,picks,votes,final_agent";
    for (const auto& t : r.tickers) out << ",action_" << t;
    out << '\n';
    for (std::size_t it = 0; it < r.decision_log.size(); ++it) {
        for (const auto& d : r.decision_log[it]) {
            out << it << ',' << d.date.str() << ',' << csv::num(d.sigma_bar) << ',' << csv::num(d.tau) << ',';
            for (std::size_t i = 0; i < d.picks.size(); ++i) out << (i ? ";" : "") << d.picks[i];
            out << ',' << d.votes[0] << ';' << d.votes[1] << ',' << d.final_agent;
            for (Eigen::Index k = 0; k < d.ours_action.size(); ++k) out << ',' << d.ours_action[k];
            out << '\n';
        }
    }
    return out.str();
}

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("out: cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("out: failed writing " + path.string());
}
}  // namespace detail

/// Writes metrics.csv, equity.csv, decisions.csv and config.json into
/// `out_dir`, creating it if needed. `extra` entries are merged into the
/// config echo.
inline void write_report(const BacktestReport& r, const std::filesystem::path& out_dir,
                         const nlohmann::json& extra = nlohmann::json::object()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw ConfigError("out: cannot create " + out_dir.string());
    detail::write_file(out_dir / "metrics.csv", metrics_csv(r));
    detail::write_file(out_dir / "equity.csv", equity_csv(r));
    detail::write_file(out_dir / "decisions.csv", decisions_csv(r));
    auto cfg = to_json(r.config);
    cfg.update(extra);
    detail::write_file(out_dir / "config.json", cfg.dump(2) + "\n");
}

inline std::string sweep_csv(const SweepTable& table) {
    std::ostringstream out;
    out << "tau";
    for (const char* strategy : {"ensemble", "agent_a", "agent_b"})
        for (const char* m : kMetricColumns) out << ',' << strategy << '_' << m;
    out << '\n';
    for (const auto& row : table.rows)
        out << csv::num(row.tau) << ',' << metric_cells(row.ensemble) << ',' << metric_cells(row.agent_a) << ','
            << metric_cells(row.agent_b) << '\n';
    return out.str();
}

inline void write_sweep(const SweepTable& table, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    detail::write_file(path, sweep_csv(table));
}

/// Human-readable metrics table in summary-table column order.
inline std::string format_metrics_table(const BacktestReport& r) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-32s %5s %6s %12s %9s %12s %9s\n", "Model", "Group", "tau",
                  "CumReturns", "SR", "Calmar", "MDD");
    out << line;
    auto row = [&](const std::string& label, const std::string& group, const std::string& tau,
                   const metrics::MetricReport& m) {
        std::snprintf(line, sizeof line, "%-32s %5s %6s %12.4f %9.4f %12.4f %9.4f\n", label.c_str(), group.c_str(),
                      tau.c_str(), m.cumulative_return, m.sharpe, m.calmar, -m.max_drawdown);
        out << line;
    };
    row(r.ensemble.label, std::to_string(r.config.classifier_group), csv::num(r.config.tau), r.ensemble.average);
    row(r.agent_a.label, "-", "-", r.agent_a.average);
    row(r.agent_b.label, "-", "-", r.agent_b.average);
    return out.str();
}

}  // namespace holdswitch
