// Command-line driver: synthetic data, single backtests, and tau sweeps.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "holdswitch/agents.hpp"
#include "holdswitch/backtest.hpp"
#include "holdswitch/report.hpp"
#include "holdswitch/settings.hpp"
#include "holdswitch/synth.hpp"

namespace hs = holdswitch;

namespace {

struct FlagSet {
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    unsigned threads = hs::detail::default_threads();

    std::map<std::string, std::string> given() const {
        std::map<std::string, std::string> out;
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) out[key] = values.at(key);
        return out;
    }
};

void add_run_flags(CLI::App& cmd, FlagSet& flags, bool sweep) {
    const hs::RunSettings defaults;
    const auto& c = defaults.config;
    cmd.add_option("--config", flags.config, "Flat key = value config file; flags override its values");
    struct Flag {
        const char* key;
        std::string def;
        const char* help;
    };
    std::vector<Flag> table = {
        {"data", "", "OHLCV CSV (date,ticker,open,high,low,close,volume)"},
        {"agent-a", defaults.agent_a, "Agent 0: buy_and_hold | momentum[:days] | replay:<csv>"},
        {"agent-b", defaults.agent_b, "Agent 1: buy_and_hold | momentum[:days] | replay:<csv>"},
        {"symbols", "all", "Comma-separated tickers to keep"},
        {"start", "first date", "First date kept (YYYY-MM-DD)"},
        {"end", "last date", "Last date kept (YYYY-MM-DD)"},
        {"initial-balance", hs::csv::num(c.initial_balance), "Starting cash"},
        {"cost-rate", hs::csv::num(c.cost_rate), "Transaction cost per unit of traded notional"},
        {"turbulence-threshold", "off", "Liquidate when turbulence exceeds this"},
        {"turbulence-window", std::to_string(c.turbulence_window), "Trailing days for the turbulence covariance"},
        {"tau", hs::csv::num(c.tau), "Variance threshold in [0, 1]"},
        {"group", std::to_string(c.classifier_group), "Classifier group 1..5"},
        {"validation-window", std::to_string(c.validation_window), "Trailing days of classifier training data"},
        {"rebalance-window", std::to_string(c.rebalance_window), "Days between classifier refits"},
        {"iterations", std::to_string(c.iterations), "Backtest iterations averaged"},
        {"seed", std::to_string(c.seed), "Base random seed"},
        {"epsilon", hs::csv::num(c.epsilon), "Guard in the dispersion normalisation"},
        {"risk-free-rate", hs::csv::num(c.risk_free_rate), "Annual risk-free rate"},
        {"folds", std::to_string(c.folds), "Cross-validation folds"},
        {"out", defaults.out, "Output directory"},
    };
    if (sweep) table.push_back({"tau-grid", "", "Comma-separated tau values, e.g. 0,0.25,0.5"});
    for (const auto& f : table) {
        auto* opt = cmd.add_option("--" + std::string(f.key), flags.values[f.key], f.help);
        if (!f.def.empty()) opt->default_str(f.def);
        flags.options[f.key] = opt;
    }
    cmd.add_option("--threads", flags.threads, "Worker threads for iterations")->capture_default_str();
}

hs::RunSettings resolve(const FlagSet& flags) {
    std::map<std::string, std::string> file;
    if (!flags.config.empty()) file = hs::load_config_file(flags.config, hs::run_setting_keys());
    auto settings = hs::resolve_settings(file, flags.given());
    if (settings.data.empty()) throw hs::ConfigError("data: no data file given");
    return settings;
}

struct Inputs {
    hs::PricePanel panel;
    hs::HoldingsTrajectory a;
    hs::HoldingsTrajectory b;
};

Inputs load_inputs(const hs::RunSettings& s) {
    auto panel = hs::load_panel(s.data, s.symbols, s.config.date_range);
    auto a = hs::make_agent(hs::AgentSpec::parse(s.agent_a), panel, s.config.initial_balance, 0);
    auto b = hs::make_agent(hs::AgentSpec::parse(s.agent_b), panel, s.config.initial_balance, 1);
    return {std::move(panel), std::move(a), std::move(b)};
}

int run_backtest(const FlagSet& flags) {
    const auto s = resolve(flags);
    const auto in = load_inputs(s);
    const auto report = hs::run_backtest(s.config, in.panel, in.a, in.b, flags.threads);
    hs::write_report(report, s.out, hs::inputs_json(s));
    std::cout << hs::format_metrics_table(report);
    return 0;
}

int run_sweep(const FlagSet& flags) {
    auto s = resolve(flags);
    if (s.tau_grid.empty()) throw hs::ConfigError("tau-grid: required for sweep");
    if (const auto dropped = hs::dedupe_tau_grid(s.tau_grid))
        std::cerr << "warning: " << dropped << " duplicate tau value(s) collapsed\n";
    const auto in = load_inputs(s);
    const auto table = hs::tau_sweep(s.config, s.tau_grid, in.panel, in.a, in.b, flags.threads);
    const auto path = std::filesystem::path(s.out) / "sweep.csv";
    hs::write_sweep(table, path);
    std::cout << hs::sweep_csv(table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variance-gated ensemble switching between two trading agents"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Write a synthetic GBM OHLCV panel");
    std::uint64_t synth_seed = 42;
    std::size_t synth_tickers = 5, synth_days = 750;
    std::string synth_out = "panel.csv";
    synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
    synth->add_option("--tickers", synth_tickers, "Number of tickers")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--days", synth_days, "Number of business days")->capture_default_str()->check(CLI::Range(2, 1 << 30));
    synth->add_option("--out", synth_out, "Output CSV path")->capture_default_str();

    FlagSet backtest_flags, sweep_flags;
    auto* backtest = app.add_subcommand("backtest", "Run one backtest and write metrics, equity, decisions, config");
    add_run_flags(*backtest, backtest_flags, false);
    auto* sweep = app.add_subcommand("sweep", "Run one backtest per tau and write sweep.csv");
    add_run_flags(*sweep, sweep_flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.get_exit_code() ? e.get_exit_code() : 2;
    }

    try {
        if (*synth) {
            hs::synth::write_ohlcv_csv(hs::synth::generate(synth_seed, synth_tickers, synth_days), synth_out);
            return 0;
        }
        if (*backtest) return run_backtest(backtest_flags);
        if (*sweep) return run_sweep(sweep_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
