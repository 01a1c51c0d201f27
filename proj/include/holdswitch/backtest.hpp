#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "holdswitch/agents.hpp"
#include "holdswitch/classifiers.hpp"
#include "holdswitch/data.hpp"
#include "holdswitch/ensemble.hpp"
#include "holdswitch/market_env.hpp"
#include "holdswitch/metrics.hpp"
#include "holdswitch/random.hpp"

namespace holdswitch {

struct BacktestConfig {
    DateRange date_range;
    double initial_balance = kDefaultInitialBalance;
    double cost_rate = kDefaultCostRate;
    std::optional<double> turbulence_threshold;
    std::size_t turbulence_window = 252;
    double tau = 0.25;
    int classifier_group = 1;
    std::size_t validation_window = 60;
    std::size_t rebalance_window = 63;
    std::size_t iterations = 30;
    std::uint64_t seed = 42;
    double epsilon = kDefaultEpsilon;
    double risk_free_rate = 0.0;
    std::size_t folds = classifiers::kDefaultFolds;

    EnvConfig env() const { return {cost_rate, turbulence_threshold}; }

    /// Throws ConfigError naming the first invalid field.
    void validate() const {
        auto fail = [](const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); };
        if (!(initial_balance > 0.0)) fail("initial_balance", "must be positive");
        if (!(cost_rate >= 0.0 && cost_rate < 1.0)) fail("cost_rate", "must lie in [0, 1)");
        if (turbulence_threshold && !(*turbulence_threshold >= 0.0)) fail("turbulence_threshold", "must be >= 0");
        if (!(tau >= 0.0 && tau <= 1.0)) fail("tau", "must lie in [0, 1]");
        if (classifier_group < 1 || classifier_group > 5) fail("group", "must be 1..5");
        if (validation_window < 1) fail("validation_window", "must be >= 1");
        if (rebalance_window < 1) fail("rebalance_window", "must be >= 1");
        if (iterations < 1) fail("iterations", "must be >= 1");
        if (!(epsilon > 0.0)) fail("epsilon", "must be positive");
        if (folds < 2) fail("folds", "must be >= 2");
        if (validation_window < folds) fail("validation_window", "must be >= folds");
        if (date_range.start && date_range.end && *date_range.end < *date_range.start)
            fail("end", "precedes start");
    }
};

/// Group 1: SVM kernels. 2: logistic penalties. 3: tree criteria.
/// 4: groups 1 and 2. 5: groups 1, 2 and 3.
inline std::vector<classifiers::ClassifierSpec> classifier_group(int id) {
    using namespace classifiers;
    const std::vector<ClassifierSpec> svm = {ClassifierSpec::svm(Kernel::rbf), ClassifierSpec::svm(Kernel::linear),
                                             ClassifierSpec::svm(Kernel::poly), ClassifierSpec::svm(Kernel::sigmoid)};
    const std::vector<ClassifierSpec> logreg = {ClassifierSpec::logreg(Penalty::l1), ClassifierSpec::logreg(Penalty::l2),
                                                ClassifierSpec::logreg(Penalty::elasticnet)};
    const std::vector<ClassifierSpec> tree = {ClassifierSpec::tree(Criterion::gini),
                                              ClassifierSpec::tree(Criterion::entropy)};
    std::vector<ClassifierSpec> out;
    auto add = [&](const auto& v) { out.insert(out.end(), v.begin(), v.end()); };
    switch (id) {
        case 1: add(svm); break;
        case 2: add(logreg); break;
        case 3: add(tree); break;
        case 4: add(svm); add(logreg); break;
        case 5: add(svm); add(logreg); add(tree); break;
        default: throw ConfigError("group: must be 1..5");
    }
    return out;
}

struct StrategyResult {
    std::string label;
    std::vector<metrics::EquitySeries> curves;       // one per iteration
    std::vector<metrics::MetricReport> per_iteration;
    metrics::MetricReport average;
};

struct BacktestReport {
    BacktestConfig config;
    std::vector<std::string> tickers;
    StrategyResult ensemble;
    StrategyResult agent_a;
    StrategyResult agent_b;
    std::vector<std::vector<DecisionRecord>> decision_log;  // per iteration
    std::vector<std::size_t> refits;                        // per iteration
};

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index writes
/// only its own slot, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    std::exception_ptr failure;
    std::mutex guard;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace detail

/// The tau-independent part of a backtest: validated inputs, refit schedule,
/// and per-iteration classifier scoring. Holds references to the panel and
/// trajectories, which must outlive it.
class BacktestPlan {
public:
    BacktestPlan(BacktestConfig config, const PricePanel& panel, const HoldingsTrajectory& agent_a,
                 const HoldingsTrajectory& agent_b)
        : config_(std::move(config)), panel_(panel), agents_{&agent_a, &agent_b} {
        config_.validate();
        for (const auto* a : agents_) {
            if (a->dates != panel_.dates() || a->holdings.cols() != static_cast<Eigen::Index>(panel_.num_tickers()))
                throw ConfigError("agent trajectory '" + a->label + "' is not aligned to the panel");
        }
        const std::size_t t_count = panel_.num_dates();
        start_ = config_.validation_window;
        if (t_count < start_ + 2)
            throw ConfigError("validation_window: larger than available history (" + std::to_string(t_count) +
                              " dates)");
        if (config_.turbulence_threshold) {
            const auto series = turbulence_index(panel_, config_.turbulence_window);
            turbulence_.resize(t_count);
            for (std::size_t t = 0; t < t_count; ++t) turbulence_[t] = series.at(panel_.dates()[t]);
        } else {
            turbulence_.assign(t_count, std::nullopt);
        }
        specs_ = classifier_group(config_.classifier_group);
        for (std::size_t j = 0; j < 2; ++j)
            features_[j] = classifiers::holdings_features(*agents_[j], panel_, config_.initial_balance);
    }

    const BacktestConfig& config() const { return config_; }
    const PricePanel& panel() const { return panel_; }
    std::size_t trading_start() const { return start_; }
    /// Days on which the ensemble decides and trades.
    std::size_t decision_days() const { return panel_.num_dates() - 1 - start_; }
    std::size_t expected_refits() const {
        return (decision_days() + config_.rebalance_window - 1) / config_.rebalance_window;
    }
    const std::vector<classifiers::ClassifierSpec>& specs() const { return specs_; }

    /// Classifier outputs per decision day for one iteration:
    /// result[d][i] is classifier i's 2 x 2 probability matrix on day start + d.
    struct Scores {
        std::vector<std::vector<classifiers::ProbabilityMatrix>> daily;
        std::size_t refits = 0;
    };

    Scores score_iteration(std::size_t iteration) const {
        using namespace classifiers;
        const auto v = static_cast<Eigen::Index>(config_.validation_window);
        const auto last = panel_.num_dates() - 1;
        Scores out;
        out.daily.resize(decision_days());
        LabelVector y(static_cast<std::size_t>(2 * v));
        std::fill(y.begin() + v, y.end(), 1);

        for (std::size_t refit_day = start_, k = 0; refit_day < last; refit_day += config_.rebalance_window, ++k) {
            const auto t0 = static_cast<Eigen::Index>(refit_day) - v;
            FeatureMatrix raw(2 * v, features_[0].cols());
            raw << features_[0].middleRows(t0, v), features_[1].middleRows(t0, v);
            const auto [scaler, x] = standardize(raw);

            std::vector<Model> models;
            for (std::size_t c = 0; c < specs_.size(); ++c) {
                const auto seed = derive_seed(config_.seed, {iteration, k, c});
                models.push_back(grid_search_cv(specs_[c], x, y, config_.folds, seed).model);
            }
            ++out.refits;

            const auto until = std::min(refit_day + config_.rebalance_window, last);
            for (auto t = refit_day; t < until; ++t) {
                FeatureMatrix today(2, features_[0].cols());
                today.row(0) = features_[0].row(static_cast<Eigen::Index>(t));
                today.row(1) = features_[1].row(static_cast<Eigen::Index>(t));
                const FeatureMatrix scaled = scaler.transform(today);
                auto& day = out.daily[t - start_];
                for (const auto& m : models) day.push_back(m.predict_proba(scaled));
            }
        }
        return out;
    }

    struct Run {
        metrics::EquitySeries equity;
        std::vector<DecisionRecord> decisions;
    };

    /// Replays a strategy through the environment from an all-cash day 0.
    /// Before the trading start the ensemble follows agent 0; from then on it
    /// follows the decision block (or a fixed agent when `scores` is null).
    Run simulate(double tau, const Scores* scores, int fixed_agent = 0) const {
        const auto env = config_.env();
        const auto last = panel_.num_dates() - 1;
        Run run;
        auto state = PortfolioState::all_cash(panel_.prices_at(0), config_.initial_balance, 0);
        for (std::size_t t = 0;; ++t) {
            if (t >= start_) {
                run.equity.dates.push_back(panel_.dates()[t]);
                run.equity.values.push_back(state.value());
            }
            if (t == last) break;
            Holdings target;
            if (scores && t >= start_) {
                const AgentHoldings h{agents_[0]->row(t), agents_[1]->row(t)};
                auto rec = decide(h, scores->daily[t - start_], {0, 1}, tau, state.holdings(), config_.epsilon,
                                  panel_.dates()[t]);
                target = rec.final_holdings;
                run.decisions.push_back(std::move(rec));
            } else {
                target = agents_[static_cast<std::size_t>(scores ? 0 : fixed_agent)]->row(t);
            }
            const auto action = clip_action(state, {target - state.holdings()}, env.cost_rate);
            state = step(state, action, panel_.prices_at(t + 1), env, turbulence_[t]).state;
        }
        return run;
    }

private:
    BacktestConfig config_;
    const PricePanel& panel_;
    std::array<const HoldingsTrajectory*, 2> agents_;
    std::size_t start_ = 0;
    std::vector<std::optional<double>> turbulence_;
    std::vector<classifiers::ClassifierSpec> specs_;
    std::array<classifiers::FeatureMatrix, 2> features_;
};

namespace detail {

inline StrategyResult base_result(const BacktestPlan& plan, int agent, std::string label) {
    StrategyResult r;
    r.label = std::move(label);
    const auto run = plan.simulate(plan.config().tau, nullptr, agent);
    const auto m = metrics::evaluate(run.equity, plan.config().risk_free_rate);
    r.curves.assign(plan.config().iterations, run.equity);
    r.per_iteration.assign(plan.config().iterations, m);
    r.average = metrics::average(r.per_iteration);
    return r;
}

}  // namespace detail

/// Ensemble result for one tau given per-iteration scores.
inline StrategyResult ensemble_result(const BacktestPlan& plan, double tau,
                                      const std::vector<BacktestPlan::Scores>& scores,
                                      std::vector<std::vector<DecisionRecord>>* decisions = nullptr) {
    StrategyResult r;
    r.label = "ensemble";
    for (const auto& s : scores) {
        auto run = plan.simulate(tau, &s);
        r.per_iteration.push_back(metrics::evaluate(run.equity, plan.config().risk_free_rate));
        r.curves.push_back(std::move(run.equity));
        if (decisions) decisions->push_back(std::move(run.decisions));
    }
    r.average = metrics::average(r.per_iteration);
    return r;
}

inline std::vector<BacktestPlan::Scores> score_all(const BacktestPlan& plan, unsigned threads) {
    std::vector<BacktestPlan::Scores> scores(plan.config().iterations);
    detail::parallel_for(scores.size(), threads, [&](std::size_t it) { scores[it] = plan.score_iteration(it); });
    return scores;
}

inline BacktestReport run_backtest(const BacktestConfig& config, const PricePanel& panel,
                                   const HoldingsTrajectory& agent_a, const HoldingsTrajectory& agent_b,
                                   unsigned threads = detail::default_threads()) {
    const BacktestPlan plan(config, panel, agent_a, agent_b);
    const auto scores = score_all(plan, threads);
    BacktestReport report;
    report.config = config;
    report.tickers = panel.tickers();
    report.ensemble = ensemble_result(plan, config.tau, scores, &report.decision_log);
    report.ensemble.label = agent_a.label + "&" + agent_b.label + " ensemble";
    report.agent_a = detail::base_result(plan, 0, agent_a.label);
    report.agent_b = detail::base_result(plan, 1, agent_b.label);
    for (const auto& s : scores) report.refits.push_back(s.refits);
    return report;
}

struct SweepRow {
    double tau = 0.0;
    metrics::MetricReport ensemble;
    metrics::MetricReport agent_a;
    metrics::MetricReport agent_b;
};

struct SweepTable {
    std::string label_a;
    std::string label_b;
    std::vector<SweepRow> rows;
};

/// Drops repeated values, keeping first occurrences in order. Returns the
/// number of values dropped.
inline std::size_t dedupe_tau_grid(std::vector<double>& grid) {
    std::vector<double> out;
    for (double t : grid)
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    const auto dropped = grid.size() - out.size();
    grid = std::move(out);
    return dropped;
}

/// One backtest per tau. Classifier scores are computed once per iteration and
/// shared by every tau, so rows differ only through tau.
inline SweepTable tau_sweep(const BacktestConfig& config, std::vector<double> tau_grid, const PricePanel& panel,
                            const HoldingsTrajectory& agent_a, const HoldingsTrajectory& agent_b,
                            unsigned threads = detail::default_threads()) {
    if (tau_grid.empty()) throw ConfigError("tau-grid: empty");
    for (double t : tau_grid)
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("tau-grid: values must lie in [0, 1]");
    dedupe_tau_grid(tau_grid);
    const BacktestPlan plan(config, panel, agent_a, agent_b);
    const auto scores = score_all(plan, threads);
    const auto base_a = detail::base_result(plan, 0, agent_a.label);
    const auto base_b = detail::base_result(plan, 1, agent_b.label);

    SweepTable table{agent_a.label, agent_b.label, {}};
    table.rows.resize(tau_grid.size());
    detail::parallel_for(tau_grid.size(), threads, [&](std::size_t k) {
        table.rows[k] = {tau_grid[k], ensemble_result(plan, tau_grid[k], scores).average, base_a.average,
                         base_b.average};
    });
    return table;
}

}  // namespace holdswitch
