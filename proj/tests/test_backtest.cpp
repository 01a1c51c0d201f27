#include <cmath>

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"
#include "holdswitch/backtest.hpp"
#include "holdswitch/report.hpp"
#include "oracles/decision.hpp"

using namespace holdswitch;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

BacktestConfig small_config(int group = 3, std::size_t iterations = 2) {
    BacktestConfig c;
    c.classifier_group = group;
    c.iterations = iterations;
    c.validation_window = 30;
    c.rebalance_window = 40;
    return c;
}

struct Setup {
    PricePanel panel;
    HoldingsTrajectory a, b;
};

Setup setup(std::size_t tickers = 3, std::size_t days = 220, std::uint64_t seed = 42) {
    auto panel = fixture::gbm_panel(seed, tickers, days);
    auto a = buy_and_hold(panel, kDefaultInitialBalance, 0);
    auto b = momentum_agent(panel, std::min<std::size_t>(20, days / 2), kDefaultInitialBalance, 1);
    return {std::move(panel), std::move(a), std::move(b)};
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    for (auto f : csv::split(line)) out.emplace_back(f);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        out.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

}  // namespace

TEST_CASE("classifier groups") {
    using classifiers::ClassifierSpec;
    using classifiers::Criterion;
    CHECK(classifier_group(3) ==
          std::vector<ClassifierSpec>{ClassifierSpec::tree(Criterion::gini), ClassifierSpec::tree(Criterion::entropy)});
    CHECK(classifier_group(5).size() == 9);
    const auto g4 = classifier_group(4);
    REQUIRE(g4.size() == 7);
    for (int i = 0; i < 4; ++i) CHECK(g4[static_cast<std::size_t>(i)].family == classifiers::Family::svm);
    for (int i = 4; i < 7; ++i) CHECK(g4[static_cast<std::size_t>(i)].family == classifiers::Family::logreg);
    CHECK(classifier_group(1).size() == 4);
    CHECK(classifier_group(2).size() == 3);
    CHECK_THROWS_AS(classifier_group(6), ConfigError);
}

TEST_CASE("config validation names the field") {
    BacktestConfig c;
    c.tau = 1.5;
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("tau"));
    c = {};
    c.iterations = 0;
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("iterations"));
    c = {};
    c.rebalance_window = 0;
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("rebalance_window"));
    c = {};
    c.cost_rate = 1.0;
    CHECK_THROWS_WITH(c.validate(), ContainsSubstring("cost_rate"));
    CHECK_NOTHROW(BacktestConfig{}.validate());
}

TEST_CASE("end-to-end selection: every executed target is one agent's row") {
    const auto s = setup(2);
    auto cfg = small_config(3, 1);
    const auto r = run_backtest(cfg, s.panel, s.a, s.b, 1);
    REQUIRE(r.decision_log.size() == 1);
    const BacktestPlan plan(cfg, s.panel, s.a, s.b);
    REQUIRE(r.decision_log[0].size() == plan.decision_days());
    for (const auto& d : r.decision_log[0]) {
        const auto t = *s.panel.index_of(d.date);
        REQUIRE((d.final_holdings == s.a.row(t) || d.final_holdings == s.b.row(t)));
        REQUIRE(d.final_holdings == (d.final_agent == 0 ? s.a.row(t) : s.b.row(t)));
        REQUIRE(d.votes[0] + d.votes[1] == 2);
    }
}

TEST_CASE("report shape and averaging") {
    const auto s = setup();
    const auto cfg = small_config(3, 3);
    const auto r = run_backtest(cfg, s.panel, s.a, s.b, 2);
    const auto trading_days = s.panel.num_dates() - cfg.validation_window;
    for (const auto* strat : {&r.ensemble, &r.agent_a, &r.agent_b}) {
        REQUIRE(strat->curves.size() == cfg.iterations);
        REQUIRE(strat->per_iteration.size() == cfg.iterations);
        for (const auto& c : strat->curves) {
            CHECK(c.values.size() == trading_days);
            CHECK(c.dates.front() == s.panel.dates()[cfg.validation_window]);
            CHECK(c.dates.back() == s.panel.dates().back());
        }
        double mean_sharpe = 0.0, mean_cr = 0.0;
        for (const auto& m : strat->per_iteration) {
            mean_sharpe += m.sharpe / static_cast<double>(cfg.iterations);
            mean_cr += m.cumulative_return / static_cast<double>(cfg.iterations);
        }
        CHECK_THAT(strat->average.sharpe, WithinAbs(mean_sharpe, 1e-12));
        CHECK_THAT(strat->average.cumulative_return, WithinAbs(mean_cr, 1e-12));
    }
    CHECK(r.ensemble.label == "buy_and_hold&momentum ensemble");
}

TEST_CASE("classifiers are refit on the rebalance cadence") {
    const auto s = setup();
    for (std::size_t window : {7u, 40u, 63u, 500u}) {
        auto cfg = small_config(3, 1);
        cfg.rebalance_window = window;
        const BacktestPlan plan(cfg, s.panel, s.a, s.b);
        const auto days = s.panel.num_dates() - 1 - cfg.validation_window;
        const auto scores = plan.score_iteration(0);
        CHECK(scores.refits == (days + window - 1) / window);
        CHECK(scores.refits == plan.expected_refits());
        for (const auto& day : scores.daily) CHECK(day.size() == 2);
    }
}

TEST_CASE("consensus: identical agents make switching a no-op") {
    const auto s = setup();
    const auto cfg = small_config(3, 1);
    const auto r = run_backtest(cfg, s.panel, s.b, s.b, 1);
    const auto& ens = r.ensemble.curves[0].values;
    const auto& base = r.agent_a.curves[0].values;
    REQUIRE(ens.size() == base.size());
    for (std::size_t t = 0; t < ens.size(); ++t) REQUIRE_THAT(ens[t], WithinRel(base[t], 1e-9));
    for (const auto& d : r.decision_log[0]) REQUIRE(d.sigma_bar == 0.0);
}

TEST_CASE("an ensemble that always backs agent a reproduces agent a at zero cost") {
    const auto s = setup();
    auto cash = s.a;
    cash.holdings.setZero();
    cash.agent_id = 1;
    cash.label = "cash";
    auto cfg = small_config(3, 1);
    cfg.cost_rate = 0.0;
    for (double tau : {0.0, 0.5, 1.0}) {
        cfg.tau = tau;
        const auto r = run_backtest(cfg, s.panel, s.a, cash, 1);
        for (const auto& d : r.decision_log[0]) REQUIRE(d.final_agent == 0);
        const auto& ens = r.ensemble.curves[0].values;
        const auto& base = r.agent_a.curves[0].values;
        for (std::size_t t = 0; t < ens.size(); ++t) REQUIRE_THAT(ens[t], WithinRel(base[t], 1e-9));
    }
}

TEST_CASE("reruns are byte-identical and independent of thread count") {
    const auto s = setup();
    const auto cfg = small_config(5, 2);
    const auto one = run_backtest(cfg, s.panel, s.a, s.b, 1);
    const auto many = run_backtest(cfg, s.panel, s.a, s.b, 3);
    CHECK(metrics_csv(one) == metrics_csv(many));
    CHECK(equity_csv(one) == equity_csv(many));
    CHECK(decisions_csv(one) == decisions_csv(many));

    const auto d1 = fixture::fresh_dir("bt_rerun1"), d2 = fixture::fresh_dir("bt_rerun2");
    write_report(one, d1);
    write_report(run_backtest(cfg, s.panel, s.a, s.b, 2), d2);
    for (const char* f : {"metrics.csv", "equity.csv", "decisions.csv", "config.json"})
        CHECK(fixture::slurp(d1 / f) == fixture::slurp(d2 / f));
}

TEST_CASE("report files") {
    SECTION("an empty decision log gives a header-only decisions.csv") {
        BacktestReport r;
        r.tickers = {"A", "B"};
        CHECK(decisions_csv(r) == "iteration,date,sigma_bar,tau,picks,votes,final_agent,action_A,action_B\n");
    }
    SECTION("a three-day run gives three equity rows") {
        const auto s = setup(2, 8);
        auto cfg = small_config(3, 1);
        cfg.validation_window = 5;
        cfg.rebalance_window = 63;
        auto b = momentum_agent(s.panel, 2, kDefaultInitialBalance, 1);
        const auto r = run_backtest(cfg, s.panel, s.a, b, 1);
        const auto rows = lines_of(equity_csv(r));
        CHECK(rows.size() == 4);
        CHECK(rows[0] == "date,ensemble,agent_a,agent_b");
        CHECK(lines_of(decisions_csv(r)).size() == 3);
    }
    SECTION("metrics rows follow the summary-table schema") {
        const auto s = setup();
        auto cfg = small_config(1, 1);
        cfg.tau = 0.24;
        const auto r = run_backtest(cfg, s.panel, s.a, s.b, 1);
        const auto rows = lines_of(metrics_csv(r));
        REQUIRE(rows.size() == 4);
        CHECK(rows[0] == kMetricsHeader);
        const auto first = split_line(rows[1]);
        REQUIRE(first.size() == 7);
        CHECK(first[0] == "buy_and_hold&momentum ensemble");
        CHECK(first[1] == "1");
        CHECK(first[2] == "0.24");
        CHECK(std::stod(first[6]) <= 0.0);
        CHECK_THAT(std::stod(first[3]), WithinRel(r.ensemble.average.cumulative_return, 1e-9));
        const auto base = split_line(rows[2]);
        CHECK(base[0] == "buy_and_hold");
        CHECK(base[1] == "-");
        CHECK(base[2] == "-");
    }
    SECTION("config.json echoes the effective configuration") {
        const auto s = setup();
        auto cfg = small_config(3, 1);
        cfg.tau = 0.3;
        cfg.seed = 9;
        const auto r = run_backtest(cfg, s.panel, s.a, s.b, 1);
        const auto dir = fixture::fresh_dir("bt_config");
        write_report(r, dir, {{"data", "x.csv"}});
        const auto j = nlohmann::json::parse(fixture::slurp(dir / "config.json"));
        CHECK(j["tau"] == 0.3);
        CHECK(j["seed"] == 9);
        CHECK(j["group"] == 3);
        CHECK(j["data"] == "x.csv");
    }
}

TEST_CASE("tau sweep") {
    const auto s = setup();
    const auto cfg = small_config(1, 2);

    SECTION("single extreme") {
        const auto t = tau_sweep(cfg, {0.0}, s.panel, s.a, s.b, 1);
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows[0].tau == 0.0);
    }
    SECTION("extremes differ and each row matches a standalone backtest") {
        const auto t = tau_sweep(cfg, {0.0, 1.0, 0.0}, s.panel, s.a, s.b, 2);
        REQUIRE(t.rows.size() == 2);
        const auto& lo = t.rows[0].ensemble;
        const auto& hi = t.rows[1].ensemble;
        CHECK((lo.cumulative_return != hi.cumulative_return || lo.sharpe != hi.sharpe));
        for (const auto& row : t.rows) {
            auto c = cfg;
            c.tau = row.tau;
            const auto r = run_backtest(c, s.panel, s.a, s.b, 1);
            CHECK(r.ensemble.average.cumulative_return == row.ensemble.cumulative_return);
            CHECK(r.agent_a.average.sharpe == row.agent_a.sharpe);
        }
    }
    SECTION("extreme rows follow the argmin and argmax majorities") {
        const BacktestPlan plan(cfg, s.panel, s.a, s.b);
        const auto scores = plan.score_iteration(0);
        for (double tau : {0.0, std::nextafter(1.0, 2.0)}) {
            const auto run = plan.simulate(tau, &scores);
            for (std::size_t d = 0; d < run.decisions.size(); ++d) {
                std::vector<oracle::Prob2x2> p;
                for (const auto& m : scores.daily[d]) p.push_back({{{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}});
                REQUIRE(run.decisions[d].final_agent == oracle::majority_extreme(p, {0, 1}, tau > 0.5));
            }
        }
    }
    SECTION("bad grids") {
        CHECK_THROWS_AS(tau_sweep(cfg, {}, s.panel, s.a, s.b, 1), ConfigError);
        CHECK_THROWS_AS(tau_sweep(cfg, {0.2, 1.2}, s.panel, s.a, s.b, 1), ConfigError);
    }
}

TEST_CASE("tau grid deduplication keeps first occurrences") {
    std::vector<double> g{0.5, 0.1, 0.5, 0.1, 0.9};
    CHECK(dedupe_tau_grid(g) == 2);
    CHECK(g == std::vector<double>{0.5, 0.1, 0.9});
}

TEST_CASE("backtest preconditions") {
    const auto s = setup(2, 40);
    auto cfg = small_config(3, 1);
    cfg.validation_window = 39;
    CHECK_THROWS_AS(BacktestPlan(cfg, s.panel, s.a, s.a), ConfigError);
    const auto other = fixture::gbm_panel(1, 2, 30);
    const auto misaligned = buy_and_hold(other, 1e6);
    CHECK_THROWS_AS(BacktestPlan(small_config(), s.panel, s.a, misaligned), ConfigError);
}

TEST_CASE("turbulence halts the ensemble when the threshold is tiny") {
    const auto s = setup(3, 300);
    auto cfg = small_config(3, 1);
    cfg.turbulence_window = 20;
    cfg.turbulence_threshold = 0.0;
    const auto r = run_backtest(cfg, s.panel, s.a, s.b, 1);
    // Liquidated every day once the index exists: the curve is flat at the end.
    const auto& v = r.agent_a.curves[0].values;
    CHECK(v[v.size() - 1] == v[v.size() - 2]);
}
