#include <cmath>
#include <random>
#include <set>

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"

using namespace holdswitch;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string bar(const char* date, const char* ticker, double close) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%s,%.4f,%.4f,%.4f,%.4f,1000\n", date, ticker, close, close, close, close);
    return buf;
}

std::string write_csv(const std::string& name, const std::string& body) {
    const auto dir = fixture::fresh_dir("data_" + name);
    const auto path = dir / "bars.csv";
    fixture::write_text(path, std::string(kOhlcvHeader) + "\n" + body);
    return path.string();
}

// Prices whose returns are `returns`, starting at 100.
PricePanel panel_from_returns(const std::vector<double>& returns) {
    Eigen::MatrixXd close(static_cast<Eigen::Index>(returns.size() + 1), 1);
    close(0, 0) = 100.0;
    for (std::size_t i = 0; i < returns.size(); ++i)
        close(static_cast<Eigen::Index>(i + 1), 0) = close(static_cast<Eigen::Index>(i), 0) * (1.0 + returns[i]);
    return fixture::panel(close);
}

}  // namespace

TEST_CASE("load_panel aligns two tickers over common dates, ascending") {
    const auto path = write_csv("common", bar("2021-01-06", "B", 12) + bar("2021-01-04", "A", 10) +
                                              bar("2021-01-04", "B", 11) + bar("2021-01-05", "A", 10.5) +
                                              bar("2021-01-06", "A", 10.7) + bar("2021-01-05", "B", 11.5));
    const auto p = load_panel(path);
    REQUIRE(p.num_dates() == 3);
    REQUIRE(p.num_tickers() == 2);
    CHECK(p.tickers() == std::vector<std::string>{"A", "B"});
    CHECK(p.dates()[0] == Date(2021, 1, 4));
    CHECK(p.dates()[2] == Date(2021, 1, 6));
    CHECK(p.close()(0, 1) == 11.0);
    CHECK(p.close()(2, 0) == 10.7);
}

TEST_CASE("load_panel drops a date missing for any ticker") {
    const auto path = write_csv("gap", bar("2021-01-04", "A", 10) + bar("2021-01-04", "B", 11) +
                                           bar("2021-01-05", "A", 10.5) + bar("2021-01-06", "A", 10.7) +
                                           bar("2021-01-06", "B", 12));
    const auto p = load_panel(path);
    // Inner-join oracle: dates present for every ticker.
    std::set<Date> a = {Date(2021, 1, 4), Date(2021, 1, 5), Date(2021, 1, 6)};
    std::set<Date> b = {Date(2021, 1, 4), Date(2021, 1, 6)};
    std::vector<Date> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    CHECK(p.dates() == both);
    CHECK(p.close().rows() == 2);
    CHECK(p.close().cols() == 2);
}

TEST_CASE("load_panel rejects bad input") {
    SECTION("zero close") {
        const auto path = write_csv("zero", bar("2021-01-04", "A", 10) + "2021-01-05,A,10,10,0,0,100\n");
        REQUIRE_THROWS_WITH(load_panel(path), ContainsSubstring("non-positive price"));
    }
    SECTION("wrong header") {
        const auto dir = fixture::fresh_dir("data_header");
        fixture::write_text(dir / "x.csv", "date,ticker,close\n2021-01-04,A,1\n");
        REQUIRE_THROWS_AS(load_panel((dir / "x.csv").string()), DataError);
    }
    SECTION("high below close") {
        const auto path = write_csv("hl", "2021-01-04,A,10,9,9,10,100\n");
        REQUIRE_THROWS_WITH(load_panel(path), ContainsSubstring("high/low"));
    }
    SECTION("malformed date") {
        const auto path = write_csv("date", "2021-13-04,A,10,10,10,10,100\n");
        REQUIRE_THROWS_WITH(load_panel(path), ContainsSubstring("malformed date"));
    }
    SECTION("unknown ticker requested") {
        const auto path = write_csv("unk", bar("2021-01-04", "A", 10) + bar("2021-01-05", "A", 11));
        REQUIRE_THROWS_WITH(load_panel(path, {"A", "Z"}), ContainsSubstring("Z"));
    }
    SECTION("duplicate bar") {
        const auto path = write_csv("dup", bar("2021-01-04", "A", 10) + bar("2021-01-04", "A", 11));
        REQUIRE_THROWS_WITH(load_panel(path), ContainsSubstring("duplicate"));
    }
    SECTION("missing file") { REQUIRE_THROWS_AS(load_panel("/nonexistent/bars.csv"), DataError); }
}

TEST_CASE("load_panel honours ticker selection and date range") {
    const auto path = write_csv("range", bar("2021-01-04", "A", 10) + bar("2021-01-04", "B", 11) +
                                             bar("2021-01-05", "A", 10.5) + bar("2021-01-05", "B", 11.5) +
                                             bar("2021-01-06", "A", 10.7) + bar("2021-01-06", "B", 12));
    const auto p = load_panel(path, {"B"}, DateRange{Date(2021, 1, 5), std::nullopt});
    CHECK(p.tickers() == std::vector<std::string>{"B"});
    CHECK(p.num_dates() == 2);
    CHECK(p.dates().front() == Date(2021, 1, 5));
}

TEST_CASE("PricePanel invariants hold on the synthetic fixture") {
    const auto p = fixture::gbm_panel();
    CHECK(p.num_dates() == 750);
    CHECK(p.num_tickers() == 5);
    CHECK(p.close().minCoeff() > 0.0);
    CHECK(p.close().allFinite());
    for (std::size_t t = 1; t < p.num_dates(); ++t) CHECK(p.dates()[t - 1] < p.dates()[t]);
}

TEST_CASE("daily_returns examples") {
    auto one = [](std::vector<double> prices) {
        Eigen::MatrixXd c(static_cast<Eigen::Index>(prices.size()), 1);
        for (std::size_t i = 0; i < prices.size(); ++i) c(static_cast<Eigen::Index>(i), 0) = prices[i];
        return daily_returns(fixture::panel(c));
    };
    CHECK_THAT(one({100, 110})(0, 0), WithinAbs(0.10, 1e-15));
    const auto flat = one({100, 100, 100});
    CHECK(flat(0, 0) == 0.0);
    CHECK(flat(1, 0) == 0.0);
    const auto r = one({100, 90, 99});
    CHECK_THAT(r(0, 0), WithinAbs(-0.10, 1e-15));
    CHECK_THAT(r(1, 0), WithinAbs(0.10, 1e-15));
}

TEST_CASE("returns reconstruct the panel from its first row") {
    const auto p = fixture::gbm_panel(7, 4, 300);
    const auto r = daily_returns(p);
    Eigen::RowVectorXd price = p.close().row(0);
    for (Eigen::Index t = 0; t < r.rows(); ++t) {
        price = price.array() * (1.0 + r.row(t).array());
        for (Eigen::Index d = 0; d < price.size(); ++d)
            REQUIRE_THAT(price[d], WithinRel(p.close()(t + 1, d), 1e-12));
    }
}

TEST_CASE("turbulence is zero when today's return equals a constant history") {
    const auto p = panel_from_returns(std::vector<double>(12, 0.01));
    const auto s = turbulence_index(p, 5);
    REQUIRE_FALSE(s.values.empty());
    for (double v : s.values) CHECK_THAT(v, WithinAbs(0.0, 1e-9));
}

TEST_CASE("turbulence is the squared z-score for one ticker") {
    // Alternating +-a with zero mean; a chosen so the sample variance is 1e-4.
    const std::size_t window = 20;
    const double a = 0.01 * std::sqrt(static_cast<double>(window - 1) / static_cast<double>(window));
    std::vector<double> returns;
    for (std::size_t i = 0; i < window; ++i) returns.push_back(i % 2 ? -a : a);
    returns.push_back(0.02);
    const auto p = panel_from_returns(returns);

    const auto exact = turbulence_index(p, window, 0.0);
    REQUIRE(exact.values.size() == 1);
    CHECK_THAT(exact.values[0], WithinRel(4.0, 1e-9));
    CHECK(exact.dates[0] == p.dates().back());

    const auto ridged = turbulence_index(p, window);
    CHECK_THAT(ridged.values[0], WithinRel(0.0004 / (1e-4 + kCovarianceRidge), 1e-9));
    CHECK_THAT(ridged.values[0], WithinAbs(4.0, 1e-3));
}

TEST_CASE("turbulence of a constant panel is zero and finite under the ridge") {
    const auto p = fixture::panel(Eigen::MatrixXd::Constant(30, 3, 50.0));
    const auto s = turbulence_index(p, 10);
    for (double v : s.values) {
        CHECK(std::isfinite(v));
        CHECK(v == 0.0);
    }
}

TEST_CASE("turbulence series shape, non-negativity and preconditions") {
    const auto p = fixture::gbm_panel(11, 4, 200);
    const std::size_t window = 60;
    const auto s = turbulence_index(p, window);
    CHECK(s.values.size() == p.num_dates() - 1 - window);
    CHECK(s.dates.front() == p.dates()[window + 1]);
    for (double v : s.values) CHECK(v >= 0.0);
    CHECK_THROWS_AS(turbulence_index(p, 5), DataError);  // window < D + 2
    CHECK_THROWS_AS(turbulence_index(fixture::gbm_panel(11, 2, 30), 40), DataError);
}

TEST_CASE("turbulence is invariant to ticker order") {
    const auto p = fixture::gbm_panel(3, 4, 150);
    Eigen::MatrixXd shuffled(p.close().rows(), 4);
    const int perm[] = {2, 0, 3, 1};
    for (int d = 0; d < 4; ++d) shuffled.col(d) = p.close().col(perm[d]);
    const auto a = turbulence_index(p, 30);
    const auto b = turbulence_index(fixture::panel(shuffled), 30);
    for (std::size_t i = 0; i < a.values.size(); ++i) REQUIRE_THAT(b.values[i], WithinRel(a.values[i], 1e-8));
}

TEST_CASE("Date parsing") {
    CHECK(Date::parse("2020-02-29").has_value());
    CHECK_FALSE(Date::parse("2021-02-29").has_value());
    CHECK_FALSE(Date::parse("2021-1-04").has_value());
    CHECK(Date::parse("2021-01-04")->str() == "2021-01-04");
    CHECK(Date(2021, 12, 31).next_day() == Date(2022, 1, 1));
}
