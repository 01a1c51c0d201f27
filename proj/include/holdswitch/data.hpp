#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/csv.hpp"
#include "holdswitch/date.hpp"
#include "holdswitch/error.hpp"

namespace holdswitch {

inline constexpr const char* kOhlcvHeader = "date,ticker,open,high,low,close,volume";

struct OhlcvBar {
    Date date;
    std::string ticker;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

/// Inclusive calendar range; either end may be open.
struct DateRange {
    std::optional<Date> start;
    std::optional<Date> end;

    bool contains(const Date& d) const {
        return (!start || *start <= d) && (!end || d <= *end);
    }
};

/// Aligned T x D close-price matrix. Rows are dates (strictly increasing),
/// columns are tickers. Every cell is populated and strictly positive.
class PricePanel {
public:
    PricePanel(std::vector<Date> dates, std::vector<std::string> tickers, Eigen::MatrixXd close)
        : dates_(std::move(dates)), tickers_(std::move(tickers)), close_(std::move(close)) {
        if (static_cast<Eigen::Index>(dates_.size()) != close_.rows() ||
            static_cast<Eigen::Index>(tickers_.size()) != close_.cols())
            throw DataError("panel shape does not match dates/tickers");
        if (tickers_.empty()) throw DataError("panel has no tickers");
        for (std::size_t t = 1; t < dates_.size(); ++t)
            if (!(dates_[t - 1] < dates_[t]))
                throw DataError("panel dates not strictly increasing at " + dates_[t].str());
        if (std::set<std::string>(tickers_.begin(), tickers_.end()).size() != tickers_.size())
            throw DataError("duplicate ticker in panel");
        if (!close_.allFinite() || (close_.size() > 0 && close_.minCoeff() <= 0.0))
            throw DataError("non-positive price in panel");
    }

    std::size_t num_dates() const { return dates_.size(); }
    std::size_t num_tickers() const { return tickers_.size(); }
    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<std::string>& tickers() const { return tickers_; }
    const Eigen::MatrixXd& close() const { return close_; }
    Eigen::VectorXd prices_at(std::size_t t) const { return close_.row(static_cast<Eigen::Index>(t)).transpose(); }

    std::optional<std::size_t> index_of(const Date& d) const {
        auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.end() || *it != d) return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin());
    }

private:
    std::vector<Date> dates_;
    std::vector<std::string> tickers_;
    Eigen::MatrixXd close_;
};

struct TurbulenceSeries {
    std::vector<Date> dates;
    std::vector<double> values;

    std::optional<double> at(const Date& d) const {
        auto it = std::lower_bound(dates.begin(), dates.end(), d);
        if (it == dates.end() || *it != d) return std::nullopt;
        return values[static_cast<std::size_t>(it - dates.begin())];
    }
};

namespace detail {

inline OhlcvBar parse_bar(std::string_view line, std::size_t line_no) {
    auto fields = csv::split(line);
    auto where = " (line " + std::to_string(line_no) + ")";
    if (fields.size() != 7) throw DataError("expected 7 columns" + where);
    OhlcvBar bar;
    auto date = Date::parse(fields[0]);
    if (!date) throw DataError("malformed date '" + std::string(fields[0]) + "'" + where);
    bar.date = *date;
    bar.ticker = std::string(fields[1]);
    if (bar.ticker.empty()) throw DataError("empty ticker" + where);
    double* slots[] = {&bar.open, &bar.high, &bar.low, &bar.close, &bar.volume};
    for (std::size_t k = 0; k < 5; ++k) {
        auto v = csv::to_double(fields[k + 2]);
        if (!v || !std::isfinite(*v)) throw DataError("malformed number" + where);
        *slots[k] = *v;
    }
    if (bar.open <= 0 || bar.high <= 0 || bar.low <= 0 || bar.close <= 0)
        throw DataError("non-positive price" + where);
    if (bar.volume < 0) throw DataError("negative volume" + where);
    if (bar.high < std::max(bar.open, bar.close) || bar.low > std::min(bar.open, bar.close))
        throw DataError("inconsistent high/low" + where);
    return bar;
}

}  // namespace detail

inline std::vector<OhlcvBar> read_ohlcv_csv(const std::string& path) {
    auto lines = csv::read_lines(path);
    if (!lines) throw DataError("cannot open data file: " + path);
    if (lines->empty() || (*lines)[0] != kOhlcvHeader)
        throw DataError("data file header must be exactly: " + std::string(kOhlcvHeader));
    std::vector<OhlcvBar> bars;
    bars.reserve(lines->size() - 1);
    for (std::size_t i = 1; i < lines->size(); ++i) bars.push_back(detail::parse_bar((*lines)[i], i + 1));
    return bars;
}

/// Builds an aligned panel from bars. Only dates on which every requested
/// ticker has a bar survive (inner join). An empty `tickers` list selects every
/// ticker in the input, in sorted order.
inline PricePanel align_bars(const std::vector<OhlcvBar>& bars, std::vector<std::string> tickers,
                             const DateRange& range = {}) {
    if (tickers.empty()) {
        std::set<std::string> all;
        for (const auto& b : bars) all.insert(b.ticker);
        tickers.assign(all.begin(), all.end());
    }
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t d = 0; d < tickers.size(); ++d)
        if (!column.emplace(tickers[d], d).second) throw DataError("duplicate requested ticker " + tickers[d]);

    std::map<Date, std::vector<std::optional<double>>> rows;
    std::vector<bool> seen(tickers.size(), false);
    for (const auto& b : bars) {
        auto it = column.find(b.ticker);
        if (it == column.end()) continue;
        seen[it->second] = true;
        if (!range.contains(b.date)) continue;
        auto& row = rows[b.date];
        row.resize(tickers.size());
        if (row[it->second]) throw DataError("duplicate bar for " + b.ticker + " on " + b.date.str());
        row[it->second] = b.close;
    }
    for (std::size_t d = 0; d < tickers.size(); ++d)
        if (!seen[d]) throw DataError("requested ticker absent from data: " + tickers[d]);

    std::vector<Date> dates;
    std::vector<std::vector<double>> kept;
    for (const auto& [date, row] : rows) {
        if (std::all_of(row.begin(), row.end(), [](const auto& v) { return v.has_value(); })) {
            dates.push_back(date);
            std::vector<double> r;
            for (const auto& v : row) r.push_back(*v);
            kept.push_back(std::move(r));
        }
    }
    if (dates.size() < 2) throw DataError("fewer than 2 dates survive alignment");
    Eigen::MatrixXd close(static_cast<Eigen::Index>(dates.size()), static_cast<Eigen::Index>(tickers.size()));
    for (std::size_t t = 0; t < kept.size(); ++t)
        for (std::size_t d = 0; d < tickers.size(); ++d)
            close(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d)) = kept[t][d];
    return PricePanel(std::move(dates), std::move(tickers), std::move(close));
}

inline PricePanel load_panel(const std::string& path, std::vector<std::string> tickers = {},
                             const DateRange& range = {}) {
    return align_bars(read_ohlcv_csv(path), std::move(tickers), range);
}

/// (T-1) x D simple returns: r[t][d] = close[t+1][d] / close[t][d] - 1.
inline Eigen::MatrixXd daily_returns(const PricePanel& panel) {
    const auto& c = panel.close();
    const auto n = c.rows();
    if (n < 2) throw DataError("need at least 2 dates for returns");
    return (c.bottomRows(n - 1).array() / c.topRows(n - 1).array() - 1.0).matrix();
}

inline constexpr double kCovarianceRidge = 1e-8;

/// Mahalanobis turbulence of each day's return vector against the trailing
/// `window` return rows (sample mean and covariance, ridge-regularised).
/// Return row i is the move into panel date i+1, so the first value belongs to
/// panel date window+1.
inline TurbulenceSeries turbulence_index(const PricePanel& panel, std::size_t window,
                                         double ridge = kCovarianceRidge) {
    const auto dims = panel.num_tickers();
    if (window < dims + 2)
        throw DataError("turbulence window " + std::to_string(window) + " too small for " +
                        std::to_string(dims) + " tickers (need >= D+2)");
    if (panel.num_dates() <= window + 1)
        throw DataError("panel too short for turbulence window " + std::to_string(window));
    const Eigen::MatrixXd r = daily_returns(panel);
    const auto w = static_cast<Eigen::Index>(window);

    TurbulenceSeries out;
    for (Eigen::Index i = w; i < r.rows(); ++i) {
        const auto hist = r.middleRows(i - w, w);
        const Eigen::RowVectorXd mean = hist.colwise().mean();
        const Eigen::MatrixXd centered = hist.rowwise() - mean;
        Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(w - 1);
        cov.diagonal().array() += ridge;
        const Eigen::VectorXd dev = (r.row(i) - mean).transpose();
        const Eigen::VectorXd sol = cov.ldlt().solve(dev);
        double v = dev.dot(sol);
        if (!(v >= 0.0)) v = 0.0;  // rounding on near-singular inputs
        out.dates.push_back(panel.dates()[static_cast<std::size_t>(i + 1)]);
        out.values.push_back(v);
    }
    return out;
}

}  // namespace holdswitch
