#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/classifiers.hpp"
#include "holdswitch/data.hpp"
#include "holdswitch/ensemble.hpp"
#include "holdswitch/random.hpp"
#include "holdswitch/synth.hpp"
#include "oracles/decision.hpp"

namespace fixture {

namespace hs = holdswitch;

inline constexpr std::uint64_t kSeparableSeed = 20240601;

/// Two classes in the plane split by x + y = 0 with a gap of 0.4 either side,
/// 50 points each, standardised. Row order alternates classes.
inline std::pair<hs::classifiers::FeatureMatrix, hs::classifiers::LabelVector> separable() {
    std::mt19937_64 rng(kSeparableSeed);
    hs::classifiers::FeatureMatrix x(100, 2);
    hs::classifiers::LabelVector y(100);
    for (int i = 0; i < 100; ++i) {
        const int cls = i % 2;
        double a = 0.0, b = 0.0;
        do {
            a = 2.0 * hs::unit_uniform(rng) - 1.0;
            b = 2.0 * hs::unit_uniform(rng) - 1.0;
        } while (cls == 1 ? a + b < 0.4 : a + b > -0.4);
        x(i, 0) = a;
        x(i, 1) = b;
        y[static_cast<std::size_t>(i)] = cls;
    }
    return {hs::classifiers::standardize(x).second, y};
}

inline hs::PricePanel panel(const Eigen::MatrixXd& close, std::vector<std::string> tickers = {}) {
    if (tickers.empty())
        for (Eigen::Index d = 0; d < close.cols(); ++d) tickers.push_back(hs::synth::ticker_name(static_cast<std::size_t>(d)));
    return hs::PricePanel(hs::synth::business_days(hs::Date(2021, 1, 4), static_cast<std::size_t>(close.rows())),
                          std::move(tickers), close);
}

/// The aligned synthetic GBM panel used as the shared test fixture.
inline hs::PricePanel gbm_panel(std::uint64_t seed = 42, std::size_t tickers = 5, std::size_t days = 750) {
    return hs::align_bars(hs::synth::generate(seed, tickers, days), {}, {});
}

/// Empty directory under the test build tree.
inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::path(TEST_TMP_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// One randomly drawn decision-day instance in both the library's and the
/// oracle's representation.
struct DecisionInstance {
    std::vector<hs::classifiers::ProbabilityMatrix> probs;
    std::vector<oracle::Prob2x2> oracle_probs;
    std::array<int, 2> labels{0, 1};
    std::vector<long long> h0, h1;
    hs::AgentHoldings holdings;
    double tau = 0.0;
};

/// C in 1..9, D in 1..10. Probabilities are sometimes coarse (multiples of
/// 0.1) so ties occur; holdings sometimes share entries or coincide.
inline DecisionInstance random_instance(std::mt19937_64& rng) {
    auto uniform_int = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    DecisionInstance in;
    const int c = uniform_int(1, 9);
    const int d = uniform_int(1, 10);
    const bool coarse = uniform_int(0, 2) == 0;
    for (int i = 0; i < c; ++i) {
        hs::classifiers::ProbabilityMatrix p(2, 2);
        oracle::Prob2x2 op{};
        for (int j = 0; j < 2; ++j) {
            double v = hs::unit_uniform(rng);
            if (coarse) v = static_cast<double>(uniform_int(0, 10)) / 10.0;
            p(j, 0) = v;
            p(j, 1) = 1.0 - v;
            op[static_cast<std::size_t>(j)] = {v, 1.0 - v};
        }
        in.probs.push_back(p);
        in.oracle_probs.push_back(op);
    }
    in.labels = {uniform_int(0, 1), uniform_int(0, 1)};
    const int mode = uniform_int(0, 5);
    for (int k = 0; k < d; ++k) {
        const long long a = uniform_int(0, 200);
        long long b = uniform_int(0, 200);
        if (mode == 0 || (mode == 1 && uniform_int(0, 1) == 0)) b = a;
        in.h0.push_back(a);
        in.h1.push_back(b);
    }
    in.holdings = {hs::Holdings(d), hs::Holdings(d)};
    for (int k = 0; k < d; ++k) {
        in.holdings[0][k] = in.h0[static_cast<std::size_t>(k)];
        in.holdings[1][k] = in.h1[static_cast<std::size_t>(k)];
    }
    in.tau = hs::unit_uniform(rng);
    return in;
}

}  // namespace fixture
