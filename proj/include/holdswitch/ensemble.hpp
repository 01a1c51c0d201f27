#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/classifiers/spec.hpp"
#include "holdswitch/date.hpp"
#include "holdswitch/error.hpp"
#include "holdswitch/market_env.hpp"

// Variance-gated switching between two agents' holdings.
//
// Each classifier scores how confidently it attributes each agent's current
// holdings to the agent that produced them (the candidate matrix). When the
// agents broadly agree (low normalised holdings dispersion) every classifier
// backs its most confident agent; when they disagree it backs its least
// confident one. A majority vote over classifiers picks the agent whose
// holdings the portfolio moves to.

namespace holdswitch {

inline constexpr double kDefaultEpsilon = 1e-8;
inline constexpr int kNumAgents = 2;
// Column means closer than this count as equal in the vote tie-break.
inline constexpr double kConfidenceTieTolerance = 1e-12;

using AgentHoldings = std::array<Holdings, kNumAgents>;

/// C x 2: entry (i, j) is classifier i's probability that agent j's holdings
/// belong to agent j.
class CandidateMatrix {
public:
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, kNumAgents>;

    explicit CandidateMatrix(Matrix q) : q_(std::move(q)) {
        if (q_.rows() < 1) throw EnsembleError("candidate matrix needs at least one classifier");
        if (!q_.allFinite() || q_.minCoeff() < 0.0 || q_.maxCoeff() > 1.0)
            throw EnsembleError("candidate matrix entries must lie in [0, 1]");
    }

    Eigen::Index classifiers() const { return q_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return q_(i, j); }
    const Matrix& matrix() const { return q_; }
    Eigen::Matrix<double, 1, kNumAgents> column_means() const { return q_.colwise().mean(); }

private:
    Matrix q_;
};

struct DispersionStats {
    Eigen::VectorXd mean;        // mu_d, shares
    Eigen::VectorXd per_dim_std; // sigma(d), shares
    Eigen::VectorXd normalized;  // min-max scaled sigma, in [0, 1]
    double mean_normalized = 0.0;
    double epsilon = kDefaultEpsilon;
};

struct VoteResult {
    std::array<int, kNumAgents> votes{};
    int winner = 0;
};

struct DecisionRecord {
    Date date;
    double sigma_bar = 0.0;
    double tau = 0.0;
    std::vector<int> picks;
    std::array<int, kNumAgents> votes{};
    int final_agent = 0;
    Holdings final_holdings;
    Holdings ours_action;
};

/// Q(i, j) = P_i(j, k_j).
inline CandidateMatrix build_candidate_matrix(const std::vector<classifiers::ProbabilityMatrix>& probs,
                                              const std::array<int, kNumAgents>& true_labels) {
    if (probs.empty()) throw EnsembleError("no classifier outputs");
    for (int k : true_labels)
        if (k < 0 || k >= kNumAgents) throw EnsembleError("true agent index out of range");
    CandidateMatrix::Matrix q(static_cast<Eigen::Index>(probs.size()), kNumAgents);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i].rows() != kNumAgents)
            throw EnsembleError("classifier " + std::to_string(i) + " must score exactly one row per agent");
        for (Eigen::Index j = 0; j < kNumAgents; ++j)
            q(static_cast<Eigen::Index>(i), j) = probs[i](j, true_labels[static_cast<std::size_t>(j)]);
    }
    return CandidateMatrix(std::move(q));
}

/// Per-ticker spread of the two agents' holdings, min-max normalised across
/// tickers and averaged into sigma_bar. With two agents the population
/// standard deviation reduces to |h_0 - h_1| / 2.
inline DispersionStats dispersion(const AgentHoldings& h, double epsilon = kDefaultEpsilon) {
    const auto dims = h[0].size();
    if (dims < 1 || h[1].size() != dims) throw EnsembleError("agent holdings must share a non-zero length");
    const Eigen::VectorXd a = h[0].cast<double>();
    const Eigen::VectorXd b = h[1].cast<double>();

    DispersionStats s;
    s.epsilon = epsilon;
    s.mean = 0.5 * (a + b);
    s.per_dim_std = 0.5 * (a - b).cwiseAbs();
    const double lo = s.per_dim_std.minCoeff();
    const double hi = s.per_dim_std.maxCoeff();
    s.normalized = (s.per_dim_std.array() - lo) / (hi - lo + epsilon);
    s.mean_normalized = s.normalized.mean();
    return s;
}

/// Low dispersion (sigma_bar < tau): each classifier picks its most confident
/// agent; otherwise its least confident. Ties go to agent 0.
inline std::vector<int> select_per_classifier(const CandidateMatrix& q, double sigma_bar, double tau) {
    if (std::isnan(tau) || std::isnan(sigma_bar)) throw EnsembleError("tau and sigma_bar must be numbers");
    const bool low_variance = sigma_bar < tau;
    std::vector<int> picks(static_cast<std::size_t>(q.classifiers()));
    for (Eigen::Index i = 0; i < q.classifiers(); ++i) {
        const double q0 = q(i, 0), q1 = q(i, 1);
        picks[static_cast<std::size_t>(i)] = low_variance ? (q1 > q0 ? 1 : 0) : (q1 < q0 ? 1 : 0);
    }
    return picks;
}

/// Majority over picks. A tied count goes to the agent with the higher mean
/// confidence in Q, then to agent 0. Means are summed in row order and
/// compared with a small tolerance so equal sums in a different order tie.
inline VoteResult vote(const std::vector<int>& picks, const CandidateMatrix& q) {
    if (picks.empty()) throw EnsembleError("cannot vote with no classifiers");
    VoteResult r;
    for (int p : picks) {
        if (p < 0 || p >= kNumAgents) throw EnsembleError("pick out of range");
        ++r.votes[static_cast<std::size_t>(p)];
    }
    if (r.votes[1] != r.votes[0]) {
        r.winner = r.votes[1] > r.votes[0] ? 1 : 0;
    } else {
        double m0 = 0.0, m1 = 0.0;
        for (Eigen::Index i = 0; i < q.classifiers(); ++i) {
            m0 += q(i, 0);
            m1 += q(i, 1);
        }
        const auto c = static_cast<double>(q.classifiers());
        r.winner = m1 / c > m0 / c + kConfidenceTieTolerance ? 1 : 0;
    }
    return r;
}

/// Share deltas moving `current` to `target`.
inline Holdings ours_action(const Holdings& current, const Holdings& target) {
    if (current.size() != target.size()) throw EnsembleError("holdings length mismatch");
    return target - current;
}

/// The full decision block for one day.
inline DecisionRecord decide(const AgentHoldings& h, const std::vector<classifiers::ProbabilityMatrix>& probs,
                             const std::array<int, kNumAgents>& true_labels, double tau, const Holdings& current,
                             double epsilon = kDefaultEpsilon, Date date = {}) {
    const auto q = build_candidate_matrix(probs, true_labels);
    const auto stats = dispersion(h, epsilon);
    DecisionRecord rec;
    rec.date = date;
    rec.sigma_bar = stats.mean_normalized;
    rec.tau = tau;
    rec.picks = select_per_classifier(q, rec.sigma_bar, tau);
    const auto v = vote(rec.picks, q);
    rec.votes = v.votes;
    rec.final_agent = v.winner;
    rec.final_holdings = h[static_cast<std::size_t>(v.winner)];
    rec.ours_action = ours_action(current, rec.final_holdings);
    return rec;
}

}  // namespace holdswitch
