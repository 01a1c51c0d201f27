#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/classifiers/spec.hpp"

namespace holdswitch::classifiers {

namespace detail {

inline double impurity(Criterion criterion, double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    const double p0 = n0 / n;
    const double p1 = n1 / n;
    if (criterion == Criterion::gini) return 1.0 - (p0 * p0 + p1 * p1);
    auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
    return term(p0) + term(p1);
}

}  // namespace detail

/// Binary CART classifier. Internal nodes send x[feature] <= threshold left.
struct TreeModel {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double count0 = 0.0;
        double count1 = 0.0;
    };
    std::vector<Node> nodes;

    const Node& leaf_for(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const auto& node = nodes[static_cast<std::size_t>(i)];
            i = x[node.feature] <= node.threshold ? node.left : node.right;
        }
        return nodes[static_cast<std::size_t>(i)];
    }

    ProbabilityMatrix predict_proba(const FeatureMatrix& x) const {
        ProbabilityMatrix p(x.rows(), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const auto& leaf = leaf_for(x.row(i));
            const double n = leaf.count0 + leaf.count1;
            p(i, 0) = leaf.count0 / n;
            p(i, 1) = leaf.count1 / n;
        }
        return p;
    }

    int depth() const {
        std::vector<int> d(nodes.size(), 0);
        int best = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].feature < 0) continue;
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
            best = std::max(best, d[i] + 1);
        }
        return best;
    }
};

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, const LabelVector& y, Criterion criterion, int max_depth, int min_leaf)
        : x_(x), y_(y), criterion_(criterion), max_depth_(max_depth), min_leaf_(std::max(1, min_leaf)) {}

    TreeModel build() {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(x_.rows()));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        grow(all, 0);
        return std::move(model_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    int grow(const std::vector<Eigen::Index>& idx, int depth) {
        TreeModel::Node node;
        for (auto i : idx) (y_[static_cast<std::size_t>(i)] == 1 ? node.count1 : node.count0) += 1.0;
        const int id = static_cast<int>(model_.nodes.size());
        model_.nodes.push_back(node);

        const bool pure = node.count0 == 0.0 || node.count1 == 0.0;
        if (pure || depth >= max_depth_ || idx.size() < 2 * static_cast<std::size_t>(min_leaf_)) return id;
        const Split split = best_split(idx, node.count0, node.count1);
        if (split.feature < 0) return id;

        std::vector<Eigen::Index> left, right;
        for (auto i : idx) (x_(i, split.feature) <= split.threshold ? left : right).push_back(i);
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        auto& stored = model_.nodes[static_cast<std::size_t>(id)];
        stored.feature = split.feature;
        stored.threshold = split.threshold;
        stored.left = l;
        stored.right = r;
        return id;
    }

    // Best impurity decrease over all features and midpoints; first found wins ties.
    Split best_split(const std::vector<Eigen::Index>& idx, double n0, double n1) const {
        const double n = n0 + n1;
        const double parent = detail::impurity(criterion_, n0, n1);
        Split best;
        std::vector<Eigen::Index> order(idx);
        for (Eigen::Index f = 0; f < x_.cols(); ++f) {
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x_(a, f) < x_(b, f); });
            double l0 = 0.0, l1 = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                (y_[static_cast<std::size_t>(order[k])] == 1 ? l1 : l0) += 1.0;
                const double lo = x_(order[k], f);
                const double hi = x_(order[k + 1], f);
                if (!(lo < hi)) continue;
                const auto left_n = static_cast<int>(k + 1);
                const auto right_n = static_cast<int>(order.size()) - left_n;
                if (left_n < min_leaf_ || right_n < min_leaf_) continue;
                const double r0 = n0 - l0, r1 = n1 - l1;
                const double child = ((l0 + l1) / n) * detail::impurity(criterion_, l0, l1) +
                                     ((r0 + r1) / n) * detail::impurity(criterion_, r0, r1);
                const double gain = parent - child;
                if (gain > best.gain + 1e-12) {
                    double mid = 0.5 * (lo + hi);
                    if (!(mid < hi)) mid = lo;
                    best = {static_cast<int>(f), mid, gain};
                }
            }
        }
        return best;
    }

    const FeatureMatrix& x_;
    const LabelVector& y_;
    Criterion criterion_;
    int max_depth_;
    int min_leaf_;
    TreeModel model_;
};

inline TreeModel fit_tree(const FeatureMatrix& x, const LabelVector& y, Criterion criterion, const Hyper& hyper) {
    return TreeBuilder(x, y, criterion, hyper.max_depth, hyper.min_leaf).build();
}

}  // namespace holdswitch::classifiers
