#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "holdswitch/classifiers/model.hpp"
#include "holdswitch/random.hpp"

namespace holdswitch::classifiers {

inline constexpr std::size_t kDefaultFolds = 5;

/// Stratified fold id per sample: each class is shuffled with `seed` and dealt
/// round-robin over the folds.
inline std::vector<std::size_t> stratified_folds(const LabelVector& y, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ClassifierError("need at least 2 folds");
    std::vector<std::size_t> assignment(y.size(), 0);
    std::mt19937_64 rng(seed);
    for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) members.push_back(i);
        if (members.size() < folds)
            throw ClassifierError("too few samples of class " + std::to_string(cls) + " for " + std::to_string(folds) +
                                  "-fold stratification");
        portable_shuffle(members, rng);
        for (std::size_t k = 0; k < members.size(); ++k) assignment[members[k]] = k % folds;
    }
    return assignment;
}

inline double accuracy(const Model& model, const FeatureMatrix& x, const LabelVector& y) {
    const auto pred = model.predict(x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i];
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

struct GridSearchResult {
    Model model;
    Hyper best;
    double best_score = 0.0;
    std::vector<double> scores;  // mean fold accuracy per grid point
};

/// Mean k-fold accuracy of one hyperparameter setting under a fixed fold
/// assignment.
inline double cross_val_accuracy(const ClassifierSpec& spec, const FeatureMatrix& x, const LabelVector& y,
                                 const Hyper& hyper, const std::vector<std::size_t>& fold_of, std::size_t folds) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
        FeatureMatrix xtr = x(train, Eigen::all), xte = x(test, Eigen::all);
        LabelVector ytr, yte;
        for (auto i : train) ytr.push_back(y[static_cast<std::size_t>(i)]);
        for (auto i : test) yte.push_back(y[static_cast<std::size_t>(i)]);
        total += accuracy(train_classifier(spec, xtr, ytr, hyper), xte, yte);
    }
    return total / static_cast<double>(folds);
}

/// Scores every point of `grid` by stratified k-fold accuracy, keeps the
/// first best, and refits it on all samples.
inline GridSearchResult grid_search_cv(const ClassifierSpec& spec, const FeatureMatrix& x, const LabelVector& y,
                                       const std::vector<Hyper>& grid, std::size_t folds, std::uint64_t seed) {
    check_training_set(x, y);
    if (grid.empty()) throw ClassifierError("empty hyperparameter grid");
    if (static_cast<std::size_t>(x.rows()) < folds) throw ClassifierError("fewer samples than folds");
    const auto fold_of = stratified_folds(y, folds, seed);

    std::vector<double> scores;
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        scores.push_back(cross_val_accuracy(spec, x, y, grid[g], fold_of, folds));
        if (scores[g] > scores[best]) best = g;
    }
    return {train_classifier(spec, x, y, grid[best]), grid[best], scores[best], std::move(scores)};
}

inline GridSearchResult grid_search_cv(const ClassifierSpec& spec, const FeatureMatrix& x, const LabelVector& y,
                                       std::size_t folds = kDefaultFolds, std::uint64_t seed = 0) {
    return grid_search_cv(spec, x, y, hyper_grid(spec), folds, seed);
}

}  // namespace holdswitch::classifiers
