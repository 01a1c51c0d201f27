#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "holdswitch/error.hpp"

namespace holdswitch::classifiers {

using FeatureMatrix = Eigen::MatrixXd;
using LabelVector = std::vector<int>;
/// One row per sample, column k = probability of agent k.
using ProbabilityMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class Family { svm, tree, logreg };
enum class Kernel { rbf, linear, poly, sigmoid };
enum class Criterion { gini, entropy };
enum class Penalty { l1, l2, elasticnet };

struct ClassifierSpec {
    Family family = Family::logreg;
    std::variant<Kernel, Criterion, Penalty> variant = Penalty::l2;

    static ClassifierSpec svm(Kernel k) { return {Family::svm, k}; }
    static ClassifierSpec tree(Criterion c) { return {Family::tree, c}; }
    static ClassifierSpec logreg(Penalty p) { return {Family::logreg, p}; }

    bool valid() const {
        switch (family) {
            case Family::svm: return std::holds_alternative<Kernel>(variant);
            case Family::tree: return std::holds_alternative<Criterion>(variant);
            case Family::logreg: return std::holds_alternative<Penalty>(variant);
        }
        return false;
    }

    Kernel kernel() const { return std::get<Kernel>(variant); }
    Criterion criterion() const { return std::get<Criterion>(variant); }
    Penalty penalty() const { return std::get<Penalty>(variant); }

    std::string name() const {
        switch (family) {
            case Family::svm: {
                static const char* names[] = {"rbf", "linear", "poly", "sigmoid"};
                return std::string("svm/") + names[static_cast<int>(kernel())];
            }
            case Family::tree: return criterion() == Criterion::gini ? "tree/gini" : "tree/entropy";
            case Family::logreg: {
                static const char* names[] = {"l1", "l2", "elasticnet"};
                return std::string("logreg/") + names[static_cast<int>(penalty())];
            }
        }
        return "?";
    }

    bool operator==(const ClassifierSpec&) const = default;
};

/// Hyperparameters of every family; each family reads only its own fields.
struct Hyper {
    // logreg
    double strength = 1.0;  // penalty weight on the mean log-loss
    double l1_ratio = 0.0;
    // svm
    double c = 1.0;
    double gamma = 0.0;  // 0 selects 1 / num_features
    int degree = 3;
    double coef0 = 0.0;
    // tree
    int max_depth = 5;
    int min_leaf = 2;

    bool operator==(const Hyper&) const = default;
};

inline constexpr double kLogregStrengths[] = {0.01, 0.1, 1.0, 10.0};
inline constexpr double kElasticnetMix[] = {0.25, 0.5, 0.75};
inline constexpr double kSvmPenalties[] = {0.1, 1.0, 10.0};
inline constexpr double kRbfGammas[] = {0.1, 1.0};
inline constexpr double kPolyCoef0 = 1.0;
inline constexpr int kTreeMaxDepth = 5;
inline constexpr int kTreeMinLeaf = 2;

/// The nine canonical configurations: four SVM kernels, two tree criteria,
/// three logistic penalties.
inline std::vector<ClassifierSpec> canonical_specs() {
    return {ClassifierSpec::svm(Kernel::rbf),       ClassifierSpec::svm(Kernel::linear),
            ClassifierSpec::svm(Kernel::poly),      ClassifierSpec::svm(Kernel::sigmoid),
            ClassifierSpec::logreg(Penalty::l1),    ClassifierSpec::logreg(Penalty::l2),
            ClassifierSpec::logreg(Penalty::elasticnet), ClassifierSpec::tree(Criterion::gini),
            ClassifierSpec::tree(Criterion::entropy)};
}

/// Candidate hyperparameters searched for a spec, in tie-break order.
inline std::vector<Hyper> hyper_grid(const ClassifierSpec& spec) {
    if (!spec.valid()) throw ClassifierError("variant does not match classifier family");
    std::vector<Hyper> grid;
    switch (spec.family) {
        case Family::logreg:
            for (double s : kLogregStrengths) {
                Hyper h;
                h.strength = s;
                switch (spec.penalty()) {
                    case Penalty::l1: h.l1_ratio = 1.0; grid.push_back(h); break;
                    case Penalty::l2: h.l1_ratio = 0.0; grid.push_back(h); break;
                    case Penalty::elasticnet:
                        for (double m : kElasticnetMix) {
                            h.l1_ratio = m;
                            grid.push_back(h);
                        }
                        break;
                }
            }
            break;
        case Family::svm:
            for (double c : kSvmPenalties) {
                Hyper h;
                h.c = c;
                if (spec.kernel() == Kernel::rbf) {
                    for (double g : kRbfGammas) {
                        h.gamma = g;
                        grid.push_back(h);
                    }
                } else {
                    if (spec.kernel() == Kernel::poly) h.coef0 = kPolyCoef0;
                    grid.push_back(h);
                }
            }
            break;
        case Family::tree: {
            Hyper h;
            h.max_depth = kTreeMaxDepth;
            h.min_leaf = kTreeMinLeaf;
            grid.push_back(h);
            break;
        }
    }
    return grid;
}

}  // namespace holdswitch::classifiers
