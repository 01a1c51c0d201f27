#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "holdswitch/classifiers/logistic.hpp"
#include "holdswitch/classifiers/spec.hpp"
#include "holdswitch/classifiers/svm.hpp"
#include "holdswitch/classifiers/tree.hpp"
#include "holdswitch/error.hpp"

namespace holdswitch::classifiers {

/// A fitted binary classifier of any family behind one predict interface.
class Model {
public:
    using Impl = std::variant<LogisticModel, TreeModel, SvmModel>;

    Model(ClassifierSpec spec, Hyper hyper, Eigen::Index num_features, Impl impl)
        : spec_(std::move(spec)), hyper_(hyper), num_features_(num_features), impl_(std::move(impl)) {}

    ProbabilityMatrix predict_proba(const FeatureMatrix& x) const {
        if (x.cols() != num_features_)
            throw ClassifierError("feature-count mismatch: model expects " + std::to_string(num_features_) + ", got " +
                                  std::to_string(x.cols()));
        return std::visit([&](const auto& m) { return m.predict_proba(x); }, impl_);
    }

    /// Class with the larger probability per row; ties go to class 0.
    LabelVector predict(const FeatureMatrix& x) const {
        const auto p = predict_proba(x);
        LabelVector out(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = p(i, 1) > p(i, 0) ? 1 : 0;
        return out;
    }

    const ClassifierSpec& spec() const { return spec_; }
    const Hyper& hyper() const { return hyper_; }
    Eigen::Index num_features() const { return num_features_; }
    const Impl& impl() const { return impl_; }

private:
    ClassifierSpec spec_;
    Hyper hyper_;
    Eigen::Index num_features_;
    Impl impl_;
};

inline void check_training_set(const FeatureMatrix& x, const LabelVector& y) {
    if (x.rows() == 0) throw ClassifierError("empty training set");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ClassifierError("feature and label counts differ");
    if (!x.allFinite()) throw ClassifierError("non-finite feature value");
    bool has0 = false, has1 = false;
    for (int label : y) {
        if (label != 0 && label != 1) throw ClassifierError("labels must be 0 or 1");
        (label == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw ClassifierError("training set contains a single class");
}

/// Fits `spec` with the given hyperparameters. Expects standardised features.
inline Model train_classifier(const ClassifierSpec& spec, const FeatureMatrix& x, const LabelVector& y,
                              const Hyper& hyper) {
    if (!spec.valid()) throw ClassifierError("variant does not match classifier family");
    check_training_set(x, y);
    switch (spec.family) {
        case Family::logreg: return Model(spec, hyper, x.cols(), fit_logistic(x, y, hyper));
        case Family::tree: return Model(spec, hyper, x.cols(), fit_tree(x, y, spec.criterion(), hyper));
        case Family::svm: return Model(spec, hyper, x.cols(), fit_svm(x, y, spec.kernel(), hyper));
    }
    throw ClassifierError("unknown classifier family");
}

inline ProbabilityMatrix predict_proba(const Model& model, const FeatureMatrix& x) { return model.predict_proba(x); }

}  // namespace holdswitch::classifiers
