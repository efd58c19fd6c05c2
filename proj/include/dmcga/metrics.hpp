#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dmcga/data.hpp"
#include "dmcga/errors.hpp"
#include "dmcga/tree.hpp"

namespace dmcga {

/// Class 1 is the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }

    void add(ClassId truth, ClassId predicted) noexcept {
        if (truth == 1) (predicted == 1 ? tp : fn) += 1;
        else (predicted == 1 ? fp : tn) += 1;
    }
};

struct MetricsReport {
    double overall_accuracy = 0.0;
    double balanced_accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f_score = 0.0;
    double mcc = 0.0;

    template <class F>
    static void for_each_field(F&& f) {
        f("overall_accuracy", &MetricsReport::overall_accuracy);
        f("balanced_accuracy", &MetricsReport::balanced_accuracy);
        f("precision", &MetricsReport::precision);
        f("recall", &MetricsReport::recall);
        f("specificity", &MetricsReport::specificity);
        f("f_score", &MetricsReport::f_score);
        f("mcc", &MetricsReport::mcc);
    }
};

namespace detail {
inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
}  // namespace detail

/// Confusion-matrix summaries. Any 0/0 ratio is 0, as is MCC whenever a
/// factor under its square root vanishes.
inline MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw ArgumentError("confusion matrix is empty");
    const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
    const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
    MetricsReport r;
    r.overall_accuracy = (tp + tn) / (tp + tn + fp + fn);
    r.recall = detail::ratio(tp, tp + fn);
    r.specificity = detail::ratio(tn, tn + fp);
    r.balanced_accuracy = (r.recall + r.specificity) / 2.0;
    r.precision = detail::ratio(tp, tp + fp);
    r.f_score = detail::ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    r.mcc = den == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
    return r;
}

/// Field-wise arithmetic mean, accumulated in the order given.
inline MetricsReport mean_report(std::span<const MetricsReport> reports) {
    MetricsReport mean;
    if (reports.empty()) return mean;
    MetricsReport::for_each_field([&](const char*, double MetricsReport::*field) {
        double sum = 0.0;
        for (const auto& r : reports) sum += r.*field;
        mean.*field = sum / static_cast<double>(reports.size());
    });
    return mean;
}

struct FitnessSpec {
    std::vector<std::size_t> subset;
    std::size_t n_splits = 10;
    double test_fraction = 0.2;
    std::uint64_t base_seed = 0;
};

struct SubsetEvaluation {
    MetricsReport mean;
    std::vector<MetricsReport> per_split;
};

/// Repeated stratified holdout: split k uses seed base_seed + k, a fresh tree
/// is fit on the train part and scored on the test part.
inline SubsetEvaluation evaluate_subset(const FeatureMatrix& matrix, const LabelVector& labels, const FitnessSpec& spec) {
    if (spec.subset.empty()) throw ArgumentError("feature subset is empty");
    if (spec.n_splits == 0) throw ArgumentError("need at least one split");
    for (std::size_t i = 0; i < spec.subset.size(); ++i) {
        if (spec.subset[i] >= matrix.cols())
            throw IndexOutOfRange("subset feature " + std::to_string(spec.subset[i]) + " out of range");
        for (std::size_t k = 0; k < i; ++k)
            if (spec.subset[k] == spec.subset[i]) throw ArgumentError("subset features must be distinct");
    }
    if (labels.size() != matrix.rows()) throw DataError("label count does not match sample count");

    SubsetEvaluation out;
    out.per_split.reserve(spec.n_splits);
    for (std::size_t k = 0; k < spec.n_splits; ++k) {
        const auto plan = stratified_split(labels, spec.test_fraction, spec.base_seed + k);
        const auto tree = DecisionTree::fit(matrix, labels, spec.subset, plan.train_indices);
        ConfusionMatrix cm;
        for (std::size_t row : plan.test_indices) cm.add(labels[row], tree.predict(matrix, spec.subset, row));
        out.per_split.push_back(compute_metrics(cm));
    }
    out.mean = mean_report(out.per_split);
    return out;
}

}  // namespace dmcga
