#pragma once

/// @file rankers.hpp
/// Frequency-based filter scores for binary classification.
///
/// Each feature is sorted ascending with its labels carried along. The class
/// at sorted position 0 is called the leading class (x), the other the
/// trailing class (y). The mutual congestion region runs from the first
/// trailing-class sample to the last leading-class sample; inside it the two
/// classes interleave and no threshold separates them.
///
/// - MC scores a feature by the fraction of samples inside the region.
/// - DMC weighs the region by distance: for each class it divides the
///   distance mass of its in-region samples by that of its out-of-region
///   samples, measured from the opposite boundary value, and sums the two
///   ratios. Both scores are 0 for a separable feature; lower is better.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "dmcga/data.hpp"
#include "dmcga/errors.hpp"

namespace dmcga {

enum class Ranker { DMC, MC };

inline std::string_view to_string(Ranker r) { return r == Ranker::DMC ? "dmc" : "mc"; }

inline Ranker parse_ranker(std::string_view s) {
    if (s == "dmc" || s == "DMC") return Ranker::DMC;
    if (s == "mc" || s == "MC") return Ranker::MC;
    throw ArgumentError("unknown ranker: " + std::string(s));
}

/// Contribution of a DMC component whose in-region mass is positive but whose
/// out-of-region mass is zero. Large and finite so such features sort last.
inline constexpr double kDmcSentinel = 1e6;

struct SortedFeatureView {
    std::vector<std::size_t> order;  // sample indices, stable ascending by value
    std::vector<double> values;
    std::vector<ClassId> labels;

    std::size_t size() const noexcept { return values.size(); }
};

struct CongestionRegion {
    ClassId x_class = 0;
    ClassId y_class = 1;
    std::size_t start = 0;  // first y_class position
    std::size_t end = 0;    // last x_class position
    bool empty = true;

    std::size_t length() const noexcept { return empty ? 0 : end - start + 1; }
    bool contains(std::size_t pos) const noexcept { return !empty && pos >= start && pos <= end; }
};

struct FeatureScore {
    std::size_t feature_index = 0;
    double score = 0.0;
    Ranker ranker = Ranker::DMC;
};

/// Stable ascending sort of one column; tied values keep row order.
inline SortedFeatureView sort_column(std::span<const double> column, std::span<const ClassId> labels) {
    SortedFeatureView view;
    view.order.resize(column.size());
    std::iota(view.order.begin(), view.order.end(), std::size_t{0});
    std::stable_sort(view.order.begin(), view.order.end(),
                     [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
    view.values.reserve(column.size());
    view.labels.reserve(column.size());
    for (std::size_t i : view.order) {
        view.values.push_back(column[i]);
        view.labels.push_back(labels[i]);
    }
    return view;
}

inline SortedFeatureView sort_feature(const FeatureMatrix& matrix, const LabelVector& labels, std::size_t j) {
    return sort_column(matrix.column(j), labels.values());
}

inline CongestionRegion find_region(const SortedFeatureView& view) {
    if (view.size() == 0) throw SingleClass();
    CongestionRegion region;
    region.x_class = view.labels.front();
    region.y_class = static_cast<ClassId>(1 - region.x_class);

    const auto first_y = std::find(view.labels.begin(), view.labels.end(), region.y_class);
    if (first_y == view.labels.end()) throw SingleClass();
    const auto last_x = std::find(view.labels.rbegin(), view.labels.rend(), region.x_class);

    region.start = static_cast<std::size_t>(first_y - view.labels.begin());
    region.end = view.size() - 1 - static_cast<std::size_t>(last_x - view.labels.rbegin());
    region.empty = region.end < region.start;
    return region;
}

namespace detail {

inline double dmc_component(double inside, double outside) {
    if (inside == 0.0) return 0.0;
    if (outside == 0.0) return kDmcSentinel;
    return inside / outside;
}

}  // namespace detail

inline double dmc_score(const SortedFeatureView& view, const CongestionRegion& region) {
    if (region.empty) return 0.0;
    const double y_min = view.values[region.start];
    const double x_max = view.values[region.end];
    double x_in = 0.0, x_out = 0.0, y_in = 0.0, y_out = 0.0;
    for (std::size_t i = 0; i < view.size(); ++i) {
        const bool in = region.contains(i);
        if (view.labels[i] == region.x_class)
            (in ? x_in : x_out) += std::abs(view.values[i] - y_min);
        else
            (in ? y_in : y_out) += std::abs(view.values[i] - x_max);
    }
    return detail::dmc_component(x_in, x_out) + detail::dmc_component(y_in, y_out);
}

inline double mc_score(const SortedFeatureView& view, const CongestionRegion& region) {
    return static_cast<double>(region.length()) / static_cast<double>(view.size());
}

inline double score_feature(const FeatureMatrix& matrix, const LabelVector& labels, std::size_t j, Ranker ranker) {
    const auto view = sort_feature(matrix, labels, j);
    const auto region = find_region(view);
    return ranker == Ranker::DMC ? dmc_score(view, region) : mc_score(view, region);
}

/// Number of features kept for a fraction: floor(fraction * m), at least one.
inline std::size_t retained_count(std::size_t m, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw ArgumentError("keep fraction must lie in (0, 1]");
    const auto kept = static_cast<std::size_t>(detail::robust_floor(keep_fraction * static_cast<double>(m)));
    return std::clamp<std::size_t>(kept, 1, m);
}

/// Scores every feature and returns all of them sorted ascending by
/// (score, feature index).
inline std::vector<FeatureScore> score_all(const FeatureMatrix& matrix, const LabelVector& labels, Ranker ranker) {
    std::vector<FeatureScore> scores(matrix.cols());
    for (std::size_t j = 0; j < matrix.cols(); ++j)
        scores[j] = {j, score_feature(matrix, labels, j, ranker), ranker};
    std::sort(scores.begin(), scores.end(), [](const FeatureScore& a, const FeatureScore& b) {
        return a.score != b.score ? a.score < b.score : a.feature_index < b.feature_index;
    });
    return scores;
}

inline std::vector<FeatureScore> rank_features(const FeatureMatrix& matrix, const LabelVector& labels,
                                               Ranker ranker, double keep_fraction) {
    const std::size_t keep = retained_count(matrix.cols(), keep_fraction);
    auto scores = score_all(matrix, labels, ranker);
    scores.resize(keep);
    return scores;
}

}  // namespace dmcga
