#pragma once

// Test-only helpers: synthetic datasets and oracles written independently of
// the library code paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dmcga/data.hpp"

namespace dmcga::fixtures {

inline LabelVector make_labels(const std::vector<int>& ys) {
    std::vector<ClassId> v(ys.begin(), ys.end());
    return LabelVector(std::move(v), {"A", "B"});
}

inline FeatureMatrix make_matrix(std::vector<std::vector<double>> columns) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < columns.size(); ++j) names.push_back("f" + std::to_string(j));
    return FeatureMatrix(std::move(columns), std::move(names));
}

/// Worked 16-sample feature: values in sorted order with their labels
/// (0 = C1, 1 = C2).
inline const std::vector<double> kWorkedValues{1.8, 2.3, 2.4, 2.45, 2.9, 3.0, 3.1, 3.15,
                                             3.2, 3.25, 3.3, 4.0, 4.2, 5.2, 5.5, 5.9};
inline const std::vector<int> kWorkedLabels{0, 0, 0, 0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 1, 1};

/// Gene-expression-like synthetic dataset: `informative` features shift with
/// the class, the rest are noise. Labels are drawn with the requested class
/// sizes (class 0 first appearance guaranteed).
inline Dataset synthetic_dataset(std::size_t n0, std::size_t n1, std::size_t m, std::size_t informative,
                                 double effect, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<ClassId> labels(n0, 0);
    labels.insert(labels.end(), n1, 1);
    std::shuffle(labels.begin() + 1, labels.end(), gen);
    if (labels[0] != 0) std::swap(labels[0], *std::find(labels.begin(), labels.end(), ClassId{0}));
    const std::size_t n = labels.size();
    std::vector<std::vector<double>> cols(m, std::vector<double>(n));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) {
        names.push_back("g" + std::to_string(j));
        const double scale = 50.0 + 10.0 * static_cast<double>(j % 7);
        for (std::size_t i = 0; i < n; ++i) {
            double v = noise(gen);
            if (j < informative && labels[i] == 1) v += effect;
            cols[j][i] = scale * (3.0 + v);
        }
    }
    return {FeatureMatrix(std::move(cols), std::move(names)), LabelVector(std::move(labels), {"neg", "pos"})};
}

/// Position of sample i in a stable ascending sort, computed by counting
/// rather than sorting.
inline std::size_t stable_rank(const std::vector<double>& values, std::size_t i) {
    std::size_t r = 0;
    for (std::size_t k = 0; k < values.size(); ++k)
        if (values[k] < values[i] || (values[k] == values[i] && k < i)) ++r;
    return r;
}

struct OracleScores {
    double dmc = 0.0;
    double mc = 0.0;
};

/// Literal set-by-set evaluation of DMC and MC on an unsorted column.
inline OracleScores brute_force_scores(const std::vector<double>& values, const std::vector<int>& labels,
                                       double sentinel) {
    const std::size_t n = values.size();
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[i] = stable_rank(values, i);
    int x_class = -1;
    for (std::size_t i = 0; i < n; ++i)
        if (rank[i] == 0) x_class = labels[i];
    long first_y = -1, last_x = -1;
    for (std::size_t i = 0; i < n; ++i) {
        const long r = static_cast<long>(rank[i]);
        if (labels[i] != x_class && (first_y < 0 || r < first_y)) first_y = r;
        if (labels[i] == x_class && r > last_x) last_x = r;
    }
    if (last_x < first_y) return {0.0, 0.0};

    double y_min = 0.0, x_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<long>(rank[i]) == first_y) y_min = values[i];
        if (static_cast<long>(rank[i]) == last_x) x_max = values[i];
    }
    std::vector<double> x_mc, x_nmc, y_mc, y_nmc;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long r = static_cast<long>(rank[i]);
        const bool in = r >= first_y && r <= last_x;
        inside += in ? 1 : 0;
        if (labels[i] == x_class) (in ? x_mc : x_nmc).push_back(values[i]);
        else (in ? y_mc : y_nmc).push_back(values[i]);
    }
    auto mass = [](const std::vector<double>& set, double anchor) {
        double s = 0.0;
        for (double v : set) s += std::fabs(v - anchor);
        return s;
    };
    auto component = [&](double num, double den) { return num == 0.0 ? 0.0 : den == 0.0 ? sentinel : num / den; };
    OracleScores out;
    out.dmc = component(mass(x_mc, y_min), mass(x_nmc, y_min)) + component(mass(y_mc, x_max), mass(y_nmc, x_max));
    out.mc = static_cast<double>(inside) / static_cast<double>(n);
    return out;
}

}  // namespace dmcga::fixtures
