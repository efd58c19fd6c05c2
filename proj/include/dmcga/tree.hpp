#pragma once

// CART classifier for two classes with Gini impurity and no depth limit.
// Split search is exhaustive and deterministic: features are visited in
// subset order and thresholds ascending, and only a strictly larger gain
// (beyond kGainEpsilon) replaces the incumbent.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "dmcga/data.hpp"
#include "dmcga/errors.hpp"

namespace dmcga {

using ClassCounts = std::array<std::size_t, 2>;

inline double gini(std::span<const std::size_t> counts) {
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

inline double gini(const ClassCounts& counts) { return gini(std::span<const std::size_t>(counts)); }

class DecisionTree {
public:
    static constexpr double kGainEpsilon = 1e-12;

    struct Node {
        bool leaf = true;
        std::size_t feature = 0;  // position within the fitted subset
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        ClassId prediction = 0;
        ClassCounts counts{0, 0};
    };

    /// Fits on the rows `train` of `matrix`, restricted to the columns in
    /// `subset` (in that order).
    static DecisionTree fit(const FeatureMatrix& matrix, const LabelVector& labels,
                            std::span<const std::size_t> subset, std::span<const std::size_t> train) {
        if (train.empty()) throw EmptyTrainingSet();
        for (std::size_t j : subset)
            if (j >= matrix.cols()) throw IndexOutOfRange("subset feature " + std::to_string(j) + " out of range");
        DecisionTree tree;
        tree.width_ = subset.size();
        std::vector<std::size_t> rows(train.begin(), train.end());
        Builder builder{matrix, labels, subset, tree.nodes_};
        builder.grow(rows);
        return tree;
    }

    ClassId predict(std::span<const double> row) const {
        if (row.size() != width_) throw WidthMismatch(width_, row.size());
        std::size_t at = 0;
        while (!nodes_[at].leaf) at = row[nodes_[at].feature] <= nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
        return nodes_[at].prediction;
    }

    /// Predicts sample `row` of `matrix` read through the same column subset
    /// used for fitting.
    ClassId predict(const FeatureMatrix& matrix, std::span<const std::size_t> subset, std::size_t row) const {
        if (subset.size() != width_) throw WidthMismatch(width_, subset.size());
        std::size_t at = 0;
        while (!nodes_[at].leaf) {
            const Node& node = nodes_[at];
            at = matrix.at(row, subset[node.feature]) <= node.threshold ? node.left : node.right;
        }
        return nodes_[at].prediction;
    }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t width() const noexcept { return width_; }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
    }

    std::size_t depth() const { return nodes_.empty() ? 0 : depth_from(0); }

private:
    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double gain = 0.0;
    };

    struct Builder {
        const FeatureMatrix& matrix;
        const LabelVector& labels;
        std::span<const std::size_t> subset;
        std::vector<Node>& nodes;

        std::size_t grow(std::vector<std::size_t>& rows) {
            const std::size_t id = nodes.size();
            nodes.emplace_back();
            ClassCounts counts{0, 0};
            for (std::size_t r : rows) ++counts[labels[r]];
            nodes[id].counts = counts;
            nodes[id].prediction = counts[1] > counts[0] ? 1 : 0;
            if (rows.size() < 2 || counts[0] == 0 || counts[1] == 0) return id;

            const Split split = best_split(rows, counts);
            if (!split.found) return id;

            std::vector<std::size_t> left, right;
            const std::size_t col = subset[split.feature];
            for (std::size_t r : rows) (matrix.at(r, col) <= split.threshold ? left : right).push_back(r);
            rows.clear();
            rows.shrink_to_fit();

            const std::size_t l = grow(left);
            const std::size_t r = grow(right);
            Node& node = nodes[id];
            node.leaf = false;
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.left = l;
            node.right = r;
            return id;
        }

        Split best_split(const std::vector<std::size_t>& rows, const ClassCounts& parent) const {
            const double n = static_cast<double>(rows.size());
            const double parent_impurity = gini(parent);
            Split best;
            std::vector<std::pair<double, ClassId>> column(rows.size());
            for (std::size_t f = 0; f < subset.size(); ++f) {
                const std::size_t col = subset[f];
                for (std::size_t k = 0; k < rows.size(); ++k) column[k] = {matrix.at(rows[k], col), labels[rows[k]]};
                std::stable_sort(column.begin(), column.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
                ClassCounts left{0, 0};
                for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                    ++left[column[k].second];
                    const double lo = column[k].first;
                    const double hi = column[k + 1].first;
                    if (!(lo < hi)) continue;
                    const ClassCounts right{parent[0] - left[0], parent[1] - left[1]};
                    const double nl = static_cast<double>(k + 1);
                    const double weighted = (nl * gini(left) + (n - nl) * gini(right)) / n;
                    const double gain = parent_impurity - weighted;
                    if (!best.found || gain > best.gain + kGainEpsilon) {
                        double threshold = lo + (hi - lo) / 2.0;
                        if (!(threshold < hi)) threshold = lo;  // adjacent doubles
                        best = {true, f, threshold, gain};
                    }
                }
            }
            return best;
        }
    };

    std::size_t depth_from(std::size_t id) const {
        const Node& node = nodes_[id];
        if (node.leaf) return 0;
        return 1 + std::max(depth_from(node.left), depth_from(node.right));
    }

    std::vector<Node> nodes_;
    std::size_t width_ = 0;
};

}  // namespace dmcga
