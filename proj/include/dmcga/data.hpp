#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dmcga/errors.hpp"
#include "dmcga/random.hpp"

namespace dmcga {

/// n x m table of finite reals. Stored column-major because every consumer
/// (rankers, clustering, tree splits) walks one feature at a time.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    /// `columns[j]` is feature j across all samples.
    FeatureMatrix(std::vector<std::vector<double>> columns, std::vector<std::string> names)
        : n_(columns.empty() ? 0 : columns.front().size()), m_(columns.size()),
          names_(std::move(names)) {
        if (m_ < 1) throw DataError("feature matrix needs at least one feature");
        if (n_ < 2) throw DataError("feature matrix needs at least two samples");
        if (names_.size() != m_) throw DataError("feature name count does not match column count");
        std::unordered_set<std::string> seen;
        for (const auto& name : names_)
            if (!seen.insert(name).second) throw DataError("duplicate feature name: " + name);
        values_.reserve(n_ * m_);
        for (std::size_t j = 0; j < m_; ++j) {
            if (columns[j].size() != n_) throw DataError("ragged feature columns");
            for (std::size_t i = 0; i < n_; ++i) {
                if (!std::isfinite(columns[j][i])) throw NonFiniteValue(i, j);
                values_.push_back(columns[j][i]);
            }
        }
    }

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return m_; }

    double at(std::size_t row, std::size_t col) const { return values_[col * n_ + row]; }

    std::span<const double> column(std::size_t j) const {
        if (j >= m_) throw IndexOutOfRange("feature index " + std::to_string(j) + " >= " + std::to_string(m_));
        return {values_.data() + j * n_, n_};
    }

    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    const std::string& feature_name(std::size_t j) const { return names_.at(j); }

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

using ClassId = std::uint8_t;

/// Binary response. Class 0 is the label string seen first in the input.
class LabelVector {
public:
    LabelVector() = default;

    LabelVector(std::vector<ClassId> labels, std::array<std::string, 2> class_names)
        : labels_(std::move(labels)), names_(std::move(class_names)) {
        for (ClassId c : labels_) {
            if (c > 1) throw DataError("class id out of range");
            ++counts_[c];
        }
        if (counts_[0] < 2 || counts_[1] < 2)
            throw DataError("each class needs at least two samples (counts " +
                            std::to_string(counts_[0]) + ", " + std::to_string(counts_[1]) + ")");
    }

    std::size_t size() const noexcept { return labels_.size(); }
    ClassId operator[](std::size_t i) const { return labels_[i]; }
    std::span<const ClassId> values() const noexcept { return labels_; }
    const std::array<std::string, 2>& class_names() const noexcept { return names_; }
    std::size_t count(ClassId c) const { return counts_.at(c); }

private:
    std::vector<ClassId> labels_;
    std::array<std::string, 2> names_;
    std::array<std::size_t, 2> counts_{0, 0};
};

struct Dataset {
    FeatureMatrix matrix;
    LabelVector labels;
};

struct SplitPlan {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::optional<double> parse_real(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

// floor() that forgives representation error such as 40 * 0.2 landing a
// hair below 8.
inline double robust_floor(double x) { return std::floor(x + 1e-9); }

}  // namespace detail

/// Reads a header-first CSV. `label_column` picks the response column by
/// name; empty means the last column. Row/column numbers in errors are
/// 1-based file positions (header is row 1).
inline Dataset load_csv(const std::string& path, const std::string& label_column = {}) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, 1, "empty file");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
    const auto header = detail::split_fields(line);
    if (header.size() < 2) throw ParseError(1, 1, "need at least one feature and one label column");

    std::size_t label_pos = header.size() - 1;
    if (!label_column.empty()) {
        const auto it = std::find(header.begin(), header.end(), label_column);
        if (it == header.end()) throw DataError("label column not found: " + label_column);
        label_pos = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_pos) names.emplace_back(header[c]);

    std::vector<std::vector<double>> columns(names.size());
    std::vector<std::string> raw_labels;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != header.size())
            throw ParseError(row, fields.size(), "expected " + std::to_string(header.size()) + " fields");
        std::size_t j = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == label_pos) {
                if (fields[c].empty()) throw ParseError(row, c + 1, "missing label");
                raw_labels.emplace_back(fields[c]);
                continue;
            }
            const auto value = detail::parse_real(fields[c]);
            if (!value) throw ParseError(row, c + 1, "not a number: '" + std::string(fields[c]) + "'");
            if (!std::isfinite(*value)) throw NonFiniteValue(row, c + 1);
            columns[j++].push_back(*value);
        }
    }

    std::array<std::string, 2> class_names;
    std::vector<std::string> distinct;
    std::vector<ClassId> labels;
    labels.reserve(raw_labels.size());
    for (const auto& label : raw_labels) {
        auto it = std::find(distinct.begin(), distinct.end(), label);
        if (it == distinct.end()) {
            distinct.push_back(label);
            it = distinct.end() - 1;
        }
        labels.push_back(static_cast<ClassId>(std::min<std::ptrdiff_t>(it - distinct.begin(), 255)));
    }
    if (distinct.size() != 2) throw NotBinaryLabels(distinct.size());
    class_names = {distinct[0], distinct[1]};

    FeatureMatrix matrix(std::move(columns), std::move(names));
    return {std::move(matrix), LabelVector(std::move(labels), std::move(class_names))};
}

/// Writes features followed by a label column named `label_name`. Values use
/// the shortest representation that parses back to the identical double.
inline void write_csv(const std::string& path, const FeatureMatrix& matrix, const LabelVector& labels,
                      const std::string& label_name = "class") {
    std::ofstream out(path);
    if (!out) throw MissingFile(path);
    for (const auto& name : matrix.feature_names()) out << name << ',';
    out << label_name << '\n';
    char buf[64];
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof buf, matrix.at(i, j));
            out.write(buf, res.ptr - buf);
            out << ',';
        }
        out << labels.class_names()[labels[i]] << '\n';
    }
}

/// Per-class test counts: floors of n_c * fraction, then the seats needed to
/// reach round(n * fraction) go to the largest fractional remainders (ties to
/// the lower class id).
inline std::array<std::size_t, 2> stratified_test_counts(std::array<std::size_t, 2> class_sizes,
                                                         double test_fraction) {
    const std::size_t n = class_sizes[0] + class_sizes[1];
    const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    std::array<std::size_t, 2> counts{};
    std::array<double, 2> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        const double ideal = static_cast<double>(class_sizes[c]) * test_fraction;
        counts[c] = static_cast<std::size_t>(detail::robust_floor(ideal));
        remainder[c] = std::max(0.0, ideal - static_cast<double>(counts[c]));
        assigned += counts[c];
    }
    std::array<std::size_t, 2> order{0, 1};
    if (remainder[1] > remainder[0] + 1e-12) order = {1, 0};
    for (std::size_t k = 0; assigned < total; k = (k + 1) % 2) {
        counts[order[k]] += 1;
        ++assigned;
    }
    return counts;
}

/// Deterministic stratified holdout split; indices come back sorted.
inline SplitPlan stratified_split(const LabelVector& labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ArgumentError("test fraction must lie in (0, 1)");
    const std::array<std::size_t, 2> sizes{labels.count(0), labels.count(1)};
    const auto test_counts = stratified_test_counts(sizes, test_fraction);
    for (std::size_t c = 0; c < 2; ++c)
        if (test_counts[c] == 0 || test_counts[c] >= sizes[c])
            throw DegenerateSplit("class " + std::to_string(c) + " would be absent from " +
                                  (test_counts[c] == 0 ? "test" : "train") + " split");

    Rng rng = make_rng(seed);
    SplitPlan plan;
    plan.test_fraction = test_fraction;
    plan.seed = seed;
    for (ClassId c = 0; c < 2; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) members.push_back(i);
        shuffle(std::span<std::size_t>(members), rng);
        plan.test_indices.insert(plan.test_indices.end(), members.begin(), members.begin() + test_counts[c]);
        plan.train_indices.insert(plan.train_indices.end(), members.begin() + test_counts[c], members.end());
    }
    std::sort(plan.train_indices.begin(), plan.train_indices.end());
    std::sort(plan.test_indices.begin(), plan.test_indices.end());
    return plan;
}

}  // namespace dmcga
