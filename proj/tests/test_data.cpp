#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "dmcga/data.hpp"
#include "support.hpp"

using namespace dmcga;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
    const auto path = fs::temp_directory_path() / ("dmcga_test_" + name);
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST(LoadCsv, ParsesSmallFileAndEncodesLabelsByFirstAppearance) {
    const auto path = write_temp("small.csv", "a,b,y\n1,2,A\n3,4,B\n5,6,A\n7,8,B\n");
    const auto data = load_csv(path.string());
    EXPECT_EQ(data.matrix.rows(), 4u);
    EXPECT_EQ(data.matrix.cols(), 2u);
    EXPECT_EQ(data.labels.class_names()[0], "A");
    EXPECT_EQ(data.labels.class_names()[1], "B");
    EXPECT_EQ(data.labels.count(0), 2u);
    EXPECT_EQ(data.labels.count(1), 2u);
    EXPECT_DOUBLE_EQ(data.matrix.at(2, 1), 6.0);
    EXPECT_EQ(data.matrix.feature_name(1), "b");
}

TEST(LoadCsv, SecondLabelSeenFirstBecomesClassZero) {
    const auto path = write_temp("order.csv", "a,y\n1,tumor\n2,normal\n3,normal\n4,tumor\n");
    const auto data = load_csv(path.string());
    EXPECT_EQ(data.labels.class_names()[0], "tumor");
    EXPECT_EQ(data.labels[1], 1);
}

TEST(LoadCsv, LabelColumnByName) {
    const auto path = write_temp("named.csv", "y,a,b\nA,1,2\nB,3,4\nA,5,6\nB,7,8\n");
    const auto data = load_csv(path.string(), "y");
    EXPECT_EQ(data.matrix.cols(), 2u);
    EXPECT_EQ(data.matrix.feature_name(0), "a");
    EXPECT_DOUBLE_EQ(data.matrix.at(3, 0), 7.0);
    EXPECT_THROW(load_csv(path.string(), "nope"), DataError);
}

TEST(LoadCsv, ThreeLabelsAreRejected) {
    const auto path = write_temp("three.csv", "a,y\n1,A\n2,B\n3,C\n4,A\n");
    try {
        load_csv(path.string());
        FAIL() << "expected NotBinaryLabels";
    } catch (const NotBinaryLabels& e) {
        EXPECT_EQ(e.distinct(), 3u);
    }
}

TEST(LoadCsv, ErrorPaths) {
    EXPECT_THROW(load_csv("/nonexistent/definitely_missing.csv"), MissingFile);

    const auto bad = write_temp("bad.csv", "a,b,y\n1,2,A\n3,x,B\n5,6,A\n7,8,B\n");
    try {
        load_csv(bad.string());
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_EQ(e.col(), 2u);
    }

    const auto nan = write_temp("nan.csv", "a,y\n1,A\nnan,B\n5,A\n7,B\n");
    EXPECT_THROW(load_csv(nan.string()), NonFiniteValue);

    const auto missing = write_temp("missing.csv", "a,y\n1,A\n,B\n5,A\n7,B\n");
    EXPECT_THROW(load_csv(missing.string()), ParseError);

    const auto thousands = write_temp("thousands.csv", "a,b,y\n1,2,A\n\"1,000\",4,B\n");
    EXPECT_THROW(load_csv(thousands.string()), ParseError);

    const auto dup = write_temp("dup.csv", "a,a,y\n1,2,A\n3,4,B\n5,6,A\n7,8,B\n");
    EXPECT_THROW(load_csv(dup.string()), DataError);
}

TEST(LoadCsv, RoundTripReproducesEveryCell) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::vector<double>> cols(6, std::vector<double>(9));
        for (auto& c : cols)
            for (auto& v : c) v = u(gen) / 3.0;
        cols[0][0] = 1e-300;
        cols[1][1] = -0.0;
        const auto matrix = fixtures::make_matrix(cols);
        const auto labels = fixtures::make_labels({0, 1, 0, 1, 0, 1, 1, 0, 0});
        const auto path = fs::temp_directory_path() / "dmcga_test_roundtrip.csv";
        write_csv(path.string(), matrix, labels);
        const auto back = load_csv(path.string());
        ASSERT_EQ(back.matrix.cols(), matrix.cols());
        for (std::size_t j = 0; j < matrix.cols(); ++j)
            for (std::size_t i = 0; i < matrix.rows(); ++i) EXPECT_EQ(back.matrix.at(i, j), matrix.at(i, j));
        for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(back.labels[i], labels[i]);
    }
}

TEST(StratifiedSplit, LargestRemainderSmallCase) {
    // 4 of class 0 and 6 of class 1: ideals 0.8 / 1.2, floors 0 / 1, the
    // remaining seat goes to class 0.
    const auto labels = fixtures::make_labels({0, 0, 0, 0, 1, 1, 1, 1, 1, 1});
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        const auto plan = stratified_split(labels, 0.2, seed);
        ASSERT_EQ(plan.test_indices.size(), 2u);
        std::array<int, 2> per_class{0, 0};
        for (auto i : plan.test_indices) ++per_class[labels[i]];
        EXPECT_EQ(per_class[0], 1);
        EXPECT_EQ(per_class[1], 1);
    }
}

TEST(StratifiedSplit, ColonShapedCounts) {
    // 22 / 40 at 20 %: floors of 4.4 and 8.0, total round(12.4) = 12 -> (4, 8).
    EXPECT_EQ(stratified_test_counts({22, 40}, 0.2), (std::array<std::size_t, 2>{4, 8}));
    std::vector<int> ys(22, 0);
    ys.insert(ys.end(), 40, 1);
    const auto labels = fixtures::make_labels(ys);
    const auto plan = stratified_split(labels, 0.2, 5);
    EXPECT_EQ(plan.test_indices.size(), 12u);
    EXPECT_EQ(plan.train_indices.size(), 50u);
}

TEST(StratifiedSplit, DeterministicAndSeedSensitive) {
    std::vector<int> ys;
    for (int i = 0; i < 40; ++i) ys.push_back(i % 3 == 0 ? 0 : 1);
    const auto labels = fixtures::make_labels(ys);
    const auto a = stratified_split(labels, 0.25, 42);
    const auto b = stratified_split(labels, 0.25, 42);
    EXPECT_EQ(a.test_indices, b.test_indices);
    EXPECT_EQ(a.train_indices, b.train_indices);
    const auto c = stratified_split(labels, 0.25, 43);
    EXPECT_NE(a.test_indices, c.test_indices);
}

TEST(StratifiedSplit, DegenerateSplitsAreRejected) {
    const auto labels = fixtures::make_labels({0, 0, 1, 1, 1, 1, 1, 1, 1, 1});
    EXPECT_THROW(stratified_split(labels, 0.05, 1), DegenerateSplit);  // nobody in test
    EXPECT_THROW(stratified_split(labels, 0.0, 1), ArgumentError);
    EXPECT_THROW(stratified_split(labels, 1.0, 1), ArgumentError);
}

// Property: disjoint cover, and test class counts within one sample of the
// proportional share.
TEST(StratifiedSplit, PropertyPartitionAndProportions) {
    std::mt19937_64 gen(2024);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n0 = 2 + gen() % 40, n1 = 2 + gen() % 40;
        std::vector<int> ys(n0, 0);
        ys.insert(ys.end(), n1, 1);
        std::shuffle(ys.begin(), ys.end(), gen);
        const double fraction = 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(gen);
        const auto labels = fixtures::make_labels(ys);
        SplitPlan plan;
        try {
            plan = stratified_split(labels, fraction, gen());
        } catch (const DegenerateSplit&) {
            continue;
        }
        ++checked;
        std::vector<int> seen(ys.size(), 0);
        for (auto i : plan.train_indices) ++seen[i];
        for (auto i : plan.test_indices) ++seen[i];
        for (int s : seen) ASSERT_EQ(s, 1);
        const double n = static_cast<double>(ys.size());
        const double test_n = static_cast<double>(plan.test_indices.size());
        EXPECT_EQ(plan.test_indices.size(), static_cast<std::size_t>(std::llround(n * fraction)));
        for (ClassId c = 0; c < 2; ++c) {
            double in_test = 0;
            for (auto i : plan.test_indices) in_test += labels[i] == c;
            const double expected = test_n * static_cast<double>(labels.count(c)) / n;
            EXPECT_LE(std::fabs(in_test - expected), 1.0 + 1e-9);
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(FeatureMatrix, InvariantsEnforced) {
    EXPECT_THROW(fixtures::make_matrix({{1.0}}), DataError);  // n < 2
    EXPECT_THROW(FeatureMatrix({{1.0, 2.0}}, {"a", "b"}), DataError);
    EXPECT_THROW(fixtures::make_matrix({{1.0, std::nan("")}}), NonFiniteValue);
    EXPECT_THROW(fixtures::make_labels({0, 1, 1}), DataError);  // class 0 has one sample
}
