#include <gtest/gtest.h>

#include <random>

#include "linkshrink/design.hpp"
#include "test_util.hpp"

namespace {

using namespace linkshrink;
using linkshrink::testing::random_dataset;

RawDataset two_continuous() {
    RawDataset d;
    d.columns.push_back({"a", ColumnKind::continuous, {1.0, 2.0, 3.0, 6.0}, {}});
    d.columns.push_back({"b", ColumnKind::continuous, {0.5, -1.0, 2.0, 0.0}, {}});
    d.response = {1.0, 2.0, 3.0, 4.0};
    return d;
}

std::size_t choose2(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

TEST(FeatureMap, PaperSchemaHas85Interactions) {
    std::mt19937_64 rng(1);
    // 3 continuous + 4 noise, 3 binary, one 5-level categorical: 14 columns
    const auto data = random_dataset(rng, 200, 7, 3, {5});
    const FeatureMap map = fit_feature_map(data);
    EXPECT_EQ(map.p_columns(), 14u);
    EXPECT_EQ(map.p_covariates(), 11u);
    EXPECT_EQ(map.q(), 85u);
}

TEST(FeatureMap, TwoContinuousGiveOnePair) {
    const FeatureMap map = fit_feature_map(two_continuous());
    ASSERT_EQ(map.q(), 1u);
    EXPECT_EQ(map.interaction_index()[0], ColumnPair(0, 1));
    EXPECT_EQ(map.interaction_name(0), "a:b");
}

TEST(FeatureMap, WithinGroupPairDropped) {
    RawDataset d;
    d.columns.push_back({"x", ColumnKind::continuous, {1.0, 2.0, 4.0, 0.0, 3.0, 1.0}, {}});
    d.columns.push_back({"g", ColumnKind::categorical, {}, {"r", "s", "t", "r", "s", "t"}});
    const FeatureMap map = fit_feature_map(d);
    ASSERT_EQ(map.p_columns(), 3u);
    ASSERT_EQ(map.q(), 2u);
    EXPECT_EQ(map.interaction_index()[0], ColumnPair(0, 1));
    EXPECT_EQ(map.interaction_index()[1], ColumnPair(0, 2));
    EXPECT_EQ(map.group_of(1), 1u);
    EXPECT_EQ(map.group_of(2), 1u);
}

TEST(FeatureMap, QFormulaOnRandomSchemas) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::size_t> small(0, 4);
    std::uniform_int_distribution<std::size_t> levels(2, 6);
    for (int rep = 0; rep < 60; ++rep) {
        std::vector<std::size_t> cats(small(rng) % 3);
        for (auto& l : cats) l = levels(rng);
        const auto data = random_dataset(rng, 60, small(rng), small(rng), cats);
        if (data.columns.empty()) continue;
        const FeatureMap map = fit_feature_map(data);
        if (map.p_columns() > 30) continue;
        std::size_t within = 0;
        for (auto l : cats) within += choose2(l - 1);
        EXPECT_EQ(map.q(), choose2(map.p_columns()) - within);
        for (const auto& [j, k] : map.interaction_index()) {
            EXPECT_LT(j, k);
            EXPECT_FALSE(map.group_of(j) == map.group_of(k) &&
                         map.covariates()[map.group_of(j)].kind == ColumnKind::categorical);
        }
    }
}

TEST(FeatureMap, BinaryCodingIsLexicographic) {
    RawDataset d;
    d.columns.push_back({"smoker", ColumnKind::binary, {}, {"yes", "no", "no", "yes", "no"}});
    const DesignMatrix X = build_design(d);
    const std::vector<double> want{1.0, -1.0, -1.0, 1.0, -1.0};
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(X.main(i, 0), want[static_cast<std::size_t>(i)]);
}

TEST(FeatureMap, CategoricalContrasts) {
    RawDataset d;
    d.columns.push_back({"g", ColumnKind::categorical, {}, {"c", "a", "b", "a", "c"}});
    const DesignMatrix X = build_design(d);
    ASSERT_EQ(X.p(), 2);
    // sorted levels a, b, c; the last level is -1 on every column
    const double want[5][2] = {{-1, -1}, {1, 0}, {0, 1}, {1, 0}, {-1, -1}};
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index c = 0; c < 2; ++c) EXPECT_EQ(X.main(i, c), want[i][c]);
    EXPECT_EQ(X.map->column_names()[0], "g.a");
    EXPECT_EQ(X.map->column_names()[1], "g.b");
    const Eigen::MatrixXd C = X.map->contrast(0);
    EXPECT_EQ(C.rows(), 3);
    EXPECT_EQ(C.cols(), 2);
    EXPECT_TRUE((C.colwise().sum().array() == 0.0).all());
}

TEST(FeatureMap, RoundTripStandardizes) {
    std::mt19937_64 rng(5);
    const auto data = random_dataset(rng, 500, 4, 2, {3});
    const DesignMatrix X = build_design(data);
    for (std::size_t c = 0; c < X.map->p_columns(); ++c) {
        if (X.map->covariates()[X.map->group_of(c)].kind != ColumnKind::continuous) continue;
        const auto col = X.main.col(static_cast<Eigen::Index>(c));
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        EXPECT_LE(std::fabs(mean), 1e-10);
        EXPECT_LE(std::fabs(sd - 1.0), 1e-10);
    }
}

TEST(FeatureMap, InteractionsAreExactProducts) {
    std::mt19937_64 rng(8);
    const auto data = random_dataset(rng, 120, 3, 2, {4});
    const DesignMatrix X = build_design(data);
    const auto& pairs = X.map->interaction_index();
    for (std::size_t r = 0; r < pairs.size(); ++r)
        for (Eigen::Index i = 0; i < X.n(); ++i)
            EXPECT_EQ(X.interactions(i, static_cast<Eigen::Index>(r)),
                      X.main(i, static_cast<Eigen::Index>(pairs[r].first)) *
                          X.main(i, static_cast<Eigen::Index>(pairs[r].second)));
}

TEST(FeatureMap, Deterministic) {
    std::mt19937_64 rng(9);
    const auto data = random_dataset(rng, 80, 2, 2, {3});
    EXPECT_TRUE(fit_feature_map(data) == fit_feature_map(data));
}

TEST(FeatureMap, Errors) {
    RawDataset constant;
    constant.columns.push_back({"flat", ColumnKind::continuous, {2.0, 2.0, 2.0}, {}});
    try {
        fit_feature_map(constant);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
    }
    RawDataset one_level;
    one_level.columns.push_back({"g", ColumnKind::categorical, {}, {"a", "a", "a"}});
    EXPECT_THROW(fit_feature_map(one_level), DataError);
    RawDataset three_values;
    three_values.columns.push_back({"b", ColumnKind::binary, {}, {"x", "y", "z"}});
    EXPECT_THROW(fit_feature_map(three_values), DataError);
}

TEST(ApplyFeatureMap, UsesStoredCentersAndScales) {
    const RawDataset train = two_continuous();
    const auto map = std::make_shared<const FeatureMap>(fit_feature_map(train));
    RawDataset test;
    const double center_a = map->covariates()[0].center;
    test.columns.push_back({"a", ColumnKind::continuous, {center_a}, {}});
    test.columns.push_back({"b", ColumnKind::continuous, {5.0}, {}});
    const DesignMatrix X = apply_feature_map(map, test);
    EXPECT_EQ(X.main(0, 0), 0.0);
    EXPECT_EQ(X.interactions(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(X.main(0, 1), (5.0 - map->covariates()[1].center) / map->covariates()[1].scale);
}

TEST(ApplyFeatureMap, RejectsUnseenLevelAndMismatch) {
    RawDataset train;
    train.columns.push_back({"g", ColumnKind::categorical, {}, {"a", "b", "a"}});
    const auto map = std::make_shared<const FeatureMap>(fit_feature_map(train));
    RawDataset unseen;
    unseen.columns.push_back({"g", ColumnKind::categorical, {}, {"z"}});
    EXPECT_THROW(apply_feature_map(map, unseen), DataError);
    RawDataset wrong_kind;
    wrong_kind.columns.push_back({"g", ColumnKind::continuous, {1.0}, {}});
    EXPECT_THROW(apply_feature_map(map, wrong_kind), DataError);
    RawDataset missing;
    missing.columns.push_back({"h", ColumnKind::categorical, {}, {"a"}});
    EXPECT_THROW(apply_feature_map(map, missing), DataError);
}

TEST(InteractionMoments, DirectSummation) {
    std::mt19937_64 rng(12);
    const auto data = random_dataset(rng, 300, 3, 1, {3});
    const DesignMatrix X = build_design(data);
    const Eigen::VectorXd m = interaction_moments(X);
    const auto& pairs = X.map->interaction_index();
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < X.n(); ++i)
            s += X.main(i, static_cast<Eigen::Index>(pairs[r].first)) * X.main(i, static_cast<Eigen::Index>(pairs[r].second));
        EXPECT_NEAR(m(static_cast<Eigen::Index>(r)), s / static_cast<double>(X.n()), 1e-13);
    }
}

TEST(InteractionMoments, CorrelatedColumns) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    RawDataset d;
    d.columns.push_back({"u", ColumnKind::continuous, {}, {}});
    d.columns.push_back({"v", ColumnKind::continuous, {}, {}});
    d.columns.push_back({"w", ColumnKind::continuous, {}, {}});
    for (int i = 0; i < 200000; ++i) {
        const double a = normal(rng);
        const double b = normal(rng);
        d.columns[0].numeric.push_back(a);
        d.columns[1].numeric.push_back(0.5 * a + std::sqrt(0.75) * b);
        d.columns[2].numeric.push_back(normal(rng));
    }
    const Eigen::VectorXd m = interaction_moments(build_design(d));
    EXPECT_NEAR(m(0), 0.5, 0.01);  // u:v
    EXPECT_NEAR(m(1), 0.0, 0.01);  // u:w
    EXPECT_NEAR(m(2), 0.0, 0.01);  // v:w
}

}  // namespace
