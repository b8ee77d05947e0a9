#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "linkshrink/ols.hpp"
#include "test_util.hpp"

namespace {

using namespace linkshrink;

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

Eigen::MatrixXd random_design(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd X(n, k);
    X.col(0).setOnes();
    for (Eigen::Index j = 1; j < k; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng) + 0.3 * X(i, j - 1);
    return X;
}

std::vector<std::string> names_for(Eigen::Index k) {
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < k; ++j) out.push_back("c" + std::to_string(j));
    return out;
}

TEST(Ols, MatchesNormalEquationsInExtendedPrecision) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::MatrixXd X = random_design(rng, 50, 6);
    std::vector<double> y(50);
    for (auto& v : y) v = normal(rng);
    const OlsFit fit = fit_ols(X, y, names_for(6));

    const LMatrix Xl = X.cast<long double>();
    LVector yl(50);
    for (int i = 0; i < 50; ++i) yl(i) = y[static_cast<std::size_t>(i)];
    const LMatrix xtx_inv = (Xl.transpose() * Xl).inverse();
    const LVector beta = xtx_inv * Xl.transpose() * yl;
    const long double s2 = (yl - Xl * beta).squaredNorm() / 44.0L;
    EXPECT_EQ(fit.dof, 44u);
    EXPECT_NEAR(fit.residual_variance, static_cast<double>(s2), 1e-12);
    for (int k = 0; k < 6; ++k) {
        EXPECT_NEAR(fit.coefficients(k), static_cast<double>(beta(k)), 1e-9);
        EXPECT_NEAR(fit.standard_errors(k), static_cast<double>(std::sqrt(s2 * xtx_inv(k, k))), 1e-9);
        EXPECT_GE(fit.p_values(k), 0.0);
        EXPECT_LE(fit.p_values(k), 1.0);
    }
}

TEST(Ols, ExactLinearResponse) {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd X = random_design(rng, 30, 4);
    const Eigen::Vector4d b(0.5, -1.0, 2.0, 0.25);
    const Eigen::VectorXd yv = X * b;
    const std::vector<double> y(yv.data(), yv.data() + yv.size());
    const OlsFit fit = fit_ols(X, y, names_for(4));
    EXPECT_LT(fit.residual_variance, 1e-25);
    EXPECT_LT((fit.coefficients - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ols, OrthonormalDesign) {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd A = random_design(rng, 20, 3);
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ() * Eigen::MatrixXd::Identity(20, 3);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> y(20);
    for (auto& v : y) v = normal(rng);
    const OlsFit fit = fit_ols(Q, y, names_for(3));
    const Eigen::VectorXd want = Q.transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), 20);
    EXPECT_LT((fit.coefficients - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ols, PValueFromTDistribution) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::MatrixXd X = random_design(rng, 15, 3);
    std::vector<double> y(15);
    for (auto& v : y) v = normal(rng);
    const OlsFit fit = fit_ols(X, y, names_for(3));
    for (int k = 0; k < 3; ++k) {
        // two-sided p = I_{dof/(dof+t^2)}(dof/2, 1/2)
        const double t = fit.t_statistics(k);
        const double dof = 12.0;
        EXPECT_NEAR(fit.p_values(k), incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t)), 1e-14);
    }
}

TEST(Ols, RescalingColumnsLeavesPredictions) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::MatrixXd X = random_design(rng, 40, 5);
    std::vector<double> y(40);
    for (auto& v : y) v = normal(rng);
    const Eigen::VectorXd scale = (Eigen::VectorXd(5) << 1.0, 10.0, 0.01, 3.0, 1e3).finished();
    const OlsFit a = fit_ols(X, y, names_for(5));
    const OlsFit b = fit_ols(X * scale.asDiagonal(), y, names_for(5));
    EXPECT_LT((a.predict(X) - b.predict(X * scale.asDiagonal())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((a.coefficients - b.coefficients.cwiseProduct(scale)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((a.p_values - b.p_values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ols, RankDeficiencyNamesColumn) {
    std::mt19937_64 rng(6);
    Eigen::MatrixXd X = random_design(rng, 20, 4);
    X.col(3) = 2.0 * X.col(1) - X.col(2);
    std::vector<double> y(20, 1.0);
    try {
        fit_ols(X, y, names_for(4));
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("linearly dependent"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("c"), std::string::npos);
    }
    EXPECT_THROW(fit_ols(random_design(rng, 3, 3), std::vector<double>(3, 0.0), names_for(3)), DataError);
}

TEST(Ols, DesignOverloadNamesCoefficients) {
    std::mt19937_64 rng(7);
    const auto data = linkshrink::testing::random_dataset(rng, 60, 2, 1, {3});
    const DesignMatrix X = build_design(data);
    const OlsFit fit = fit_ols(X, data.response);
    EXPECT_EQ(fit.names, X.map->coefficient_names());
    EXPECT_EQ(fit.coefficients.size(), 1 + X.p() + X.q());
    EXPECT_EQ(main_effects_design(X).cols(), 1 + X.p());
    EXPECT_EQ(main_effects_names(*X.map).size(), static_cast<std::size_t>(1 + X.p()));
}

}  // namespace
