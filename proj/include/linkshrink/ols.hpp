#pragma once

// Least squares through column-pivoted Householder QR, with classical
// standard errors and two-sided t p-values.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "linkshrink/design.hpp"
#include "linkshrink/errors.hpp"
#include "linkshrink/stats.hpp"

namespace linkshrink {

struct OlsFit {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd t_statistics;
    Eigen::VectorXd p_values;
    double residual_variance = 0.0;
    std::size_t dof = 0;

    [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& design) const { return design * coefficients; }
};

/// `design` must already contain the intercept column if one is wanted.
inline OlsFit fit_ols(const Eigen::MatrixXd& design, std::span<const double> y, std::vector<std::string> names) {
    const Eigen::Index n = design.rows();
    const Eigen::Index K = design.cols();
    if (static_cast<Eigen::Index>(y.size()) != n) throw std::invalid_argument("fit_ols: response length mismatch");
    if (static_cast<Eigen::Index>(names.size()) != K) throw std::invalid_argument("fit_ols: names do not match columns");
    if (n <= K)
        throw DataError("OLS needs more rows than coefficients (n=" + std::to_string(n) + ", k=" + std::to_string(K) + ")");
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < K) {
        std::string dependent;
        for (Eigen::Index k = qr.rank(); k < K; ++k) {
            if (!dependent.empty()) dependent += ", ";
            dependent += names[static_cast<std::size_t>(qr.colsPermutation().indices()(k))];
        }
        throw DataError("design is rank deficient; linearly dependent columns: " + dependent);
    }

    OlsFit fit;
    fit.names = std::move(names);
    fit.coefficients = qr.solve(yv);
    fit.dof = static_cast<std::size_t>(n - K);
    fit.residual_variance = (yv - design * fit.coefficients).squaredNorm() / static_cast<double>(fit.dof);

    // (X'X)^{-1} = P R^{-1} R^{-T} P'
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(K, K).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(K, K));
    const Eigen::VectorXd diag_perm = r_inv.rowwise().squaredNorm();
    fit.standard_errors.resize(K);
    fit.t_statistics.resize(K);
    fit.p_values.resize(K);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = 0; k < K; ++k) fit.standard_errors(perm(k)) = std::sqrt(fit.residual_variance * diag_perm(k));
    for (Eigen::Index k = 0; k < K; ++k) {
        const double se = fit.standard_errors(k);
        const double b = fit.coefficients(k);
        double t = 0.0;
        if (se > 0.0) t = b / se;
        else if (b != 0.0) t = std::copysign(std::numeric_limits<double>::infinity(), b);
        fit.t_statistics(k) = t;
        fit.p_values(k) = t_two_sided_p(t, static_cast<double>(fit.dof));
    }
    return fit;
}

inline OlsFit fit_ols(const DesignMatrix& X, std::span<const double> y) {
    return fit_ols(X.with_intercept(), y, X.map->coefficient_names());
}

/// [1 | main] with names, for main-effects-only models.
inline Eigen::MatrixXd main_effects_design(const DesignMatrix& X) {
    Eigen::MatrixXd out(X.n(), 1 + X.p());
    out.col(0).setOnes();
    out.rightCols(X.p()) = X.main;
    return out;
}

inline std::vector<std::string> main_effects_names(const FeatureMap& map) {
    std::vector<std::string> names{"alpha"};
    for (const auto& c : map.column_names()) names.push_back(c);
    return names;
}

}  // namespace linkshrink
