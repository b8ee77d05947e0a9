#pragma once

// Raw covariates -> standardized main-effect columns plus every admissible
// pairwise product column.
//
// Conventions:
//   continuous   centered and scaled with the population sd (denominator n)
//   binary       lexicographically smaller label -> -1, larger -> +1
//   categorical  L sorted levels -> L-1 sum-to-zero columns over {-1,0,1};
//                level l < L-1 is +1 on column l, the last level is -1 on all
// Pairs of columns from the same categorical group are never formed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "linkshrink/errors.hpp"

namespace linkshrink {

enum class ColumnKind { continuous, binary, categorical };

inline std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::continuous: return "continuous";
        case ColumnKind::binary: return "binary";
        case ColumnKind::categorical: return "categorical";
    }
    return "?";
}

struct RawColumn {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    std::vector<double> numeric;      // continuous columns
    std::vector<std::string> labels;  // binary and categorical columns

    [[nodiscard]] std::size_t size() const {
        return kind == ColumnKind::continuous ? numeric.size() : labels.size();
    }
};

struct RawDataset {
    std::vector<RawColumn> columns;
    std::vector<double> response;  // may be empty for prediction-only data
    std::string response_name = "y";

    [[nodiscard]] std::size_t n_rows() const {
        if (!columns.empty()) return columns.front().size();
        return response.size();
    }

    [[nodiscard]] const RawColumn* find(std::string_view name) const {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }

    void validate() const {
        const std::size_t n = n_rows();
        for (const auto& c : columns)
            if (c.size() != n) throw DataError("column '" + c.name + "' has inconsistent length");
        if (!response.empty() && response.size() != n) throw DataError("response has inconsistent length");
    }

    [[nodiscard]] RawDataset subset(std::span<const std::size_t> rows) const {
        RawDataset out;
        out.response_name = response_name;
        for (const auto& c : columns) {
            RawColumn sub{c.name, c.kind, {}, {}};
            if (c.kind == ColumnKind::continuous) {
                sub.numeric.reserve(rows.size());
                for (auto r : rows) sub.numeric.push_back(c.numeric.at(r));
            } else {
                sub.labels.reserve(rows.size());
                for (auto r : rows) sub.labels.push_back(c.labels.at(r));
            }
            out.columns.push_back(std::move(sub));
        }
        if (!response.empty())
            for (auto r : rows) out.response.push_back(response.at(r));
        return out;
    }
};

using ColumnPair = std::pair<std::size_t, std::size_t>;

struct CovariateInfo {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    double center = 0.0;              // continuous only
    double scale = 1.0;               // continuous only, > 0
    std::vector<std::string> levels;  // binary: {low, high}; categorical: sorted levels
    std::size_t first_column = 0;
    std::size_t n_columns = 1;

    bool operator==(const CovariateInfo&) const = default;
};

class FeatureMap;
FeatureMap fit_feature_map(const RawDataset& data);

/// Immutable description of how raw covariates expand into design columns.
class FeatureMap {
  public:
    [[nodiscard]] std::size_t p_columns() const { return group_of_.size(); }
    [[nodiscard]] std::size_t p_covariates() const { return covariates_.size(); }
    [[nodiscard]] std::size_t q() const { return pairs_.size(); }

    [[nodiscard]] const std::vector<CovariateInfo>& covariates() const { return covariates_; }
    [[nodiscard]] const std::vector<ColumnPair>& interaction_index() const { return pairs_; }
    [[nodiscard]] std::size_t group_of(std::size_t column) const { return group_of_.at(column); }
    [[nodiscard]] const std::vector<std::size_t>& groups() const { return group_of_; }
    [[nodiscard]] const std::vector<std::string>& column_names() const { return column_names_; }

    [[nodiscard]] std::string interaction_name(std::size_t r) const {
        return column_names_[pairs_[r].first] + ":" + column_names_[pairs_[r].second];
    }

    /// Names of all 1 + p + q coefficients, intercept first.
    [[nodiscard]] std::vector<std::string> coefficient_names() const {
        std::vector<std::string> names{"alpha"};
        for (const auto& c : column_names_) names.push_back(c);
        for (std::size_t r = 0; r < q(); ++r) names.push_back(interaction_name(r));
        return names;
    }

    [[nodiscard]] std::size_t covariate_index(std::string_view name) const {
        for (std::size_t g = 0; g < covariates_.size(); ++g)
            if (covariates_[g].name == name) return g;
        throw DataError("unknown covariate '" + std::string(name) + "'");
    }

    /// L x (L-1) sum-to-zero contrast matrix of a categorical covariate.
    [[nodiscard]] Eigen::MatrixXd contrast(std::size_t covariate) const {
        const auto& info = covariates_.at(covariate);
        const auto L = static_cast<Eigen::Index>(info.levels.size());
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(L, L - 1);
        for (Eigen::Index l = 0; l < L - 1; ++l) m(l, l) = 1.0;
        m.row(L - 1).setConstant(-1.0);
        return m;
    }

    bool operator==(const FeatureMap&) const = default;

  private:
    friend FeatureMap fit_feature_map(const RawDataset& data);
    FeatureMap() = default;

    void finalize() {
        column_names_.clear();
        group_of_.clear();
        std::size_t col = 0;
        for (std::size_t g = 0; g < covariates_.size(); ++g) {
            auto& info = covariates_[g];
            info.first_column = col;
            if (info.kind == ColumnKind::categorical) {
                info.n_columns = info.levels.size() - 1;
                for (std::size_t l = 0; l + 1 < info.levels.size(); ++l)
                    column_names_.push_back(info.name + "." + info.levels[l]);
            } else {
                info.n_columns = 1;
                column_names_.push_back(info.name);
            }
            for (std::size_t k = 0; k < info.n_columns; ++k) group_of_.push_back(g);
            col += info.n_columns;
        }
        pairs_.clear();
        for (std::size_t j = 0; j < col; ++j)
            for (std::size_t k = j + 1; k < col; ++k)
                if (group_of_[j] != group_of_[k]) pairs_.emplace_back(j, k);
    }

    std::vector<CovariateInfo> covariates_;
    std::vector<std::size_t> group_of_;
    std::vector<std::string> column_names_;
    std::vector<ColumnPair> pairs_;
};

/// Standardized main-effect columns and their pairwise products. The
/// intercept column is implied.
struct DesignMatrix {
    Eigen::MatrixXd main;          // n x p
    Eigen::MatrixXd interactions;  // n x q
    std::shared_ptr<const FeatureMap> map;

    [[nodiscard]] Eigen::Index n() const { return main.rows(); }
    [[nodiscard]] Eigen::Index p() const { return main.cols(); }
    [[nodiscard]] Eigen::Index q() const { return interactions.cols(); }

    /// [1 | main | interactions], n x (1 + p + q).
    [[nodiscard]] Eigen::MatrixXd with_intercept() const {
        Eigen::MatrixXd out(n(), 1 + p() + q());
        out.col(0).setOnes();
        out.middleCols(1, p()) = main;
        out.rightCols(q()) = interactions;
        return out;
    }

    [[nodiscard]] DesignMatrix rows(std::span<const std::size_t> idx) const {
        DesignMatrix out{Eigen::MatrixXd(idx.size(), p()), Eigen::MatrixXd(idx.size(), q()), map};
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(idx[i]);
            out.main.row(static_cast<Eigen::Index>(i)) = main.row(r);
            out.interactions.row(static_cast<Eigen::Index>(i)) = interactions.row(r);
        }
        return out;
    }
};

/// Products of main columns for every admissible pair.
inline Eigen::MatrixXd expand_interactions(const Eigen::MatrixXd& main, std::span<const ColumnPair> pairs) {
    Eigen::MatrixXd out(main.rows(), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t r = 0; r < pairs.size(); ++r)
        out.col(static_cast<Eigen::Index>(r)) =
            main.col(static_cast<Eigen::Index>(pairs[r].first))
                .cwiseProduct(main.col(static_cast<Eigen::Index>(pairs[r].second)));
    return out;
}

inline FeatureMap fit_feature_map(const RawDataset& data) {
    data.validate();
    const std::size_t n = data.n_rows();
    if (n == 0) throw DataError("dataset has no rows");
    FeatureMap map;
    for (const auto& col : data.columns) {
        CovariateInfo info;
        info.name = col.name;
        info.kind = col.kind;
        switch (col.kind) {
            case ColumnKind::continuous: {
                double mean = 0.0;
                for (double v : col.numeric) {
                    if (!std::isfinite(v)) throw DataError("column '" + col.name + "' has a non-finite value");
                    mean += v;
                }
                mean /= static_cast<double>(n);
                double ss = 0.0;
                for (double v : col.numeric) ss += (v - mean) * (v - mean);
                const double sd = std::sqrt(ss / static_cast<double>(n));
                if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean))))
                    throw DataError("column '" + col.name + "' has zero variance");
                info.center = mean;
                info.scale = sd;
                break;
            }
            case ColumnKind::binary: {
                std::vector<std::string> distinct(col.labels.begin(), col.labels.end());
                std::sort(distinct.begin(), distinct.end());
                distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
                if (distinct.size() != 2)
                    throw DataError("binary column '" + col.name + "' must take exactly two values, found " +
                                    std::to_string(distinct.size()));
                info.levels = std::move(distinct);
                break;
            }
            case ColumnKind::categorical: {
                std::vector<std::string> distinct(col.labels.begin(), col.labels.end());
                std::sort(distinct.begin(), distinct.end());
                distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
                if (distinct.size() < 2)
                    throw DataError("categorical column '" + col.name + "' has fewer than two observed levels");
                info.levels = std::move(distinct);
                break;
            }
        }
        map.covariates_.push_back(std::move(info));
    }
    map.finalize();
    return map;
}

/// Standardize `data` with the stored statistics of `map` (never recomputed).
inline DesignMatrix apply_feature_map(std::shared_ptr<const FeatureMap> map, const RawDataset& data) {
    if (!map) throw std::invalid_argument("apply_feature_map: null feature map");
    data.validate();
    const auto n = static_cast<Eigen::Index>(data.n_rows());
    DesignMatrix X{Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(map->p_columns())), {}, map};
    for (const auto& info : map->covariates()) {
        const RawColumn* col = data.find(info.name);
        if (col == nullptr) throw DataError("schema mismatch: column '" + info.name + "' is missing");
        if (col->kind != info.kind)
            throw DataError("schema mismatch: column '" + info.name + "' is " + std::string(to_string(col->kind)) +
                            ", expected " + std::string(to_string(info.kind)));
        const auto c0 = static_cast<Eigen::Index>(info.first_column);
        switch (info.kind) {
            case ColumnKind::continuous:
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double v = col->numeric[static_cast<std::size_t>(i)];
                    if (!std::isfinite(v)) throw DataError("column '" + info.name + "' has a non-finite value");
                    X.main(i, c0) = (v - info.center) / info.scale;
                }
                break;
            case ColumnKind::binary:
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto& v = col->labels[static_cast<std::size_t>(i)];
                    if (v == info.levels[0]) X.main(i, c0) = -1.0;
                    else if (v == info.levels[1]) X.main(i, c0) = 1.0;
                    else throw DataError("binary column '" + info.name + "' has unseen value '" + v + "'");
                }
                break;
            case ColumnKind::categorical: {
                const auto last = info.levels.size() - 1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto& v = col->labels[static_cast<std::size_t>(i)];
                    const auto it = std::lower_bound(info.levels.begin(), info.levels.end(), v);
                    if (it == info.levels.end() || *it != v)
                        throw DataError("categorical column '" + info.name + "' has unseen level '" + v + "'");
                    const auto level = static_cast<std::size_t>(it - info.levels.begin());
                    for (std::size_t k = 0; k < last; ++k)
                        X.main(i, c0 + static_cast<Eigen::Index>(k)) = level == last ? -1.0 : (level == k ? 1.0 : 0.0);
                }
                break;
            }
        }
    }
    X.interactions = expand_interactions(X.main, map->interaction_index());
    return X;
}

inline DesignMatrix build_design(const RawDataset& data) {
    return apply_feature_map(std::make_shared<const FeatureMap>(fit_feature_map(data)), data);
}

/// (1/n) sum_i x_ij x_ik for every interaction pair (j,k).
inline Eigen::VectorXd interaction_moments(const DesignMatrix& X) {
    if (X.n() < 2) throw std::invalid_argument("interaction_moments: need at least two rows");
    const auto& pairs = X.map->interaction_index();
    Eigen::VectorXd m(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t r = 0; r < pairs.size(); ++r)
        m(static_cast<Eigen::Index>(r)) = X.main.col(static_cast<Eigen::Index>(pairs[r].first))
                                              .dot(X.main.col(static_cast<Eigen::Index>(pairs[r].second))) /
                                          static_cast<double>(X.n());
    return m;
}

inline Eigen::VectorXd column_means(const DesignMatrix& X) { return X.main.colwise().mean().transpose(); }

}  // namespace linkshrink
