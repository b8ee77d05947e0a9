#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linkshrink/sampler.hpp"
#include "linkshrink/shapley.hpp"
#include "linkshrink/stats.hpp"

namespace linkshrink {

/// Posterior of E_ij = b_j + sum_k b_jk x_ik for one covariate, per individual.
struct UnitEffect {
    std::string covariate;
    std::vector<IntervalSummary> per_individual;
};

inline UnitEffect unit_effect_posterior(const PosteriorDraws& draws, const Eigen::MatrixXd& x_main,
                                        const std::string& covariate, double level) {
    if (draws.empty()) throw std::invalid_argument("unit_effect_posterior: no draws");
    const auto& map = *draws.map;
    const std::size_t g = map.covariate_index(covariate);
    const auto& info = map.covariates()[g];
    if (info.kind == ColumnKind::categorical)
        throw DataError("unit effect is undefined for categorical covariate '" + covariate +
                        "'; use Shapley values instead");
    if (x_main.cols() != static_cast<Eigen::Index>(map.p_columns()))
        throw std::invalid_argument("unit_effect_posterior: x has wrong number of columns");
    const std::size_t col = info.first_column;
    std::vector<std::pair<std::size_t, std::size_t>> partners;  // (other column, r)
    const auto& pairs = map.interaction_index();
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        if (pairs[r].first == col) partners.emplace_back(pairs[r].second, r);
        else if (pairs[r].second == col) partners.emplace_back(pairs[r].first, r);
    }
    UnitEffect out{covariate, {}};
    std::vector<double> values(draws.size());
    for (Eigen::Index i = 0; i < x_main.rows(); ++i) {
        for (std::size_t d = 0; d < draws.size(); ++d) {
            const auto& s = draws.states[d];
            double e = s.beta_main(static_cast<Eigen::Index>(col));
            for (const auto& [other, r] : partners)
                e += s.beta_int(static_cast<Eigen::Index>(r)) * x_main(i, static_cast<Eigen::Index>(other));
            values[d] = e;
        }
        out.per_individual.push_back(summarize(values, level));
    }
    return out;
}

/// Mean absolute attribution per covariate. In general I != I_main + I_int.
struct GlobalImportance {
    std::vector<std::string> covariates;
    std::vector<double> total;
    std::vector<double> main;
    std::vector<double> interaction;
};

/// Computed from posterior-mean attributions.
inline GlobalImportance global_importance(const ShapleyResult& shap) {
    if (shap.n_individuals == 0) throw std::invalid_argument("global_importance: empty test set");
    const std::size_t P = shap.n_covariates();
    GlobalImportance out{shap.covariates, std::vector<double>(P, 0.0), std::vector<double>(P, 0.0),
                         std::vector<double>(P, 0.0)};
    for (std::size_t i = 0; i < shap.n_individuals; ++i) {
        for (std::size_t c = 0; c < P; ++c) {
            out.total[c] += std::fabs(shap.total(i, c).mean);
            out.main[c] += std::fabs(shap.main(i, c).mean);
            out.interaction[c] += std::fabs(shap.interaction(i, c).mean);
        }
    }
    const auto n = static_cast<double>(shap.n_individuals);
    for (std::size_t c = 0; c < P; ++c) {
        out.total[c] /= n;
        out.main[c] /= n;
        out.interaction[c] /= n;
    }
    return out;
}

/// Variant averaging |phi| within each draw, then over draws.
inline GlobalImportance global_importance_per_draw(const PosteriorDraws& draws, const ShapleyQuery& query) {
    if (draws.empty()) throw std::invalid_argument("global_importance_per_draw: no draws");
    query.validate();
    const auto m = query.individuals.rows();
    if (m == 0) throw std::invalid_argument("global_importance_per_draw: empty test set");
    const auto P = static_cast<Eigen::Index>(query.map->p_covariates());
    Eigen::ArrayXd tot = Eigen::ArrayXd::Zero(P), mn = Eigen::ArrayXd::Zero(P), in = Eigen::ArrayXd::Zero(P);
    for (const auto& s : draws.states) {
        const auto agg = shapley_categorical(shapley_fast(s, query), *query.map);
        tot += agg.total().cwiseAbs().colwise().mean().transpose().array();
        mn += agg.main.cwiseAbs().colwise().mean().transpose().array();
        in += agg.interaction.cwiseAbs().colwise().mean().transpose().array();
    }
    const auto D = static_cast<double>(draws.size());
    GlobalImportance out{covariate_names(*query.map), {}, {}, {}};
    for (Eigen::Index c = 0; c < P; ++c) {
        out.total.push_back(tot(c) / D);
        out.main.push_back(mn(c) / D);
        out.interaction.push_back(in(c) / D);
    }
    return out;
}

}  // namespace linkshrink
