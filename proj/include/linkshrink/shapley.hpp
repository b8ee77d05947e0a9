#pragma once

// Exact interventional Shapley values for
//   f(x) = alpha + sum_j b_j x_j + sum_{j<k} b_jk x_j x_k.
//
// Closed form per column p (linear in the number of partners):
//   phi_p = b_p (x*_p - E[x_p])
//         + 1/2 sum_j b_jp (E[x_j] x*_p - E[x_j x_p])
//         + 1/2 sum_j b_jp (x*_j x*_p - x*_j E[x_p])
// The first term is phi_main, the remainder phi_int. A categorical covariate
// is a single player; its value is the sum over its contrast columns.
//
// The subset-enumeration path evaluates the defining weighted sum directly
// and serves as the reference implementation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linkshrink/design.hpp"
#include "linkshrink/model.hpp"
#include "linkshrink/parallel.hpp"
#include "linkshrink/sampler.hpp"
#include "linkshrink/stats.hpp"

namespace linkshrink {

/// Individuals to explain plus the plug-in moments of the reference sample.
struct ShapleyQuery {
    Eigen::MatrixXd individuals;  // m x p, standardized main columns
    Eigen::VectorXd means;        // E[x_j], length p
    Eigen::VectorXd moments;      // E[x_j x_k], aligned with interaction_index
    std::shared_ptr<const FeatureMap> map;

    void validate() const {
        if (!map) throw std::invalid_argument("ShapleyQuery: missing feature map");
        const auto p = static_cast<Eigen::Index>(map->p_columns());
        if (individuals.cols() != p || means.size() != p || moments.size() != static_cast<Eigen::Index>(map->q()))
            throw std::invalid_argument("ShapleyQuery: dimensions do not match the feature map");
    }
};

/// Query for the rows of `test`, moments taken from `reference`.
inline ShapleyQuery make_shapley_query(const DesignMatrix& test, const DesignMatrix& reference) {
    if (!(*test.map == *reference.map)) throw std::invalid_argument("make_shapley_query: feature maps differ");
    return {test.main, column_means(reference), interaction_moments(reference), reference.map};
}

/// Per-individual attributions split into main and interaction parts.
struct ShapleyValues {
    Eigen::MatrixXd main;
    Eigen::MatrixXd interaction;

    [[nodiscard]] Eigen::MatrixXd total() const { return main + interaction; }
};

inline void check_coefficients(const ModelState& s, const FeatureMap& map) {
    if (static_cast<std::size_t>(s.beta_main.size()) != map.p_columns() ||
        static_cast<std::size_t>(s.beta_int.size()) != map.q())
        throw std::invalid_argument("coefficients are not aligned with the feature map");
}

/// Closed-form attribution for every design column.
inline ShapleyValues shapley_fast(const ModelState& s, const ShapleyQuery& query) {
    query.validate();
    check_coefficients(s, *query.map);
    const auto& pairs = query.map->interaction_index();
    const Eigen::Index m = query.individuals.rows();
    const Eigen::Index p = query.individuals.cols();
    ShapleyValues out{Eigen::MatrixXd(m, p), Eigen::MatrixXd::Zero(m, p)};
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto x = query.individuals.row(i);
        for (Eigen::Index c = 0; c < p; ++c) out.main(i, c) = s.beta_main(c) * (x(c) - query.means(c));
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            const auto j = static_cast<Eigen::Index>(pairs[r].first);
            const auto k = static_cast<Eigen::Index>(pairs[r].second);
            const double b = s.beta_int(static_cast<Eigen::Index>(r));
            const double mom = query.moments(static_cast<Eigen::Index>(r));
            const double both = x(j) * x(k);
            out.interaction(i, k) += 0.5 * b * ((query.means(j) * x(k) - mom) + (both - x(j) * query.means(k)));
            out.interaction(i, j) += 0.5 * b * ((query.means(k) * x(j) - mom) + (both - x(k) * query.means(j)));
        }
    }
    return out;
}

/// Sums contrast-column attributions within each categorical covariate.
inline ShapleyValues shapley_categorical(const ShapleyValues& per_column, const FeatureMap& map) {
    const Eigen::Index m = per_column.main.rows();
    const auto P = static_cast<Eigen::Index>(map.p_covariates());
    ShapleyValues out{Eigen::MatrixXd::Zero(m, P), Eigen::MatrixXd::Zero(m, P)};
    for (Eigen::Index c = 0; c < per_column.main.cols(); ++c) {
        const auto g = static_cast<Eigen::Index>(map.group_of(static_cast<std::size_t>(c)));
        out.main.col(g) += per_column.main.col(c);
        out.interaction.col(g) += per_column.interaction.col(c);
    }
    return out;
}

enum class PlayerMode {
    covariates,  // categorical groups are single players (p- players)
    columns      // every design column is a player
};

inline constexpr std::size_t kMaxBruteForcePlayers = 20;

/// Shapley values by enumerating all coalitions. Non-players are
/// marginalized with first and second moments, which is exact for f.
inline ShapleyValues shapley_bruteforce(const ModelState& s, const ShapleyQuery& query,
                                        PlayerMode mode = PlayerMode::covariates) {
    query.validate();
    check_coefficients(s, *query.map);
    const auto& map = *query.map;
    const std::size_t p = map.p_columns();
    std::vector<std::size_t> player_of(p);
    for (std::size_t c = 0; c < p; ++c) player_of[c] = mode == PlayerMode::columns ? c : map.group_of(c);
    const std::size_t P = mode == PlayerMode::columns ? p : map.p_covariates();
    if (P > kMaxBruteForcePlayers)
        throw std::invalid_argument("shapley_bruteforce: " + std::to_string(P) + " players exceeds the limit of " +
                                    std::to_string(kMaxBruteForcePlayers));
    const auto& pairs = map.interaction_index();
    const std::uint64_t n_sets = std::uint64_t{1} << P;

    // w(|S|) = 1 / (P * C(P-1, |S|))
    std::vector<double> weight(P);
    for (std::size_t k = 0; k < P; ++k) {
        double binom = 1.0;
        for (std::size_t t = 0; t < k; ++t) binom = binom * static_cast<double>(P - 1 - t) / static_cast<double>(t + 1);
        weight[k] = 1.0 / (static_cast<double>(P) * binom);
    }

    const Eigen::Index m = query.individuals.rows();
    ShapleyValues out{Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(P)),
                      Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(P))};
    std::vector<double> nu_main(n_sets), nu_int(n_sets);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto x = query.individuals.row(i);
        for (std::uint64_t set = 0; set < n_sets; ++set) {
            const auto fixed = [&](std::size_t col) { return ((set >> player_of[col]) & 1U) != 0; };
            double vm = s.alpha;
            for (std::size_t c = 0; c < p; ++c) {
                const auto cc = static_cast<Eigen::Index>(c);
                vm += s.beta_main(cc) * (fixed(c) ? x(cc) : query.means(cc));
            }
            double vi = 0.0;
            for (std::size_t r = 0; r < pairs.size(); ++r) {
                const auto j = static_cast<Eigen::Index>(pairs[r].first);
                const auto k = static_cast<Eigen::Index>(pairs[r].second);
                const bool fj = fixed(pairs[r].first);
                const bool fk = fixed(pairs[r].second);
                double term = 0.0;
                if (fj && fk) term = x(j) * x(k);
                else if (fj) term = x(j) * query.means(k);
                else if (fk) term = query.means(j) * x(k);
                else term = query.moments(static_cast<Eigen::Index>(r));
                vi += s.beta_int(static_cast<Eigen::Index>(r)) * term;
            }
            nu_main[set] = vm;
            nu_int[set] = vi;
        }
        for (std::size_t player = 0; player < P; ++player) {
            const std::uint64_t bit = std::uint64_t{1} << player;
            double acc_main = 0.0;
            double acc_int = 0.0;
            for (std::uint64_t set = 0; set < n_sets; ++set) {
                if (set & bit) continue;
                const double w = weight[static_cast<std::size_t>(__builtin_popcountll(set))];
                acc_main += w * (nu_main[set | bit] - nu_main[set]);
                acc_int += w * (nu_int[set | bit] - nu_int[set]);
            }
            out.main(i, static_cast<Eigen::Index>(player)) = acc_main;
            out.interaction(i, static_cast<Eigen::Index>(player)) = acc_int;
        }
    }
    return out;
}

/// f(x*) for every individual.
inline Eigen::VectorXd predict_main_columns(const ModelState& s, const Eigen::MatrixXd& x_main,
                                            std::span<const ColumnPair> pairs) {
    return (x_main * s.beta_main + expand_interactions(x_main, pairs) * s.beta_int).array() + s.alpha;
}

/// alpha + sum b_j E[x_j] + sum b_jk E[x_j x_k], the value attributions sum away from.
inline double plug_in_mean_prediction(const ModelState& s, const ShapleyQuery& query) {
    return s.alpha + s.beta_main.dot(query.means) + s.beta_int.dot(query.moments);
}

/// Posterior summaries per (individual, covariate).
struct ShapleyResult {
    std::vector<std::string> covariates;
    std::size_t n_individuals = 0;
    std::vector<IntervalSummary> phi;  // row-major: individual * covariates.size() + c
    std::vector<IntervalSummary> phi_main;
    std::vector<IntervalSummary> phi_int;

    [[nodiscard]] std::size_t n_covariates() const { return covariates.size(); }
    [[nodiscard]] std::size_t index(std::size_t i, std::size_t c) const { return i * covariates.size() + c; }
    [[nodiscard]] const IntervalSummary& total(std::size_t i, std::size_t c) const { return phi.at(index(i, c)); }
    [[nodiscard]] const IntervalSummary& main(std::size_t i, std::size_t c) const { return phi_main.at(index(i, c)); }
    [[nodiscard]] const IntervalSummary& interaction(std::size_t i, std::size_t c) const { return phi_int.at(index(i, c)); }
};

inline std::vector<std::string> covariate_names(const FeatureMap& map) {
    std::vector<std::string> out;
    for (const auto& c : map.covariates()) out.push_back(c.name);
    return out;
}

/// Closed form applied per retained draw, aggregated to covariates.
inline ShapleyResult shapley_posterior(const PosteriorDraws& draws, const ShapleyQuery& query, double level,
                                       std::size_t threads = 1) {
    if (draws.empty()) throw std::invalid_argument("shapley_posterior: no draws");
    query.validate();
    const auto& map = *query.map;
    const std::size_t m = static_cast<std::size_t>(query.individuals.rows());
    const std::size_t P = map.p_covariates();
    const std::size_t D = draws.size();
    ShapleyResult out;
    out.covariates = covariate_names(map);
    out.n_individuals = m;
    out.phi.resize(m * P);
    out.phi_main.resize(m * P);
    out.phi_int.resize(m * P);
    parallel_for(m, threads, [&](std::size_t i) {
        ShapleyQuery single{query.individuals.row(static_cast<Eigen::Index>(i)), query.means, query.moments, query.map};
        std::vector<std::vector<double>> tot(P, std::vector<double>(D)), mn(P, std::vector<double>(D)),
            in(P, std::vector<double>(D));
        for (std::size_t d = 0; d < D; ++d) {
            const auto agg = shapley_categorical(shapley_fast(draws.states[d], single), map);
            for (std::size_t c = 0; c < P; ++c) {
                const auto cc = static_cast<Eigen::Index>(c);
                mn[c][d] = agg.main(0, cc);
                in[c][d] = agg.interaction(0, cc);
                tot[c][d] = mn[c][d] + in[c][d];
            }
        }
        for (std::size_t c = 0; c < P; ++c) {
            out.phi[i * P + c] = summarize(tot[c], level);
            out.phi_main[i * P + c] = summarize(mn[c], level);
            out.phi_int[i * P + c] = summarize(in[c], level);
        }
    });
    return out;
}

}  // namespace linkshrink
