#pragma once

// Synthetic master datasets: covariates from a Gaussian copula, discretized
// per schema, plus independent standard-normal noise covariates; response
// drawn from the expanded interaction model with known coefficients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "linkshrink/design.hpp"
#include "linkshrink/errors.hpp"
#include "linkshrink/sampler.hpp"
#include "linkshrink/stats.hpp"

namespace linkshrink {

struct SchemaSpec {
    std::size_t n_continuous = 3;
    std::size_t n_binary = 3;
    std::vector<std::size_t> categorical_levels{5};
    std::size_t n_noise = 4;

    [[nodiscard]] std::size_t n_structural() const {
        return n_continuous + n_binary + categorical_levels.size();
    }
};

enum class TruthPattern {
    random,  // mains N(0, 0.3^2); interactions N(0, 0.1^2), 60% zeroed
    linked   // nonzero interactions only between columns with strong mains
};

struct SynthConfig {
    std::size_t n_master = 21570;
    std::size_t n_train = 1000;
    std::size_t B = 25;
    SchemaSpec schema;
    std::optional<Eigen::MatrixXd> dependence;  // structural covariates; default exchangeable 0.2
    std::optional<Eigen::VectorXd> true_beta;   // (alpha, mains, interactions)
    TruthPattern pattern = TruthPattern::random;
    double alpha = 0.5;
    double noise_sd = 1.0;
    std::uint64_t seed = 1;
};

struct SynthMaster {
    RawDataset data;
    std::shared_ptr<const FeatureMap> map;
    Eigen::VectorXd truth;  // alpha, beta_main, beta_int
    std::vector<std::string> noise_covariates;
};

inline Eigen::MatrixXd default_dependence(std::size_t k) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), 0.2);
    r.diagonal().setOnes();
    return r;
}

namespace detail {

inline std::string level_label(std::size_t l) {
    std::string s;
    do {
        s.insert(s.begin(), static_cast<char>('A' + l % 26));
        l /= 26;
    } while (l-- > 0);
    return s;
}

}  // namespace detail

/// Coefficients involving any of `covariates` (intercept excluded: false).
inline std::vector<bool> coefficients_involving(const FeatureMap& map, const std::vector<std::string>& covariates) {
    std::vector<bool> is_member(map.p_covariates(), false);
    for (const auto& name : covariates) is_member[map.covariate_index(name)] = true;
    std::vector<bool> out{false};
    for (std::size_t c = 0; c < map.p_columns(); ++c) out.push_back(is_member[map.group_of(c)]);
    for (const auto& [j, k] : map.interaction_index()) out.push_back(is_member[map.group_of(j)] || is_member[map.group_of(k)]);
    return out;
}

inline Eigen::VectorXd draw_truth(const SynthConfig& cfg, const FeatureMap& map,
                                  const std::vector<std::string>& noise, std::mt19937_64& rng) {
    const std::size_t p = map.p_columns();
    const std::size_t q = map.q();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(1 + p + q));
    beta(0) = cfg.alpha;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<bool> noisy(map.p_covariates(), false);
    for (const auto& n : noise) noisy[map.covariate_index(n)] = true;

    if (cfg.pattern == TruthPattern::random) {
        for (std::size_t c = 0; c < p; ++c) {
            const double v = 0.3 * normal(rng);
            if (!noisy[map.group_of(c)]) beta(static_cast<Eigen::Index>(1 + c)) = v;
        }
        for (std::size_t r = 0; r < q; ++r) {
            const double v = 0.1 * normal(rng);
            const bool keep = unif(rng) >= 0.6;
            const auto [j, k] = map.interaction_index()[r];
            if (keep && !noisy[map.group_of(j)] && !noisy[map.group_of(k)])
                beta(static_cast<Eigen::Index>(1 + p + r)) = v;
        }
        return beta;
    }

    // Linked: a random half of the structural covariates is strong; only
    // pairs of strong columns interact. Effect sizes are bounded away from 0.
    std::vector<std::size_t> structural;
    for (std::size_t g = 0; g < map.p_covariates(); ++g)
        if (!noisy[g]) structural.push_back(g);
    std::vector<bool> strong(map.p_covariates(), false);
    std::size_t n_strong = 0;
    for (auto g : structural)
        if (unif(rng) < 0.5) {
            strong[g] = true;
            ++n_strong;
        }
    for (std::size_t i = 0; n_strong < std::min<std::size_t>(2, structural.size()); ++i)
        if (!strong[structural[i]]) {
            strong[structural[i]] = true;
            ++n_strong;
        }
    const auto sign = [&] { return unif(rng) < 0.5 ? -1.0 : 1.0; };
    for (std::size_t c = 0; c < p; ++c) {
        const double v = sign() * (0.4 + 0.4 * unif(rng));
        if (strong[map.group_of(c)]) beta(static_cast<Eigen::Index>(1 + c)) = v;
    }
    for (std::size_t r = 0; r < q; ++r) {
        const double v = sign() * (0.2 + 0.2 * unif(rng));
        const bool keep = unif(rng) < 0.7;
        const auto [j, k] = map.interaction_index()[r];
        if (keep && strong[map.group_of(j)] && strong[map.group_of(k)]) beta(static_cast<Eigen::Index>(1 + p + r)) = v;
    }
    return beta;
}

inline SynthMaster generate_master(const SynthConfig& cfg) {
    const SchemaSpec& sc = cfg.schema;
    const std::size_t k = sc.n_structural();
    const std::size_t N = cfg.n_master;
    if (N < 2) throw DataError("n_master must be at least 2");
    if (!(cfg.noise_sd >= 0.0)) throw DataError("noise_sd must be nonnegative");
    for (auto L : sc.categorical_levels)
        if (L < 2) throw DataError("categorical covariates need at least two levels");
    const Eigen::MatrixXd R = cfg.dependence ? *cfg.dependence : default_dependence(k);
    if (R.rows() != static_cast<Eigen::Index>(k) || R.cols() != static_cast<Eigen::Index>(k))
        throw DataError("dependence matrix must be " + std::to_string(k) + " x " + std::to_string(k));
    const Eigen::LLT<Eigen::MatrixXd> llt(R);
    if (llt.info() != Eigen::Success || !R.isApprox(R.transpose()))
        throw DataError("dependence matrix is not symmetric positive definite");
    const Eigen::MatrixXd L = llt.matrixL();

    auto rng = make_chain_rng(cfg.seed, 0x73796e7468ULL);
    std::normal_distribution<double> normal(0.0, 1.0);

    SynthMaster out;
    auto& cols = out.data.columns;
    for (std::size_t j = 0; j < sc.n_continuous; ++j) cols.push_back({"cont" + std::to_string(j + 1), ColumnKind::continuous, {}, {}});
    for (std::size_t j = 0; j < sc.n_binary; ++j) cols.push_back({"bin" + std::to_string(j + 1), ColumnKind::binary, {}, {}});
    for (std::size_t j = 0; j < sc.categorical_levels.size(); ++j)
        cols.push_back({"cat" + std::to_string(j + 1), ColumnKind::categorical, {}, {}});
    for (std::size_t j = 0; j < sc.n_noise; ++j) {
        cols.push_back({"noise" + std::to_string(j + 1), ColumnKind::continuous, {}, {}});
        out.noise_covariates.push_back(cols.back().name);
    }
    static constexpr double kPrevalence[] = {0.5, 0.3, 0.6};

    Eigen::VectorXd u(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = normal(rng);
        const Eigen::VectorXd z = L * u;
        std::size_t col = 0;
        for (std::size_t j = 0; j < sc.n_continuous; ++j, ++col) cols[col].numeric.push_back(z(static_cast<Eigen::Index>(col)));
        for (std::size_t j = 0; j < sc.n_binary; ++j, ++col) {
            const double prev = kPrevalence[j % 3];
            cols[col].labels.emplace_back(normal_cdf(z(static_cast<Eigen::Index>(col))) < prev ? "yes" : "no");
        }
        for (std::size_t j = 0; j < sc.categorical_levels.size(); ++j, ++col) {
            const std::size_t levels = sc.categorical_levels[j];
            const double cdf = normal_cdf(z(static_cast<Eigen::Index>(col)));
            const auto l = std::min(levels - 1, static_cast<std::size_t>(cdf * static_cast<double>(levels)));
            cols[col].labels.push_back(detail::level_label(l));
        }
        for (std::size_t j = 0; j < sc.n_noise; ++j, ++col) cols[col].numeric.push_back(normal(rng));
    }

    out.map = std::make_shared<const FeatureMap>(fit_feature_map(out.data));
    const DesignMatrix X = apply_feature_map(out.map, out.data);
    const std::size_t n_coef = 1 + out.map->p_columns() + out.map->q();
    if (cfg.true_beta) {
        if (static_cast<std::size_t>(cfg.true_beta->size()) != n_coef)
            throw DataError("true_beta must have " + std::to_string(n_coef) + " entries");
        out.truth = *cfg.true_beta;
    } else {
        out.truth = draw_truth(cfg, *out.map, out.noise_covariates, rng);
    }
    const Eigen::VectorXd mean = X.with_intercept() * out.truth;
    out.data.response_name = "y";
    out.data.response.resize(N);
    for (std::size_t i = 0; i < N; ++i) out.data.response[i] = mean(static_cast<Eigen::Index>(i)) + cfg.noise_sd * normal(rng);
    return out;
}

/// B index blocks of size n_train from a random permutation of [0, N).
/// Blocks are disjoint when B * n_train <= N; otherwise each block first
/// uses indices not yet assigned, then fills up from the rest without
/// replacement within the block.
inline std::vector<std::vector<std::size_t>> split_training_sets(std::size_t N, std::size_t n_train, std::size_t B,
                                                                 std::uint64_t seed) {
    if (n_train == 0 || B == 0) throw DataError("n_train and B must be positive");
    if (n_train > N)
        throw DataError("training budget exceeded: n_train=" + std::to_string(n_train) + " > N=" + std::to_string(N));
    auto rng = make_chain_rng(seed, 0x73706c6974ULL);
    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> blocks;
    std::size_t cursor = 0;
    for (std::size_t b = 0; b < B; ++b) {
        std::vector<std::size_t> block;
        block.reserve(n_train);
        while (block.size() < n_train && cursor < N) block.push_back(perm[cursor++]);
        if (block.size() < n_train) {
            std::vector<bool> taken(N, false);
            for (auto i : block) taken[i] = true;
            std::vector<std::size_t> rest;
            for (auto i : perm)
                if (!taken[i]) rest.push_back(i);
            std::shuffle(rest.begin(), rest.end(), rng);
            for (std::size_t t = 0; block.size() < n_train; ++t) block.push_back(rest[t]);
        }
        blocks.push_back(std::move(block));
    }
    return blocks;
}

}  // namespace linkshrink
