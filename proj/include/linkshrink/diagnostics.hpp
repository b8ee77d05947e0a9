#pragma once

// Convergence diagnostics on rank-normalized split chains (Vehtari et al.,
// 2021): R-hat is the larger of the bulk and folded statistics; ESS uses
// Geyer's initial monotone sequence on the combined autocorrelations and is
// capped at the number of draws.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "linkshrink/sampler.hpp"
#include "linkshrink/stats.hpp"

namespace linkshrink {

using Chains = std::vector<std::vector<double>>;

/// Each chain cut into two halves (the middle draw is dropped for odd lengths).
inline Chains split_chains(const Chains& chains) {
    Chains out;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
    }
    return out;
}

/// Pooled ranks (ties averaged) mapped through the normal quantile.
inline Chains rank_normalize(const Chains& chains) {
    std::vector<std::pair<double, std::size_t>> pooled;
    for (std::size_t m = 0; m < chains.size(); ++m)
        for (double v : chains[m]) pooled.emplace_back(v, pooled.size());
    const std::size_t S = pooled.size();
    std::vector<double> ranks(S);
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a].first < pooled[b].first; });
    for (std::size_t i = 0; i < S;) {
        std::size_t j = i;
        while (j + 1 < S && pooled[order[j + 1]].first == pooled[order[i]].first) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    Chains out;
    std::size_t idx = 0;
    for (const auto& c : chains) {
        std::vector<double> z(c.size());
        for (auto& v : z) v = normal_quantile((ranks[idx++] - 0.375) / (static_cast<double>(S) + 0.25));
        out.push_back(std::move(z));
    }
    return out;
}

/// Classical potential scale reduction of equal-length chains.
inline double basic_rhat(const Chains& chains) {
    const std::size_t M = chains.size();
    if (M < 2) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t N = chains.front().size();
    if (N < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> means(M), vars(M);
    for (std::size_t m = 0; m < M; ++m) {
        const auto& c = chains[m];
        double mu = 0.0;
        for (double v : c) mu += v;
        mu /= static_cast<double>(N);
        double ss = 0.0;
        for (double v : c) ss += (v - mu) * (v - mu);
        means[m] = mu;
        vars[m] = ss / static_cast<double>(N - 1);
    }
    const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(M);
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(M);
    double b_over_n = 0.0;
    for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
    b_over_n /= static_cast<double>(M - 1);
    if (!(W > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double var_plus = (static_cast<double>(N) - 1.0) / static_cast<double>(N) * W + b_over_n;
    return std::sqrt(var_plus / W);
}

/// max(bulk, folded) rank-normalized split-R-hat.
inline double split_rhat(const Chains& chains) {
    const Chains split = split_chains(chains);
    const double bulk = basic_rhat(rank_normalize(split));
    std::vector<double> all;
    for (const auto& c : split) all.insert(all.end(), c.begin(), c.end());
    const double med = median(all);
    Chains folded = split;
    for (auto& c : folded)
        for (auto& v : c) v = std::fabs(v - med);
    const double tail = basic_rhat(rank_normalize(folded));
    if (std::isnan(bulk)) return tail;
    if (std::isnan(tail)) return bulk;
    return std::max(bulk, tail);
}

/// ESS of equal-length chains via Geyer's initial monotone sequence.
inline double effective_sample_size(const Chains& chains) {
    const std::size_t M = chains.size();
    if (M == 0) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t N = chains.front().size();
    if (N < 4) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> means(M);
    for (std::size_t m = 0; m < M; ++m)
        means[m] = std::accumulate(chains[m].begin(), chains[m].end(), 0.0) / static_cast<double>(N);
    const auto mean_acov = [&](std::size_t lag) {
        double total = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            double acc = 0.0;
            for (std::size_t i = 0; i + lag < N; ++i) acc += (chains[m][i] - means[m]) * (chains[m][i + lag] - means[m]);
            total += acc / static_cast<double>(N);
        }
        return total / static_cast<double>(M);
    };
    const double acov0 = mean_acov(0);
    const double mean_var = acov0 * static_cast<double>(N) / (static_cast<double>(N) - 1.0);
    double var_plus = mean_var * (static_cast<double>(N) - 1.0) / static_cast<double>(N);
    if (M > 1) {
        const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(M);
        double v = 0.0;
        for (double mu : means) v += (mu - grand) * (mu - grand);
        var_plus += v / static_cast<double>(M - 1);
    }
    if (!(var_plus > 0.0)) return std::numeric_limits<double>::quiet_NaN();

    std::vector<double> rho(N + 1, 0.0);
    rho[0] = 1.0;
    double rho_even = 1.0;
    double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
    rho[1] = rho_odd;
    std::size_t t = 1;
    while (t + 5 < N && rho_even + rho_odd > 0.0) {
        rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
        rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
        if (rho_even + rho_odd >= 0.0) {
            rho[t + 1] = rho_even;
            rho[t + 2] = rho_odd;
        }
        t += 2;
    }
    const std::size_t max_t = t;
    if (rho_even > 0.0) rho[max_t + 1] = rho_even;
    for (std::size_t u = 1; u + 2 <= max_t; u += 2) {
        if (rho[u + 1] + rho[u + 2] > rho[u - 1] + rho[u]) {
            rho[u + 1] = 0.5 * (rho[u - 1] + rho[u]);
            rho[u + 2] = rho[u + 1];
        }
    }
    const double total = static_cast<double>(M * N);
    double tau = -1.0 + rho[max_t + 1];
    for (std::size_t u = 0; u <= max_t; ++u) tau += 2.0 * rho[u];
    tau = std::max(tau, 1.0 / std::log10(total));
    return std::min(total / tau, total);
}

/// Bulk ESS: rank-normalized split chains.
inline double bulk_ess(const Chains& chains) { return effective_sample_size(rank_normalize(split_chains(chains))); }

struct Diagnostics {
    std::vector<std::string> names;
    std::vector<double> rhat;  // NaN when unavailable
    std::vector<double> ess;   // NaN for constant parameters
    std::vector<std::string> warnings;
    std::vector<ChainCounters> counters;
};

inline Diagnostics compute_diagnostics(const PosteriorDraws& draws) {
    if (draws.empty()) throw std::invalid_argument("compute_diagnostics: no draws");
    Diagnostics out;
    out.names = draws.parameter_names();
    out.counters = draws.counters;
    const Eigen::MatrixXd m = draws.parameter_matrix();
    const std::size_t M = draws.n_chains;
    if (M < 2) out.warnings.push_back("single chain: R-hat omitted");
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        Chains chains(M);
        for (Eigen::Index d = 0; d < m.rows(); ++d) chains.at(draws.chain_ids[static_cast<std::size_t>(d)]).push_back(m(d, k));
        const bool constant = m.col(k).maxCoeff() == m.col(k).minCoeff();
        if (constant) {
            out.rhat.push_back(std::numeric_limits<double>::quiet_NaN());
            out.ess.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        out.rhat.push_back(M >= 2 ? split_rhat(chains) : std::numeric_limits<double>::quiet_NaN());
        out.ess.push_back(bulk_ess(chains));
    }
    return out;
}

}  // namespace linkshrink
