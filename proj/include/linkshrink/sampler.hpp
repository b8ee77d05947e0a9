#pragma once

// Blocked Gibbs sampler for the linked-shrinkage model.
//
// One sweep:
//   (a) (alpha, beta_main, beta_int) jointly from their Gaussian conditional,
//       precision = X'X / sigma2 + diag(prior precisions); the intercept prior
//       precision is 1 / intercept_sd^2 and is not scaled by sigma2;
//   (b) sigma2 from its inverse-gamma conditional;
//   (c) every local scale by slice sampling on log(tau);
//   (d) tau_int by slice sampling on its bounded support.
// The Gram matrix of [1 | X] is cached; only the diagonal changes per sweep.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "linkshrink/design.hpp"
#include "linkshrink/errors.hpp"
#include "linkshrink/model.hpp"
#include "linkshrink/parallel.hpp"
#include "linkshrink/slice.hpp"
#include "linkshrink/stats.hpp"

namespace linkshrink {

struct SamplerConfig {
    std::size_t n_chains = 4;
    std::size_t n_warmup = 2500;
    std::size_t n_keep = 2500;
    std::size_t thin = 1;
    std::uint64_t seed = 20240101;
    double slice_width = 1.0;  // on log(tau)
    int slice_max_steps = 50;
    std::size_t threads = 0;  // 0: default_threads()

    // Testing switches: hold the scales (tau, tau_int) and/or sigma2 at their
    // initial values.
    bool freeze_scales = false;
    bool freeze_sigma2 = false;
    std::optional<ModelState> initial;

    void validate() const {
        if (n_chains < 1) throw std::invalid_argument("n_chains must be at least 1");
        if (n_keep < 1) throw std::invalid_argument("n_keep must be at least 1");
        if (thin < 1) throw std::invalid_argument("thin must be at least 1");
        if (!(slice_width > 0.0)) throw std::invalid_argument("slice_width must be positive");
        if (slice_max_steps < 1) throw std::invalid_argument("slice_max_steps must be at least 1");
    }
};

struct ChainCounters {
    std::uint64_t sweeps = 0;
    SliceCounters tau;
    SliceCounters tau_int;
};

struct ResponseScale {
    double center = 0.0;
    double scale = 1.0;
};

/// Independent stream for one chain, derived from (seed, chain id).
inline std::mt19937_64 make_chain_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6c696e6bU};
    return std::mt19937_64(seq);
}

class GibbsKernel {
  public:
    struct Options {
        double slice_width = 1.0;
        int slice_max_steps = 50;
        bool freeze_scales = false;
        bool freeze_sigma2 = false;
    };

    GibbsKernel(ModelSpec spec, const DesignMatrix& X, std::span<const double> y, Options opts)
        : spec_(spec),
          opts_(opts),
          xa_(X.with_intercept()),
          pairs_(X.map->interaction_index()),
          p_(static_cast<std::size_t>(X.p())),
          q_(static_cast<std::size_t>(X.q())) {
        spec_.validate();
        gram_ = xa_.transpose() * xa_;
        set_response(y);
    }

    void set_response(std::span<const double> y) {
        if (y.size() != static_cast<std::size_t>(xa_.rows()))
            throw std::invalid_argument("response length does not match design rows");
        y_ = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
        if (!y_.allFinite()) throw DataError("response contains non-finite values");
        xty_ = xa_.transpose() * y_;
    }

    [[nodiscard]] std::size_t p() const { return p_; }
    [[nodiscard]] std::size_t q() const { return q_; }
    [[nodiscard]] const std::vector<ColumnPair>& pairs() const { return pairs_; }

    template <class Rng>
    void sweep(ModelState& s, Rng& rng, ChainCounters& counters) const {
        update_coefficients(s, rng);
        if (!opts_.freeze_sigma2) update_sigma2(s, rng);
        if (!opts_.freeze_scales) {
            update_taus(s, rng, counters.tau);
            if (samples_tau_int(spec_.variant)) update_tau_int(s, rng, counters.tau_int);
        }
        ++counters.sweeps;
    }

  private:
    template <class Rng>
    void update_coefficients(ModelState& s, Rng& rng) const {
        const auto table = prior_variances(spec_, s, pairs_);
        const auto K = xa_.cols();
        Eigen::MatrixXd prec = gram_ / s.sigma2;
        prec(0, 0) += 1.0 / (spec_.intercept_sd * spec_.intercept_sd);
        for (std::size_t j = 0; j < p_; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            prec(1 + jj, 1 + jj) += 1.0 / (s.sigma2 * table.main_rel_var(jj));
        }
        for (std::size_t r = 0; r < q_; ++r) {
            const auto rr = static_cast<Eigen::Index>(r);
            const auto d = 1 + static_cast<Eigen::Index>(p_) + rr;
            prec(d, d) += 1.0 / (s.sigma2 * table.int_rel_var(rr));
        }
        if (!prec.diagonal().allFinite()) throw NumericalError(describe("non-finite prior precision", s));
        const Eigen::LLT<Eigen::MatrixXd> llt(prec);
        if (llt.info() != Eigen::Success) throw NumericalError(describe("Cholesky of coefficient precision failed", s));
        const Eigen::VectorXd mean = llt.solve(xty_ / s.sigma2);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(K);
        for (Eigen::Index i = 0; i < K; ++i) z(i) = normal(rng);
        const Eigen::VectorXd coef = mean + llt.matrixU().solve(z);
        s.alpha = coef(0);
        s.beta_main = coef.segment(1, static_cast<Eigen::Index>(p_));
        s.beta_int = coef.tail(static_cast<Eigen::Index>(q_));
    }

    template <class Rng>
    void update_sigma2(ModelState& s, Rng& rng) const {
        Eigen::VectorXd coef(xa_.cols());
        coef << s.alpha, s.beta_main, s.beta_int;
        const double rss = (y_ - xa_ * coef).squaredNorm();
        // Relative variances do not depend on sigma2 for the shrunk coefficients.
        const auto table = prior_variances(spec_, s, pairs_);
        double shape = spec_.sigma2_shape + 0.5 * static_cast<double>(y_.size());
        double rate = spec_.sigma2_rate + 0.5 * rss;
        if (spec_.variant != Variant::bay0int) {
            shape += 0.5 * static_cast<double>(p_);
            rate += 0.5 * (s.beta_main.array().square() / table.main_rel_var.array()).sum();
        }
        shape += 0.5 * static_cast<double>(q_);
        rate += 0.5 * (s.beta_int.array().square() / table.int_rel_var.array()).sum();
        std::gamma_distribution<double> gamma(shape, 1.0);
        const double draw = rate / gamma(rng);
        if (!(draw > 0.0) || !std::isfinite(draw)) throw NumericalError(describe("invalid sigma2 draw", s));
        s.sigma2 = draw;
    }

    template <class Rng>
    void update_taus(ModelState& s, Rng& rng, SliceCounters& counters) const {
        for (Eigen::Index j = 0; j < s.tau.size(); ++j) {
            const TauConditional cond(spec_, s, pairs_, static_cast<std::size_t>(j));
            const auto target = [&cond](double u) { return cond(std::exp(u)) + u; };
            double u = 0.0;
            try {
                u = slice_sample(std::log(s.tau(j)), target, opts_.slice_width, opts_.slice_max_steps, rng, counters);
            } catch (const NumericalError& e) {
                throw NumericalError(describe(std::string(e.what()) + " (tau index " + std::to_string(j) + ")", s));
            }
            s.tau(j) = std::exp(u);
        }
    }

    template <class Rng>
    void update_tau_int(ModelState& s, Rng& rng, SliceCounters& counters) const {
        double scaled = 0.0;
        for (std::size_t r = 0; r < q_; ++r) {
            const double w = linked_interaction_var(spec_.variant, s.tau(static_cast<Eigen::Index>(pairs_[r].first)),
                                                    s.tau(static_cast<Eigen::Index>(pairs_[r].second)), 1.0);
            const double b = s.beta_int(static_cast<Eigen::Index>(r));
            scaled += 0.5 * b * b / (s.sigma2 * w);
        }
        const double half_q = 0.5 * static_cast<double>(q_);
        const auto target = [half_q, scaled](double t) { return -half_q * std::log(t) - scaled / t; };
        s.tau_int = slice_sample_bounded(s.tau_int, target, spec_.tau_int_lower, spec_.tau_int_upper, rng, counters);
    }

    static std::string describe(const std::string& what, const ModelState& s) {
        std::ostringstream os;
        os.precision(6);
        os << what << " [alpha=" << s.alpha << " sigma2=" << s.sigma2 << " tau_int=" << s.tau_int << " tau=("
           << s.tau.transpose() << ") |beta_main|max=" << (s.beta_main.size() ? s.beta_main.cwiseAbs().maxCoeff() : 0.0)
           << "]";
        return os.str();
    }

    ModelSpec spec_;
    Options opts_;
    Eigen::MatrixXd xa_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd y_;
    Eigen::VectorXd xty_;
    std::vector<ColumnPair> pairs_;
    std::size_t p_;
    std::size_t q_;
};

/// Retained draws, chain-major.
struct PosteriorDraws {
    ModelSpec spec;
    std::shared_ptr<const FeatureMap> map;
    std::vector<ModelState> states;
    std::vector<std::size_t> chain_ids;
    std::vector<std::size_t> draw_index;
    std::size_t n_chains = 0;
    ResponseScale response_scale;
    std::vector<ChainCounters> counters;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] bool empty() const { return states.empty(); }

    /// alpha, b_<col>..., b_<a>:<b>..., tau_<...>..., tau_int, sigma2
    [[nodiscard]] std::vector<std::string> parameter_names() const {
        std::vector<std::string> names{"alpha"};
        for (const auto& c : map->column_names()) names.push_back("b_" + c);
        for (std::size_t r = 0; r < map->q(); ++r) names.push_back("b_" + map->interaction_name(r));
        for (const auto& c : map->column_names()) names.push_back("tau_" + c);
        if (spec.variant == Variant::bayloc)
            for (std::size_t r = 0; r < map->q(); ++r) names.push_back("tau_" + map->interaction_name(r));
        names.push_back("tau_int");
        names.push_back("sigma2");
        return names;
    }

    [[nodiscard]] static Eigen::VectorXd flatten(const ModelState& s) {
        Eigen::VectorXd v(1 + s.beta_main.size() + s.beta_int.size() + s.tau.size() + 2);
        v << s.alpha, s.beta_main, s.beta_int, s.tau, s.tau_int, s.sigma2;
        return v;
    }

    /// draws x parameters, in parameter_names() order.
    [[nodiscard]] Eigen::MatrixXd parameter_matrix() const {
        if (states.empty()) return {};
        Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size()), flatten(states.front()).size());
        for (std::size_t d = 0; d < states.size(); ++d) m.row(static_cast<Eigen::Index>(d)) = flatten(states[d]).transpose();
        return m;
    }

    /// Coefficient vector (alpha, beta_main, beta_int) of one draw.
    [[nodiscard]] Eigen::VectorXd coefficients(std::size_t d) const {
        const auto& s = states.at(d);
        Eigen::VectorXd v(1 + s.beta_main.size() + s.beta_int.size());
        v << s.alpha, s.beta_main, s.beta_int;
        return v;
    }

    [[nodiscard]] Eigen::VectorXd posterior_mean_coefficients() const {
        if (states.empty()) throw std::invalid_argument("posterior mean of empty draws");
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(coefficients(0).size());
        for (std::size_t d = 0; d < states.size(); ++d) acc += coefficients(d);
        return acc / static_cast<double>(states.size());
    }
};

inline PosteriorDraws run_sampler(const ModelSpec& spec, const DesignMatrix& X, std::span<const double> y,
                                  const SamplerConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (X.n() < 2) throw DataError("sampler needs at least two rows");
    const auto p = static_cast<std::size_t>(X.p());
    const auto q = static_cast<std::size_t>(X.q());

    const GibbsKernel kernel(spec, X, y,
                             {cfg.slice_width, cfg.slice_max_steps, cfg.freeze_scales, cfg.freeze_sigma2});
    ModelState init;
    if (cfg.initial) {
        init = *cfg.initial;
    } else {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        double ss = 0.0;
        for (double v : y) ss += (v - mean) * (v - mean);
        init = initial_state(spec, p, q, ss / static_cast<double>(y.size() - 1));
    }
    check_state_shape(spec, init, p, q);

    std::vector<std::vector<ModelState>> per_chain(cfg.n_chains);
    std::vector<ChainCounters> counters(cfg.n_chains);
    parallel_for(cfg.n_chains, cfg.threads, [&](std::size_t c) {
        auto rng = make_chain_rng(cfg.seed, c);
        ModelState s = init;
        for (std::size_t it = 0; it < cfg.n_warmup; ++it) kernel.sweep(s, rng, counters[c]);
        per_chain[c].reserve(cfg.n_keep);
        for (std::size_t k = 0; k < cfg.n_keep; ++k) {
            for (std::size_t t = 0; t < cfg.thin; ++t) kernel.sweep(s, rng, counters[c]);
            per_chain[c].push_back(s);
        }
    });

    PosteriorDraws out;
    out.spec = spec;
    out.map = X.map;
    out.n_chains = cfg.n_chains;
    out.counters = std::move(counters);
    out.states.reserve(cfg.n_chains * cfg.n_keep);
    for (std::size_t c = 0; c < cfg.n_chains; ++c) {
        for (std::size_t k = 0; k < per_chain[c].size(); ++k) {
            out.states.push_back(std::move(per_chain[c][k]));
            out.chain_ids.push_back(c);
            out.draw_index.push_back(k);
        }
    }
    return out;
}

struct ParameterSummary {
    std::string name;
    IntervalSummary summary;
};

/// Posterior mean, sd and equal-tailed interval for every parameter.
inline std::vector<ParameterSummary> posterior_summary(const PosteriorDraws& draws, double level) {
    if (draws.empty()) throw std::invalid_argument("posterior_summary: no draws");
    const auto names = draws.parameter_names();
    const Eigen::MatrixXd m = draws.parameter_matrix();
    std::vector<ParameterSummary> out;
    out.reserve(names.size());
    std::vector<double> column(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        for (Eigen::Index d = 0; d < m.rows(); ++d) column[static_cast<std::size_t>(d)] = m(d, k);
        out.push_back({names[static_cast<std::size_t>(k)], summarize(column, level)});
    }
    return out;
}

}  // namespace linkshrink
