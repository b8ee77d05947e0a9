#pragma once

// Hierarchical prior for regression with all admissible two-way interactions:
//
//   y_i      ~ N(alpha + sum_j b_j x_ij + sum_r b_r x_ij x_ik, sigma2)
//   alpha    ~ N(0, intercept_sd^2)                 (not scaled by sigma2)
//   b_j      ~ N(0, sigma2 * tau_j^2)
//   b_jk     ~ N(0, sigma2 * tau_j * tau_k * tau_int)
//   tau_j    ~ C+(0, 1)
//   tau_int  ~ U(0.01, 1)
//   sigma2   ~ IG(1, 0.001)                         (shape, rate)
//
// Variants differ only in the relative prior variances; see prior_variances().

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "linkshrink/design.hpp"

namespace linkshrink {

enum class Variant { bayint, bayint_star, bayintadd, bay0int, bayloc };

inline std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::bayint: return "bayint";
        case Variant::bayint_star: return "bayintstar";
        case Variant::bayintadd: return "bayintadd";
        case Variant::bay0int: return "bay0int";
        case Variant::bayloc: return "bayloc";
    }
    return "?";
}

inline Variant parse_variant(std::string_view s) {
    if (s == "bayint") return Variant::bayint;
    if (s == "bayintstar" || s == "bayint*") return Variant::bayint_star;
    if (s == "bayintadd") return Variant::bayintadd;
    if (s == "bay0int" || s == "bayint0") return Variant::bay0int;
    if (s == "bayloc") return Variant::bayloc;
    throw DataError("unknown variant '" + std::string(s) +
                    "' (valid: bayint, bayintstar, bayintadd, bay0int, bayloc)");
}

/// True for variants whose interaction scales are products/means of per-column scales.
inline bool is_linked(Variant v) { return v != Variant::bayloc; }

/// True when tau_int is a free parameter.
inline bool samples_tau_int(Variant v) {
    return v == Variant::bayint || v == Variant::bayintadd || v == Variant::bay0int;
}

struct ModelSpec {
    Variant variant = Variant::bayint;
    double intercept_sd = 10.0;
    double tau_int_lower = 0.01;
    double tau_int_upper = 1.0;
    double sigma2_shape = 1.0;
    double sigma2_rate = 0.001;
    double main_flat_sd = 10.0;  // bay0int main effects

    void validate() const {
        if (!(intercept_sd > 0.0)) throw std::invalid_argument("intercept_sd must be positive");
        if (!(tau_int_lower > 0.0) || !(tau_int_upper > tau_int_lower))
            throw std::invalid_argument("tau_int bounds must satisfy 0 < lower < upper");
        if (!(sigma2_shape > 0.0) || !(sigma2_rate > 0.0))
            throw std::invalid_argument("sigma2 prior parameters must be positive");
        if (!(main_flat_sd > 0.0)) throw std::invalid_argument("main_flat_sd must be positive");
    }
};

struct ModelState {
    double alpha = 0.0;
    Eigen::VectorXd beta_main;
    Eigen::VectorXd beta_int;
    Eigen::VectorXd tau;  // p entries (linked variants) or p + q (bayloc)
    double tau_int = 1.0;
    double sigma2 = 1.0;

    bool operator==(const ModelState& o) const {
        return alpha == o.alpha && beta_main == o.beta_main && beta_int == o.beta_int && tau == o.tau &&
               tau_int == o.tau_int && sigma2 == o.sigma2;
    }
};

inline std::size_t tau_count(Variant v, std::size_t p, std::size_t q) { return v == Variant::bayloc ? p + q : p; }

inline void check_state_shape(const ModelSpec& spec, const ModelState& s, std::size_t p, std::size_t q) {
    if (static_cast<std::size_t>(s.beta_main.size()) != p || static_cast<std::size_t>(s.beta_int.size()) != q)
        throw std::invalid_argument("model state coefficient dimensions do not match the design");
    if (static_cast<std::size_t>(s.tau.size()) != tau_count(spec.variant, p, q))
        throw std::invalid_argument("model state has " + std::to_string(s.tau.size()) + " scales, variant " +
                                    std::string(to_string(spec.variant)) + " needs " +
                                    std::to_string(tau_count(spec.variant, p, q)));
}

/// Effective tau_int for a variant (fixed at 1 where it is not a parameter).
inline double effective_tau_int(const ModelSpec& spec, const ModelState& s) {
    return samples_tau_int(spec.variant) ? s.tau_int : 1.0;
}

/// Relative variance of an interaction for linked variants, before multiplying by sigma2.
inline double linked_interaction_var(Variant v, double tau_j, double tau_k, double tau_int) {
    if (v == Variant::bayintadd) return 0.5 * (tau_j * tau_j + tau_k * tau_k) * tau_int;
    return tau_j * tau_k * tau_int;
}

struct PriorVarianceTable {
    Eigen::VectorXd main_rel_var;
    Eigen::VectorXd int_rel_var;
};

inline PriorVarianceTable prior_variances(const ModelSpec& spec, const ModelState& s,
                                          std::span<const ColumnPair> pairs) {
    const auto p = static_cast<std::size_t>(s.beta_main.size());
    const std::size_t q = pairs.size();
    check_state_shape(spec, s, p, q);
    PriorVarianceTable t{Eigen::VectorXd(static_cast<Eigen::Index>(p)), Eigen::VectorXd(static_cast<Eigen::Index>(q))};
    if (spec.variant == Variant::bayloc) {
        t.main_rel_var = s.tau.head(static_cast<Eigen::Index>(p)).array().square();
        t.int_rel_var = s.tau.tail(static_cast<Eigen::Index>(q)).array().square();
        return t;
    }
    const double tau_int = effective_tau_int(spec, s);
    if (spec.variant == Variant::bay0int)
        t.main_rel_var.setConstant(spec.main_flat_sd * spec.main_flat_sd / s.sigma2);
    else
        t.main_rel_var = s.tau.array().square();
    for (std::size_t r = 0; r < q; ++r)
        t.int_rel_var(static_cast<Eigen::Index>(r)) =
            linked_interaction_var(spec.variant, s.tau(static_cast<Eigen::Index>(pairs[r].first)),
                                   s.tau(static_cast<Eigen::Index>(pairs[r].second)), tau_int);
    return t;
}

namespace detail {

constexpr double kLogTwoPi = 1.8378770664093454836;

inline double log_normal(double x, double var) { return -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * x * x / var; }

inline double log_half_cauchy(double tau) { return std::log(2.0 / std::numbers::pi) - std::log1p(tau * tau); }

inline double log_inv_gamma(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

}  // namespace detail

/// Unnormalized log posterior (every density term with its normalizing constant).
inline double log_joint(const ModelSpec& spec, const ModelState& s, const DesignMatrix& X,
                        std::span<const double> y) {
    spec.validate();
    const auto p = static_cast<std::size_t>(X.p());
    const auto q = static_cast<std::size_t>(X.q());
    check_state_shape(spec, s, p, q);
    if (y.size() != static_cast<std::size_t>(X.n())) throw std::invalid_argument("log_joint: response length mismatch");
    if (!X.main.allFinite() || !X.interactions.allFinite() || !s.beta_main.allFinite() || !s.beta_int.allFinite() ||
        !s.tau.allFinite() || !std::isfinite(s.alpha) || !std::isfinite(s.tau_int) || !std::isfinite(s.sigma2))
        throw std::invalid_argument("log_joint: non-finite input");
    for (double v : y)
        if (!std::isfinite(v)) throw std::invalid_argument("log_joint: non-finite response");

    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (s.sigma2 <= 0.0 || (s.tau.size() > 0 && s.tau.minCoeff() <= 0.0)) return kNegInf;
    if (samples_tau_int(spec.variant) && (s.tau_int < spec.tau_int_lower || s.tau_int > spec.tau_int_upper))
        return kNegInf;

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::VectorXd resid = yv - X.main * s.beta_main - X.interactions * s.beta_int;
    resid.array() -= s.alpha;
    const double n = static_cast<double>(X.n());
    double lp = -0.5 * n * (detail::kLogTwoPi + std::log(s.sigma2)) - 0.5 * resid.squaredNorm() / s.sigma2;

    lp += detail::log_normal(s.alpha, spec.intercept_sd * spec.intercept_sd);
    const auto table = prior_variances(spec, s, X.map->interaction_index());
    for (Eigen::Index j = 0; j < X.p(); ++j)
        lp += detail::log_normal(s.beta_main(j), s.sigma2 * table.main_rel_var(j));
    for (Eigen::Index r = 0; r < X.q(); ++r) lp += detail::log_normal(s.beta_int(r), s.sigma2 * table.int_rel_var(r));
    for (Eigen::Index j = 0; j < s.tau.size(); ++j) lp += detail::log_half_cauchy(s.tau(j));
    if (samples_tau_int(spec.variant)) lp -= std::log(spec.tau_int_upper - spec.tau_int_lower);
    lp += detail::log_inv_gamma(s.sigma2, spec.sigma2_shape, spec.sigma2_rate);
    return lp;
}

/// Columns linked to each main column through an admissible interaction:
/// partners[j] lists (other column, interaction index).
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> interaction_partners(
    std::size_t p, std::span<const ColumnPair> pairs) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out(p);
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        out.at(pairs[r].first).emplace_back(pairs[r].second, r);
        out.at(pairs[r].second).emplace_back(pairs[r].first, r);
    }
    return out;
}

/// Full conditional log density of one local scale, up to an additive
/// constant, as a function of tau > 0. Returns -inf for tau <= 0.
class TauConditional {
  public:
    TauConditional(const ModelSpec& spec, const ModelState& s, std::span<const ColumnPair> pairs, std::size_t j)
        : variant_(spec.variant), sigma2_(s.sigma2), tau_int_(effective_tau_int(spec, s)) {
        const auto p = static_cast<std::size_t>(s.beta_main.size());
        const std::size_t q = pairs.size();
        check_state_shape(spec, s, p, q);
        if (variant_ == Variant::bayloc) {
            if (j >= p + q) throw std::out_of_range("TauConditional: index out of range");
            has_main_ = true;
            const double b = j < p ? s.beta_main(static_cast<Eigen::Index>(j)) : s.beta_int(static_cast<Eigen::Index>(j - p));
            beta_main_sq_ = b * b;
            return;
        }
        if (j >= p) throw std::out_of_range("TauConditional: index out of range");
        has_main_ = variant_ != Variant::bay0int;
        beta_main_sq_ = s.beta_main(static_cast<Eigen::Index>(j)) * s.beta_main(static_cast<Eigen::Index>(j));
        for (std::size_t r = 0; r < q; ++r) {
            std::size_t other = 0;
            if (pairs[r].first == j) other = pairs[r].second;
            else if (pairs[r].second == j) other = pairs[r].first;
            else continue;
            const double b = s.beta_int(static_cast<Eigen::Index>(r));
            terms_.push_back({b * b, s.tau(static_cast<Eigen::Index>(other))});
        }
    }

    double operator()(double tau) const {
        if (!(tau > 0.0)) return -std::numeric_limits<double>::infinity();
        double lp = -std::log1p(tau * tau);
        if (has_main_) lp += -std::log(tau) - 0.5 * beta_main_sq_ / (sigma2_ * tau * tau);
        for (const auto& t : terms_) {
            const double v = linked_interaction_var(variant_, tau, t.tau_other, tau_int_);
            lp += -0.5 * std::log(v) - 0.5 * t.beta_sq / (sigma2_ * v);
        }
        return lp;
    }

  private:
    struct Term {
        double beta_sq;
        double tau_other;
    };
    Variant variant_;
    double sigma2_;
    double tau_int_;
    bool has_main_ = true;
    double beta_main_sq_ = 0.0;
    std::vector<Term> terms_;
};

inline TauConditional conditional_tau_logdensity(const ModelSpec& spec, const ModelState& s,
                                                 std::span<const ColumnPair> pairs, std::size_t j) {
    return TauConditional(spec, s, pairs, j);
}

/// Starting point used by every chain: tau = 1, tau_int = 0.5 (1 when fixed),
/// sigma2 = sample variance of y, coefficients 0.
inline ModelState initial_state(const ModelSpec& spec, std::size_t p, std::size_t q, double y_variance) {
    ModelState s;
    s.beta_main = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    s.beta_int = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q));
    s.tau = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(tau_count(spec.variant, p, q)));
    s.tau_int = samples_tau_int(spec.variant) ? 0.5 : 1.0;
    s.sigma2 = y_variance > 0.0 && std::isfinite(y_variance) ? y_variance : 1.0;
    return s;
}

/// One draw from the joint prior.
template <class Rng>
ModelState sample_prior(const ModelSpec& spec, std::size_t p, std::span<const ColumnPair> pairs, Rng& rng) {
    const std::size_t q = pairs.size();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::gamma_distribution<double> gamma(spec.sigma2_shape, 1.0);
    ModelState s = initial_state(spec, p, q, 1.0);
    for (Eigen::Index j = 0; j < s.tau.size(); ++j) s.tau(j) = std::fabs(std::tan(std::numbers::pi * (unif(rng) - 0.5)));
    if (samples_tau_int(spec.variant))
        s.tau_int = spec.tau_int_lower + (spec.tau_int_upper - spec.tau_int_lower) * unif(rng);
    s.sigma2 = spec.sigma2_rate / gamma(rng);
    s.alpha = spec.intercept_sd * normal(rng);
    const auto table = prior_variances(spec, s, pairs);
    for (Eigen::Index j = 0; j < s.beta_main.size(); ++j) s.beta_main(j) = std::sqrt(s.sigma2 * table.main_rel_var(j)) * normal(rng);
    for (Eigen::Index r = 0; r < s.beta_int.size(); ++r) s.beta_int(r) = std::sqrt(s.sigma2 * table.int_rel_var(r)) * normal(rng);
    return s;
}

}  // namespace linkshrink
