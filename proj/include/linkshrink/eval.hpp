#pragma once

// Evaluation protocols: rMSE against a master benchmark, credible-interval and
// p-value detection, sensitivity/specificity curves, Shapley-interval
// coverage and in-bag / out-of-bag R^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "linkshrink/design.hpp"
#include "linkshrink/errors.hpp"
#include "linkshrink/ols.hpp"
#include "linkshrink/parallel.hpp"
#include "linkshrink/sampler.hpp"
#include "linkshrink/shapley.hpp"
#include "linkshrink/stats.hpp"
#include "linkshrink/synth.hpp"

namespace linkshrink {

/// Per-coefficient sqrt(mean_b (estimate_b - truth)^2). Rows are replicates.
inline Eigen::VectorXd rmse(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth) {
    if (estimates.rows() < 1) throw std::invalid_argument("rmse: need at least one replicate");
    if (estimates.cols() != truth.size()) throw std::invalid_argument("rmse: shape mismatch");
    return ((estimates.rowwise() - truth.transpose()).array().square().colwise().mean()).sqrt().transpose();
}

struct CredibleRule {
    double level = 0.95;
};
struct PValueRule {
    double alpha = 0.05;
};

inline bool interval_excludes_zero(double lower, double upper) { return lower > 0.0 || upper < 0.0; }

/// Detection per coefficient (alpha, mains, interactions): equal-tailed interval excludes 0.
inline std::vector<bool> detect(const PosteriorDraws& draws, CredibleRule rule) {
    if (draws.empty()) throw std::invalid_argument("detect: no draws");
    const auto K = draws.coefficients(0).size();
    std::vector<bool> out;
    std::vector<double> column(draws.size());
    for (Eigen::Index k = 0; k < K; ++k) {
        for (std::size_t d = 0; d < draws.size(); ++d) {
            const auto& s = draws.states[d];
            const auto p = s.beta_main.size();
            column[d] = k == 0 ? s.alpha : (k <= p ? s.beta_main(k - 1) : s.beta_int(k - 1 - p));
        }
        const auto summary = summarize(column, rule.level);
        out.push_back(interval_excludes_zero(summary.lower, summary.upper));
    }
    return out;
}

/// Detection per coefficient: p <= alpha (inclusive).
inline std::vector<bool> detect(const OlsFit& fit, PValueRule rule) {
    std::vector<bool> out;
    for (Eigen::Index k = 0; k < fit.p_values.size(); ++k) out.push_back(fit.p_values(k) <= rule.alpha);
    return out;
}

enum class EffectLabel { positive, negative, indeterminate };

inline std::string_view to_string(EffectLabel l) {
    switch (l) {
        case EffectLabel::positive: return "positive";
        case EffectLabel::negative: return "negative";
        case EffectLabel::indeterminate: return "indeterminate";
    }
    return "?";
}

/// Labels for the p + q non-intercept coefficients of a master fit:
/// positive if p <= 0.05 / (p + q); negative if it involves a noise
/// covariate or p > 0.05; indeterminate otherwise.
inline std::vector<EffectLabel> label_effects(const OlsFit& master, const std::vector<bool>& involves_noise) {
    const auto K = master.p_values.size();
    if (static_cast<Eigen::Index>(involves_noise.size()) != K)
        throw std::invalid_argument("label_effects: noise mask length mismatch");
    const double m = static_cast<double>(K - 1);
    std::vector<EffectLabel> out;
    for (Eigen::Index k = 1; k < K; ++k) {
        const double pv = master.p_values(k);
        if (involves_noise[static_cast<std::size_t>(k)] || pv > 0.05) out.push_back(EffectLabel::negative);
        else if (pv <= 0.05 / m) out.push_back(EffectLabel::positive);
        else out.push_back(EffectLabel::indeterminate);
    }
    return out;
}

struct RocPoint {
    double threshold = 0.0;
    double specificity = 0.0;
    double sensitivity = 0.0;
};

/// detections[t][b][k]: coefficient k (non-intercept) detected in replicate b
/// at threshold t. Sensitivity and specificity are averaged over replicates.
inline std::vector<RocPoint> roc_points(const std::vector<std::vector<std::vector<bool>>>& detections,
                                        const std::vector<EffectLabel>& labels, std::span<const double> thresholds) {
    if (detections.size() != thresholds.size()) throw std::invalid_argument("roc_points: thresholds mismatch");
    const auto n_pos = std::count(labels.begin(), labels.end(), EffectLabel::positive);
    const auto n_neg = std::count(labels.begin(), labels.end(), EffectLabel::negative);
    if (n_pos == 0) throw std::invalid_argument("roc_points: no positives");
    if (n_neg == 0) throw std::invalid_argument("roc_points: no negatives");
    std::vector<RocPoint> out;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        const auto& reps = detections[t];
        if (reps.empty()) throw std::invalid_argument("roc_points: no replicates");
        double sens = 0.0;
        double spec = 0.0;
        for (const auto& det : reps) {
            if (det.size() != labels.size()) throw std::invalid_argument("roc_points: detection length mismatch");
            double tp = 0.0;
            double tn = 0.0;
            for (std::size_t k = 0; k < labels.size(); ++k) {
                if (labels[k] == EffectLabel::positive && det[k]) tp += 1.0;
                if (labels[k] == EffectLabel::negative && !det[k]) tn += 1.0;
            }
            sens += tp / static_cast<double>(n_pos);
            spec += tn / static_cast<double>(n_neg);
        }
        out.push_back({thresholds[t], spec / static_cast<double>(reps.size()), sens / static_cast<double>(reps.size())});
    }
    return out;
}

/// 1 - sum (y - yhat)^2 / sum (y - ybar)^2 with ybar supplied by the caller.
inline double r_squared(std::span<const double> y, std::span<const double> pred, double y_bar) {
    if (y.empty()) throw std::invalid_argument("r_squared: empty test set");
    if (y.size() != pred.size()) throw std::invalid_argument("r_squared: length mismatch");
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
        ss_tot += (y[i] - y_bar) * (y[i] - y_bar);
    }
    if (!(ss_tot > 0.0)) throw std::invalid_argument("r_squared: zero denominator");
    return 1.0 - ss_res / ss_tot;
}

struct CoverageRow {
    std::string covariate;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

inline constexpr std::size_t kMinCoverageReplicates = 20;

/// Per covariate: quartiles over individuals of the fraction of replicate
/// intervals that contain the true attribution. true_phi is m x covariates.
inline std::vector<CoverageRow> shapley_coverage(const std::vector<ShapleyResult>& fits, const Eigen::MatrixXd& true_phi) {
    if (fits.size() < kMinCoverageReplicates)
        throw std::invalid_argument("shapley_coverage: need at least " + std::to_string(kMinCoverageReplicates) +
                                    " replicate fits");
    const auto m = static_cast<std::size_t>(true_phi.rows());
    const auto P = static_cast<std::size_t>(true_phi.cols());
    for (const auto& f : fits)
        if (f.n_individuals != m || f.n_covariates() != P) throw std::invalid_argument("shapley_coverage: shape mismatch");
    std::vector<CoverageRow> out;
    for (std::size_t c = 0; c < P; ++c) {
        std::vector<double> cov(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double truth = true_phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
            double hits = 0.0;
            for (const auto& f : fits) {
                const auto& s = f.total(i, c);
                if (s.lower <= truth && truth <= s.upper) hits += 1.0;
            }
            cov[i] = hits / static_cast<double>(fits.size());
        }
        std::sort(cov.begin(), cov.end());
        out.push_back({fits.front().covariates[c], sorted_quantile(cov, 0.5), sorted_quantile(cov, 0.25),
                       sorted_quantile(cov, 0.75)});
    }
    return out;
}

/// Main-effects OLS, keep columns with p < 0.05, refit with those columns
/// and their admissible interactions. Returns a full-length coefficient
/// vector and p-values (dropped coefficients: estimate 0, p-value 1).
struct TwoStepFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd p_values;
};

inline TwoStepFit fit_twostep(const DesignMatrix& X, std::span<const double> y, double alpha = 0.05) {
    const auto& map = *X.map;
    const OlsFit first = fit_ols(main_effects_design(X), y, main_effects_names(map));
    std::vector<std::size_t> keep_cols;
    for (std::size_t c = 0; c < map.p_columns(); ++c)
        if (first.p_values(static_cast<Eigen::Index>(1 + c)) < alpha) keep_cols.push_back(c);
    std::vector<bool> kept(map.p_columns(), false);
    for (auto c : keep_cols) kept[c] = true;
    std::vector<std::size_t> keep_pairs;
    for (std::size_t r = 0; r < map.q(); ++r)
        if (kept[map.interaction_index()[r].first] && kept[map.interaction_index()[r].second]) keep_pairs.push_back(r);

    const std::size_t K = 1 + keep_cols.size() + keep_pairs.size();
    Eigen::MatrixXd design(X.n(), static_cast<Eigen::Index>(K));
    std::vector<std::string> names{"alpha"};
    design.col(0).setOnes();
    std::size_t at = 1;
    for (auto c : keep_cols) {
        design.col(static_cast<Eigen::Index>(at++)) = X.main.col(static_cast<Eigen::Index>(c));
        names.push_back(map.column_names()[c]);
    }
    for (auto r : keep_pairs) {
        design.col(static_cast<Eigen::Index>(at++)) = X.interactions.col(static_cast<Eigen::Index>(r));
        names.push_back(map.interaction_name(r));
    }
    const OlsFit second = fit_ols(design, y, names);
    const auto full = static_cast<Eigen::Index>(1 + map.p_columns() + map.q());
    TwoStepFit out{Eigen::VectorXd::Zero(full), Eigen::VectorXd::Ones(full)};
    out.coefficients(0) = second.coefficients(0);
    out.p_values(0) = second.p_values(0);
    at = 1;
    for (auto c : keep_cols) {
        out.coefficients(static_cast<Eigen::Index>(1 + c)) = second.coefficients(static_cast<Eigen::Index>(at));
        out.p_values(static_cast<Eigen::Index>(1 + c)) = second.p_values(static_cast<Eigen::Index>(at++));
    }
    for (auto r : keep_pairs) {
        const auto idx = static_cast<Eigen::Index>(1 + map.p_columns() + r);
        out.coefficients(idx) = second.coefficients(static_cast<Eigen::Index>(at));
        out.p_values(idx) = second.p_values(static_cast<Eigen::Index>(at++));
    }
    return out;
}

enum class Method { bayint, bayintstar, bayintadd, bay0int, bayloc, ols, twostep };

inline const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"bayint", "bayintstar", "bayintadd", "bay0int", "bayloc", "ols", "twostep"};
    return names;
}

inline std::string_view to_string(Method m) { return method_names()[static_cast<std::size_t>(m)]; }

inline Method parse_method(std::string_view s) {
    const auto& names = method_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == s) return static_cast<Method>(i);
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw DataError("unknown method '" + std::string(s) + "' (valid: " + valid + ")");
}

inline std::optional<Variant> bayesian_variant(Method m) {
    switch (m) {
        case Method::bayint: return Variant::bayint;
        case Method::bayintstar: return Variant::bayint_star;
        case Method::bayintadd: return Variant::bayintadd;
        case Method::bay0int: return Variant::bay0int;
        case Method::bayloc: return Variant::bayloc;
        default: return std::nullopt;
    }
}

inline SamplerConfig default_eval_sampler() {
    SamplerConfig s;
    s.n_chains = 2;
    s.n_warmup = 1000;
    s.n_keep = 1000;
    return s;
}

struct EvalConfig {
    SynthConfig synth;
    std::vector<Method> methods{Method::bayint, Method::ols};
    ModelSpec model;  // variant is overridden per method
    SamplerConfig sampler = default_eval_sampler();
    double level = 0.95;
    std::vector<std::string> noise_covariates;  // defaults to the synthetic noise covariates
    std::vector<double> roc_levels{0.80, 0.85, 0.90, 0.95, 0.99, 0.999};
    std::vector<double> roc_pvalues{0.0001, 0.0005, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2};
    bool coverage = true;
    std::size_t n_test_individuals = 100;
    std::size_t threads = 0;
};

struct ReplicateResult {
    Eigen::VectorXd estimate;
    std::vector<bool> detected;                   // 1 + p + q
    std::vector<std::vector<bool>> roc_detected;  // [threshold][p + q]
    double r2_in = 0.0;
    double r2_out = 0.0;
    std::optional<ShapleyResult> shapley;
};

struct MethodReport {
    std::string name;
    Eigen::MatrixXd estimates;  // B x (1 + p + q)
    std::vector<std::vector<bool>> detected;
    Eigen::VectorXd rmse;
    Eigen::VectorXd detection_rate;
    std::vector<RocPoint> roc;
    std::vector<CoverageRow> coverage;
    std::vector<double> r2_in;
    std::vector<double> r2_out;
};

struct EvalReport {
    std::vector<std::string> coefficient_names;
    Eigen::VectorXd truth;            // master OLS
    Eigen::VectorXd truth_se;         // master OLS standard errors
    Eigen::VectorXd generating_beta;  // empty when the master was supplied
    std::vector<bool> involves_noise;
    std::vector<EffectLabel> labels;  // p + q
    std::vector<MethodReport> methods;
    std::vector<double> maineff_r2_in;
    std::vector<double> maineff_r2_out;
    std::size_t n_replicates = 0;
    std::size_t n_train = 0;
    std::size_t n_master = 0;

    [[nodiscard]] const MethodReport& method(std::string_view name) const {
        for (const auto& m : methods)
            if (m.name == name) return m;
        throw std::out_of_range("no method '" + std::string(name) + "' in report");
    }

    /// Mean over coefficients of the given kind (main or interaction) of a method's rMSE.
    [[nodiscard]] double mean_rmse(std::string_view name, bool interactions, std::size_t p) const {
        const auto& r = method(name).rmse;
        const auto q = r.size() - 1 - static_cast<Eigen::Index>(p);
        return interactions ? r.tail(q).mean() : r.segment(1, static_cast<Eigen::Index>(p)).mean();
    }

    void write(const std::filesystem::path& dir) const;
};

namespace detail {

inline std::string fmt_num(double v) {
    if (std::isnan(v)) return "NA";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline std::vector<double> column_of(const PosteriorDraws& draws, Eigen::Index k) {
    std::vector<double> col(draws.size());
    for (std::size_t d = 0; d < draws.size(); ++d) {
        const auto& s = draws.states[d];
        const auto p = s.beta_main.size();
        col[d] = k == 0 ? s.alpha : (k <= p ? s.beta_main(k - 1) : s.beta_int(k - 1 - p));
    }
    return col;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

/// Runs every requested method on B training subsets of a master set.
/// Training subsets are standardized with the master feature map so that
/// every estimate is on the scale of the benchmark.
inline EvalReport run_evaluation(const EvalConfig& cfg, const std::optional<RawDataset>& supplied_master = std::nullopt) {
    if (cfg.methods.empty()) throw DataError("no methods requested");
    std::optional<SynthMaster> synth;
    RawDataset master_data;
    std::vector<std::string> noise = cfg.noise_covariates;
    if (supplied_master) {
        master_data = *supplied_master;
    } else {
        synth = generate_master(cfg.synth);
        master_data = synth->data;
        if (noise.empty()) noise = synth->noise_covariates;
    }
    if (master_data.response.empty()) throw DataError("master data has no response");
    const auto map = synth ? synth->map : std::make_shared<const FeatureMap>(fit_feature_map(master_data));
    const DesignMatrix Xm = apply_feature_map(map, master_data);
    const auto& y = master_data.response;
    const std::size_t N = y.size();
    const std::size_t p = map->p_columns();

    EvalReport report;
    report.coefficient_names = map->coefficient_names();
    const OlsFit master_fit = fit_ols(Xm, y);
    report.truth = master_fit.coefficients;
    report.truth_se = master_fit.standard_errors;
    if (synth) report.generating_beta = synth->truth;
    report.involves_noise = coefficients_involving(*map, noise);
    report.labels = label_effects(master_fit, report.involves_noise);
    report.n_replicates = cfg.synth.B;
    report.n_train = cfg.synth.n_train;
    report.n_master = N;

    const auto blocks = split_training_sets(N, cfg.synth.n_train, cfg.synth.B, cfg.synth.seed);

    // Test individuals for coverage: prefer rows outside every training block.
    std::vector<bool> used(N, false);
    for (const auto& b : blocks)
        for (auto i : b) used[i] = true;
    std::vector<std::size_t> test_rows;
    {
        auto rng = make_chain_rng(cfg.synth.seed, 0x74657374ULL);
        std::vector<std::size_t> pool, fallback;
        for (std::size_t i = 0; i < N; ++i) (used[i] ? fallback : pool).push_back(i);
        std::shuffle(pool.begin(), pool.end(), rng);
        std::shuffle(fallback.begin(), fallback.end(), rng);
        pool.insert(pool.end(), fallback.begin(), fallback.end());
        test_rows.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(cfg.n_test_individuals, N)));
    }
    const DesignMatrix X_test = Xm.rows(test_rows);
    ModelState master_state;
    master_state.alpha = master_fit.coefficients(0);
    master_state.beta_main = master_fit.coefficients.segment(1, static_cast<Eigen::Index>(p));
    master_state.beta_int = master_fit.coefficients.tail(static_cast<Eigen::Index>(map->q()));
    const Eigen::MatrixXd true_phi =
        shapley_categorical(shapley_fast(master_state, make_shapley_query(X_test, Xm)), *map).total();

    const std::size_t B = blocks.size();
    const std::size_t M = cfg.methods.size();
    std::vector<std::vector<ReplicateResult>> results(M, std::vector<ReplicateResult>(B));
    std::vector<std::pair<double, double>> maineff(B);

    parallel_for(B, cfg.threads, [&](std::size_t b) {
        const auto& rows = blocks[b];
        std::vector<bool> in_block(N, false);
        for (auto i : rows) in_block[i] = true;
        std::vector<std::size_t> oob;
        for (std::size_t i = 0; i < N; ++i)
            if (!in_block[i]) oob.push_back(i);
        const DesignMatrix Xb = Xm.rows(rows);
        std::vector<double> yb;
        for (auto i : rows) yb.push_back(y[i]);
        std::vector<double> y_oob;
        for (auto i : oob) y_oob.push_back(y[i]);
        double ybar = 0.0;
        for (double v : yb) ybar += v;
        ybar /= static_cast<double>(yb.size());
        const Eigen::MatrixXd Xb_full = Xb.with_intercept();
        const Eigen::MatrixXd Xoob_full = oob.empty() ? Eigen::MatrixXd() : Xm.rows(oob).with_intercept();

        const auto score = [&](ReplicateResult& rr) {
            const std::vector<double> pin = detail::to_std(Xb_full * rr.estimate);
            rr.r2_in = r_squared(yb, pin, ybar);
            if (!oob.empty()) {
                const std::vector<double> pout = detail::to_std(Xoob_full * rr.estimate);
                rr.r2_out = r_squared(y_oob, pout, ybar);
            } else {
                rr.r2_out = std::numeric_limits<double>::quiet_NaN();
            }
        };

        {
            const OlsFit me = fit_ols(main_effects_design(Xb), yb, main_effects_names(*map));
            const std::vector<double> pin = detail::to_std(main_effects_design(Xb) * me.coefficients);
            maineff[b].first = r_squared(yb, pin, ybar);
            maineff[b].second = oob.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : r_squared(y_oob, detail::to_std(main_effects_design(Xm.rows(oob)) * me.coefficients), ybar);
        }

        for (std::size_t mi = 0; mi < M; ++mi) {
            const Method method = cfg.methods[mi];
            ReplicateResult& rr = results[mi][b];
            if (const auto variant = bayesian_variant(method)) {
                ModelSpec spec = cfg.model;
                spec.variant = *variant;
                SamplerConfig sc = cfg.sampler;
                sc.seed = cfg.sampler.seed + 7919 * b + 104729 * mi;
                sc.threads = 1;
                const PosteriorDraws draws = run_sampler(spec, Xb, yb, sc);
                rr.estimate = draws.posterior_mean_coefficients();
                rr.detected = detect(draws, CredibleRule{cfg.level});
                for (double lvl : cfg.roc_levels) {
                    std::vector<bool> det;
                    for (Eigen::Index k = 1; k < rr.estimate.size(); ++k) {
                        const auto s = summarize(detail::column_of(draws, k), lvl);
                        det.push_back(interval_excludes_zero(s.lower, s.upper));
                    }
                    rr.roc_detected.push_back(std::move(det));
                }
                if (cfg.coverage)
                    rr.shapley = shapley_posterior(draws, make_shapley_query(X_test, Xb), cfg.level, 1);
            } else {
                Eigen::VectorXd pvals;
                if (method == Method::ols) {
                    const OlsFit fit = fit_ols(Xb, yb);
                    rr.estimate = fit.coefficients;
                    pvals = fit.p_values;
                } else {
                    const TwoStepFit fit = fit_twostep(Xb, yb);
                    rr.estimate = fit.coefficients;
                    pvals = fit.p_values;
                }
                for (Eigen::Index k = 0; k < pvals.size(); ++k) rr.detected.push_back(pvals(k) <= 1.0 - cfg.level);
                for (double a : cfg.roc_pvalues) {
                    std::vector<bool> det;
                    for (Eigen::Index k = 1; k < pvals.size(); ++k) det.push_back(pvals(k) <= a);
                    rr.roc_detected.push_back(std::move(det));
                }
            }
            score(rr);
        }
    });

    for (const auto& [in, out] : maineff) {
        report.maineff_r2_in.push_back(in);
        report.maineff_r2_out.push_back(out);
    }
    const bool have_labels = std::count(report.labels.begin(), report.labels.end(), EffectLabel::positive) > 0 &&
                             std::count(report.labels.begin(), report.labels.end(), EffectLabel::negative) > 0;
    for (std::size_t mi = 0; mi < M; ++mi) {
        MethodReport mr;
        mr.name = std::string(to_string(cfg.methods[mi]));
        const auto K = report.truth.size();
        mr.estimates.resize(static_cast<Eigen::Index>(B), K);
        Eigen::VectorXd det_rate = Eigen::VectorXd::Zero(K);
        for (std::size_t b = 0; b < B; ++b) {
            const auto& rr = results[mi][b];
            mr.estimates.row(static_cast<Eigen::Index>(b)) = rr.estimate.transpose();
            mr.detected.push_back(rr.detected);
            for (Eigen::Index k = 0; k < K; ++k) det_rate(k) += rr.detected[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
            mr.r2_in.push_back(rr.r2_in);
            mr.r2_out.push_back(rr.r2_out);
        }
        mr.detection_rate = det_rate / static_cast<double>(B);
        mr.rmse = rmse(mr.estimates, report.truth);
        if (have_labels) {
            const bool bayes = bayesian_variant(cfg.methods[mi]).has_value();
            const auto& grid = bayes ? cfg.roc_levels : cfg.roc_pvalues;
            std::vector<std::vector<std::vector<bool>>> dets(grid.size());
            for (std::size_t t = 0; t < grid.size(); ++t)
                for (std::size_t b = 0; b < B; ++b) dets[t].push_back(results[mi][b].roc_detected[t]);
            mr.roc = roc_points(dets, report.labels, grid);
        }
        if (cfg.coverage && bayesian_variant(cfg.methods[mi]) && B >= kMinCoverageReplicates) {
            std::vector<ShapleyResult> fits;
            for (std::size_t b = 0; b < B; ++b) fits.push_back(std::move(*results[mi][b].shapley));
            mr.coverage = shapley_coverage(fits, true_phi);
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

inline void EvalReport::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    using detail::fmt_num;
    const auto open = [&](const char* name) {
        std::ofstream os(dir / name);
        if (!os) throw DataError("cannot write " + (dir / name).string());
        return os;
    };
    {
        auto os = open("rmse.tsv");
        os << "coefficient\ttruth\tlabel";
        for (const auto& m : methods) os << '\t' << m.name;
        os << '\n';
        for (Eigen::Index k = 0; k < truth.size(); ++k) {
            os << coefficient_names[static_cast<std::size_t>(k)] << '\t' << fmt_num(truth(k)) << '\t'
               << (k == 0 ? "intercept" : to_string(labels[static_cast<std::size_t>(k - 1)]));
            for (const auto& m : methods) os << '\t' << fmt_num(m.rmse(k));
            os << '\n';
        }
    }
    {
        auto os = open("detection.tsv");
        os << "coefficient\ttruth\tlabel";
        for (const auto& m : methods) os << '\t' << m.name;
        os << '\n';
        for (Eigen::Index k = 0; k < truth.size(); ++k) {
            os << coefficient_names[static_cast<std::size_t>(k)] << '\t' << fmt_num(truth(k)) << '\t'
               << (k == 0 ? "intercept" : to_string(labels[static_cast<std::size_t>(k - 1)]));
            for (const auto& m : methods) os << '\t' << fmt_num(m.detection_rate(k));
            os << '\n';
        }
    }
    {
        auto os = open("roc.tsv");
        os << "method\tthreshold\tspecificity\tsensitivity\n";
        for (const auto& m : methods)
            for (const auto& r : m.roc)
                os << m.name << '\t' << fmt_num(r.threshold) << '\t' << fmt_num(r.specificity) << '\t'
                   << fmt_num(r.sensitivity) << '\n';
    }
    {
        auto os = open("coverage.tsv");
        os << "method\tcovariate\tmedian\tq1\tq3\n";
        for (const auto& m : methods)
            for (const auto& c : m.coverage)
                os << m.name << '\t' << c.covariate << '\t' << fmt_num(c.median) << '\t' << fmt_num(c.q1) << '\t'
                   << fmt_num(c.q3) << '\n';
    }
    {
        auto os = open("r2.tsv");
        os << "method\treplicate\tin_bag\tout_of_bag\n";
        for (const auto& m : methods)
            for (std::size_t b = 0; b < m.r2_in.size(); ++b)
                os << m.name << '\t' << b << '\t' << fmt_num(m.r2_in[b]) << '\t' << fmt_num(m.r2_out[b]) << '\n';
        for (std::size_t b = 0; b < maineff_r2_in.size(); ++b)
            os << "maineff\t" << b << '\t' << fmt_num(maineff_r2_in[b]) << '\t' << fmt_num(maineff_r2_out[b]) << '\n';
    }
    {
        nlohmann::ordered_json j;
        j["n_master"] = n_master;
        j["n_train"] = n_train;
        j["replicates"] = n_replicates;
        std::size_t counts[3] = {0, 0, 0};
        for (auto l : labels) ++counts[static_cast<int>(l)];
        j["labels"] = {{"positive", counts[0]}, {"negative", counts[1]}, {"indeterminate", counts[2]}};
        const auto p = static_cast<std::size_t>(std::count_if(coefficient_names.begin(), coefficient_names.end(),
                                                              [](const std::string& s) { return s.find(':') == std::string::npos; })) -
                       1;
        for (const auto& m : methods) {
            auto& e = j["methods"][m.name];
            e["mean_rmse_main"] = mean_rmse(m.name, false, p);
            e["mean_rmse_interaction"] = mean_rmse(m.name, true, p);
            double in = 0.0, out = 0.0;
            for (std::size_t b = 0; b < m.r2_in.size(); ++b) {
                in += m.r2_in[b];
                out += m.r2_out[b];
            }
            e["mean_r2_in_bag"] = in / static_cast<double>(m.r2_in.size());
            e["mean_r2_out_of_bag"] = out / static_cast<double>(m.r2_out.size());
            if (!m.coverage.empty()) {
                auto& cov = e["coverage_median"];
                for (const auto& c : m.coverage) cov[c.covariate] = c.median;
            }
        }
        double in = 0.0, out = 0.0;
        for (std::size_t b = 0; b < maineff_r2_in.size(); ++b) {
            in += maineff_r2_in[b];
            out += maineff_r2_out[b];
        }
        if (!maineff_r2_in.empty()) {
            j["maineff"]["mean_r2_in_bag"] = in / static_cast<double>(maineff_r2_in.size());
            j["maineff"]["mean_r2_out_of_bag"] = out / static_cast<double>(maineff_r2_out.size());
        }
        auto os = open("summary.json");
        os << j.dump(2) << '\n';
    }
}

}  // namespace linkshrink
