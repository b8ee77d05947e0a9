#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "linkshrink/eval.hpp"
#include "test_util.hpp"

namespace {

using namespace linkshrink;
using linkshrink::testing::TempDir;

TEST(Rmse, Examples) {
    const Eigen::Vector3d truth(1.0, -2.0, 0.5);
    Eigen::MatrixXd est = truth.transpose().replicate(4, 1);
    EXPECT_EQ(rmse(est, truth), Eigen::Vector3d::Zero());
    Eigen::MatrixXd one = truth.transpose();
    one(0, 1) += 0.2;
    EXPECT_NEAR(rmse(one, truth)(1), 0.2, 1e-15);
    for (Eigen::Index b = 0; b < 4; ++b) est.row(b).array() += (b % 2 == 0 ? 0.3 : -0.3);
    EXPECT_LT((rmse(est, truth).array() - 0.3).abs().maxCoeff(), 1e-15);
    EXPECT_THROW(rmse(Eigen::MatrixXd(2, 2), truth), std::invalid_argument);
    EXPECT_THROW(rmse(Eigen::MatrixXd(0, 3), truth), std::invalid_argument);
}

TEST(Rmse, PermutationInvariant) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd est(6, 3);
    for (Eigen::Index i = 0; i < est.size(); ++i) est(i) = normal(rng);
    const Eigen::Vector3d truth(0.1, 0.2, 0.3);
    EXPECT_LT((rmse(est, truth) - rmse(est.colwise().reverse(), truth)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Detect, IntervalAndPValueRules) {
    EXPECT_FALSE(interval_excludes_zero(-0.1, 0.2));
    EXPECT_TRUE(interval_excludes_zero(0.05, 0.2));
    EXPECT_TRUE(interval_excludes_zero(-0.3, -0.01));
    OlsFit fit;
    fit.p_values = Eigen::Vector3d(0.009, 0.01, 0.011);
    const auto d = detect(fit, PValueRule{0.01});
    EXPECT_EQ(d, (std::vector<bool>{true, true, false}));
}

TEST(Detect, CredibleRuleOnDraws) {
    std::mt19937_64 rng(2);
    const auto data = linkshrink::testing::random_dataset(rng, 20, 2, 0, {});
    const DesignMatrix X = build_design(data);
    PosteriorDraws draws;
    draws.map = X.map;
    draws.n_chains = 1;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int d = 0; d < 400; ++d) {
        ModelState s = linkshrink::testing::random_state(rng, *X.map);
        s.alpha = 5.0 + 0.1 * normal(rng);
        s.beta_main(0) = 0.1 * normal(rng);
        s.beta_main(1) = -3.0 + 0.1 * normal(rng);
        s.beta_int(0) = 0.1 * normal(rng);
        draws.states.push_back(s);
        draws.chain_ids.push_back(0);
        draws.draw_index.push_back(static_cast<std::size_t>(d));
    }
    EXPECT_EQ(detect(draws, CredibleRule{0.95}), (std::vector<bool>{true, false, true, false}));
}

TEST(LabelEffects, Rule) {
    OlsFit master;
    // intercept, then 4 coefficients: threshold 0.05 / 4 = 0.0125
    master.p_values = (Eigen::VectorXd(5) << 0.0, 0.001, 0.03, 0.2, 0.0001).finished();
    const auto labels = label_effects(master, {false, false, false, false, true});
    EXPECT_EQ(labels, (std::vector<EffectLabel>{EffectLabel::positive, EffectLabel::indeterminate, EffectLabel::negative,
                                                 EffectLabel::negative}));
    EXPECT_THROW(label_effects(master, {false}), std::invalid_argument);
}

TEST(LabelEffects, PartitionOnSyntheticMaster) {
    SynthConfig c;
    c.n_master = 5000;
    const SynthMaster m = generate_master(c);
    const OlsFit fit = fit_ols(apply_feature_map(m.map, m.data), m.data.response);
    const auto involves = coefficients_involving(*m.map, m.noise_covariates);
    const auto labels = label_effects(fit, involves);
    const std::size_t K = m.map->p_columns() + m.map->q();
    ASSERT_EQ(labels.size(), K);
    std::size_t pos = 0, neg = 0, ind = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double pv = fit.p_values(static_cast<Eigen::Index>(k + 1));
        switch (labels[k]) {
            case EffectLabel::positive: ++pos; EXPECT_LE(pv, 0.05 / static_cast<double>(K)); break;
            case EffectLabel::negative: ++neg; break;
            case EffectLabel::indeterminate:
                ++ind;
                EXPECT_GT(pv, 0.05 / static_cast<double>(K));
                EXPECT_LE(pv, 0.05);
                break;
        }
    }
    EXPECT_EQ(pos + neg + ind, K);
    EXPECT_GT(pos, 0u);
    EXPECT_GT(neg, 0u);
}

TEST(Roc, ExtremesAndErrors) {
    const std::vector<EffectLabel> labels{EffectLabel::positive, EffectLabel::negative, EffectLabel::indeterminate,
                                          EffectLabel::negative};
    const std::vector<double> thr{0.05};
    const auto all = roc_points({{{true, true, true, true}, {true, true, true, true}}}, labels, thr);
    EXPECT_EQ(all[0].sensitivity, 1.0);
    EXPECT_EQ(all[0].specificity, 0.0);
    const auto none = roc_points({{{false, false, false, false}}}, labels, thr);
    EXPECT_EQ(none[0].sensitivity, 0.0);
    EXPECT_EQ(none[0].specificity, 1.0);
    const auto half = roc_points({{{true, true, false, false}}}, labels, thr);
    EXPECT_EQ(half[0].specificity, 0.5);
    const std::vector<EffectLabel> no_pos{EffectLabel::negative};
    EXPECT_THROW(roc_points({{{true}}}, no_pos, thr), std::invalid_argument);
    const std::vector<EffectLabel> no_neg{EffectLabel::positive};
    EXPECT_THROW(roc_points({{{true}}}, no_neg, thr), std::invalid_argument);
}

TEST(RSquared, Examples) {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0, 5.0};
    EXPECT_EQ(r_squared(y, y, 3.0), 1.0);
    EXPECT_EQ(r_squared(y, std::vector<double>(5, 3.0), 3.0), 0.0);
    // residuals (1,1,1,1,1) -> 5; total 10
    const std::vector<double> bad{0.0, 1.0, 2.0, 3.0, 4.0};
    EXPECT_NEAR(r_squared(y, bad, 3.0), 0.5, 1e-15);
    const std::vector<double> worse{5.0, 4.0, 3.0, 2.0, 1.0};
    EXPECT_NEAR(r_squared(y, worse, 3.0), 1.0 - 40.0 / 10.0, 1e-15);
    std::vector<double> ys = y, ws = worse;
    for (auto& v : ys) v += 7.0;
    for (auto& v : ws) v += 7.0;
    EXPECT_NEAR(r_squared(ys, ws, 10.0), r_squared(y, worse, 3.0), 1e-14);
    EXPECT_THROW(r_squared(std::vector<double>(3, 1.0), std::vector<double>(3, 1.0), 1.0), std::invalid_argument);
    EXPECT_THROW(r_squared(std::vector<double>{}, std::vector<double>{}, 0.0), std::invalid_argument);
}

TEST(ShapleyCoverage, TruthAsEstimateGivesFullCoverage) {
    const Eigen::MatrixXd truth = (Eigen::MatrixXd(2, 2) << 0.5, -1.0, 0.0, 2.0).finished();
    std::vector<ShapleyResult> fits;
    for (int b = 0; b < 20; ++b) {
        ShapleyResult r;
        r.covariates = {"a", "b"};
        r.n_individuals = 2;
        for (Eigen::Index i = 0; i < 2; ++i)
            for (Eigen::Index c = 0; c < 2; ++c) {
                const double v = truth(i, c);
                r.phi.push_back(IntervalSummary{v, 0.0, v, v});
            }
        fits.push_back(r);
    }
    const auto rows = shapley_coverage(fits, truth);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& row : rows) {
        EXPECT_EQ(row.median, 1.0);
        EXPECT_EQ(row.q1, 1.0);
    }
    fits.pop_back();
    EXPECT_THROW(shapley_coverage(fits, truth), std::invalid_argument);
}

TEST(TwoStep, KeepsSignificantMainsAndTheirInteractions) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto data = linkshrink::testing::random_dataset(rng, 400, 3, 0, {}, false);
    const DesignMatrix X = build_design(data);
    std::vector<double> y(400);
    for (Eigen::Index i = 0; i < 400; ++i)
        y[static_cast<std::size_t>(i)] = 2.0 * X.main(i, 0) + 2.0 * X.main(i, 1) + 1.0 * X.interactions(i, 0) + 0.5 * normal(rng);
    const TwoStepFit fit = fit_twostep(X, y);
    ASSERT_EQ(fit.coefficients.size(), 1 + 3 + 3);
    EXPECT_NEAR(fit.coefficients(1), 2.0, 0.1);
    EXPECT_NEAR(fit.coefficients(4), 1.0, 0.1);
    // x3 is null; if dropped its entries are 0 / 1
    if (fit.coefficients(3) == 0.0) {
        EXPECT_EQ(fit.p_values(3), 1.0);
        EXPECT_EQ(fit.coefficients(5), 0.0);
        EXPECT_EQ(fit.coefficients(6), 0.0);
    }
}

TEST(Methods, ParseAndVariants) {
    for (const auto& n : method_names()) EXPECT_EQ(to_string(parse_method(n)), n);
    try {
        parse_method("lasso");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("twostep"), std::string::npos);
    }
    EXPECT_EQ(bayesian_variant(Method::bayintstar), Variant::bayint_star);
    EXPECT_FALSE(bayesian_variant(Method::ols).has_value());
}

EvalConfig smoke_config() {
    EvalConfig c;
    c.synth.n_master = 2000;
    c.synth.n_train = 200;
    c.synth.B = 2;
    c.synth.schema = SchemaSpec{2, 1, {}, 1};
    c.sampler.n_chains = 2;
    c.sampler.n_warmup = 150;
    c.sampler.n_keep = 150;
    c.n_test_individuals = 20;
    c.threads = 1;
    return c;
}

TEST(Evaluation, SmokeRunAllMethods) {
    EvalConfig c = smoke_config();
    c.methods.clear();
    for (const auto& n : method_names()) c.methods.push_back(parse_method(n));
    const EvalReport r = run_evaluation(c);
    ASSERT_EQ(r.methods.size(), 7u);
    EXPECT_EQ(r.n_replicates, 2u);
    const auto K = static_cast<Eigen::Index>(r.coefficient_names.size());
    EXPECT_EQ(K, 1 + 4 + 6);
    for (const auto& m : r.methods) {
        EXPECT_EQ(m.estimates.rows(), 2);
        EXPECT_EQ(m.rmse.size(), K);
        EXPECT_TRUE(m.rmse.allFinite());
        EXPECT_GE(m.rmse.minCoeff(), 0.0);
        ASSERT_EQ(m.r2_in.size(), 2u);
        for (double v : m.r2_out) EXPECT_LE(v, 1.0);
        for (const auto& pt : m.roc) {
            EXPECT_GE(pt.sensitivity, 0.0);
            EXPECT_LE(pt.sensitivity, 1.0);
            EXPECT_GE(pt.specificity, 0.0);
            EXPECT_LE(pt.specificity, 1.0);
        }
        EXPECT_TRUE(m.coverage.empty());
    }
    TempDir dir;
    r.write(dir.path());
    for (const char* f : {"rmse.tsv", "detection.tsv", "roc.tsv", "coverage.tsv", "r2.tsv", "summary.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    const auto summary = nlohmann::json::parse(linkshrink::testing::slurp(dir / "summary.json"));
    EXPECT_TRUE(summary.contains("methods"));
}

TEST(Evaluation, OlsOnNoiselessDataIsExact) {
    EvalConfig c = smoke_config();
    c.synth.noise_sd = 0.0;
    c.methods = {Method::ols};
    c.coverage = false;
    const EvalReport r = run_evaluation(c);
    EXPECT_LT(r.method("ols").rmse.maxCoeff(), 1e-6);
}

TEST(Evaluation, PValueRocMonotone) {
    EvalConfig c = smoke_config();
    c.synth.B = 3;
    c.methods = {Method::ols};
    const EvalReport r = run_evaluation(c);
    const auto& roc = r.method("ols").roc;
    ASSERT_EQ(roc.size(), c.roc_pvalues.size());
    for (std::size_t t = 1; t < roc.size(); ++t) {
        EXPECT_GE(roc[t].sensitivity, roc[t - 1].sensitivity);
        EXPECT_LE(roc[t].specificity, roc[t - 1].specificity);
    }
}

TEST(Evaluation, DeterministicAcrossThreadCounts) {
    EvalConfig c = smoke_config();
    c.methods = {Method::bayint, Method::twostep};
    const EvalReport a = run_evaluation(c);
    c.threads = 2;
    const EvalReport b = run_evaluation(c);
    EXPECT_EQ(a.method("bayint").estimates, b.method("bayint").estimates);
    EXPECT_EQ(a.method("twostep").estimates, b.method("twostep").estimates);
}

TEST(Evaluation, SuppliedMasterAndCoverage) {
    SynthConfig sc;
    sc.n_master = 3000;
    sc.schema = SchemaSpec{2, 1, {3}, 1};
    const SynthMaster m = generate_master(sc);
    EvalConfig c;
    c.synth.n_train = 120;
    c.synth.B = 20;
    c.methods = {Method::bayint};
    c.noise_covariates = m.noise_covariates;
    c.sampler.n_chains = 1;
    c.sampler.n_warmup = 100;
    c.sampler.n_keep = 100;
    c.n_test_individuals = 15;
    const EvalReport r = run_evaluation(c, m.data);
    EXPECT_EQ(r.generating_beta.size(), 0);
    EXPECT_EQ(r.n_master, 3000u);
    const auto& cov = r.method("bayint").coverage;
    ASSERT_EQ(cov.size(), 5u);
    for (const auto& row : cov) {
        EXPECT_GE(row.median, 0.0);
        EXPECT_LE(row.median, 1.0);
        EXPECT_LE(row.q1, row.median);
        EXPECT_LE(row.median, row.q3);
    }
    EvalConfig empty;
    empty.methods.clear();
    EXPECT_THROW(run_evaluation(empty), DataError);
}

}  // namespace
