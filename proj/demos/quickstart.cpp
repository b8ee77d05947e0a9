// Simulate a small cohort, fit the linked-shrinkage model and explain a
// few individuals with posterior Shapley values.

#include <cstdio>

#include "linkshrink/diagnostics.hpp"
#include "linkshrink/importance.hpp"
#include "linkshrink/sampler.hpp"
#include "linkshrink/shapley.hpp"
#include "linkshrink/synth.hpp"

int main() {
    using namespace linkshrink;

    SynthConfig sc;
    sc.n_master = 400;
    sc.schema = {2, 1, {3}, 1};
    sc.pattern = TruthPattern::linked;
    sc.seed = 7;
    const SynthMaster master = generate_master(sc);
    const DesignMatrix X = apply_feature_map(master.map, master.data);

    SamplerConfig cfg;
    cfg.n_chains = 2;
    cfg.n_warmup = 500;
    cfg.n_keep = 500;
    const PosteriorDraws draws = run_sampler(ModelSpec{}, X, master.data.response, cfg);

    const auto names = master.map->coefficient_names();
    const auto summary = posterior_summary(draws, 0.95);
    std::printf("%-14s %9s %9s %9s %9s\n", "coefficient", "truth", "mean", "lower", "upper");
    for (std::size_t k = 0; k < names.size(); ++k)
        std::printf("%-14s %9.3f %9.3f %9.3f %9.3f\n", names[k].c_str(), master.truth(static_cast<Eigen::Index>(k)),
                    summary[k].summary.mean, summary[k].summary.lower, summary[k].summary.upper);

    const std::vector<std::size_t> rows{0, 1, 2};
    const ShapleyResult shap = shapley_posterior(draws, make_shapley_query(X.rows(rows), X), 0.95);
    std::printf("\nShapley values\n");
    for (std::size_t i = 0; i < shap.n_individuals; ++i)
        for (std::size_t c = 0; c < shap.n_covariates(); ++c) {
            const auto& s = shap.total(i, c);
            std::printf("  individual %zu  %-6s %8.3f  [%7.3f, %7.3f]\n", i, shap.covariates[c].c_str(), s.mean, s.lower,
                        s.upper);
        }

    const GlobalImportance imp = global_importance(shapley_posterior(draws, make_shapley_query(X, X), 0.95));
    std::printf("\nGlobal importance\n");
    for (std::size_t c = 0; c < imp.covariates.size(); ++c)
        std::printf("  %-6s I=%.3f  main=%.3f  int=%.3f\n", imp.covariates[c].c_str(), imp.total[c], imp.main[c],
                    imp.interaction[c]);
    return 0;
}
