#pragma once

// Command-line driver: fit, shapley, importance, simulate, evaluate.
// Each subcommand resolves its settings from defaults, an optional JSON
// config file and explicit flags (in increasing priority) and writes the
// resolved settings to <out>/config.json.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "linkshrink/design.hpp"
#include "linkshrink/diagnostics.hpp"
#include "linkshrink/errors.hpp"
#include "linkshrink/eval.hpp"
#include "linkshrink/importance.hpp"
#include "linkshrink/io.hpp"
#include "linkshrink/model.hpp"
#include "linkshrink/sampler.hpp"
#include "linkshrink/shapley.hpp"
#include "linkshrink/synth.hpp"

namespace linkshrink {

namespace cli {

using Json = nlohmann::ordered_json;

enum class OptionType { text, integer, real, flag };

struct OptionSpec {
    std::string name;
    OptionType type;
    Json fallback;  // null: no default
    std::string help;
};

inline constexpr std::size_t kOracleMaxCovariates = 12;
inline constexpr double kOracleTolerance = 1e-8;

/// Resolved settings of one run.
class RunConfig {
  public:
    RunConfig(std::string command, Json values) : command_(std::move(command)), values_(std::move(values)) {}

    [[nodiscard]] const std::string& command() const { return command_; }
    [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key) && !values_[key].is_null(); }

    [[nodiscard]] std::string text(const std::string& key) const { return has(key) ? values_[key].get<std::string>() : ""; }
    [[nodiscard]] std::int64_t integer(const std::string& key) const { return values_.at(key).get<std::int64_t>(); }
    [[nodiscard]] std::size_t count(const std::string& key) const {
        const auto v = integer(key);
        if (v < 0) throw DataError("--" + key + " must be nonnegative");
        return static_cast<std::size_t>(v);
    }
    [[nodiscard]] double real(const std::string& key) const { return values_.at(key).get<double>(); }
    [[nodiscard]] bool flag(const std::string& key) const { return has(key) && values_[key].get<bool>(); }

    [[nodiscard]] std::string require(const std::string& key) const {
        if (!has(key) || text(key).empty()) throw DataError("missing required option --" + key);
        return text(key);
    }

    [[nodiscard]] Json to_json() const {
        Json j;
        j["command"] = command_;
        for (const auto& [k, v] : values_.items()) j[k] = v;
        return j;
    }

  private:
    std::string command_;
    Json values_;
};

inline Json convert_option(const OptionSpec& spec, const std::string& raw) {
    switch (spec.type) {
        case OptionType::text: return raw;
        case OptionType::integer: {
            std::int64_t v = 0;
            const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (ec != std::errc() || ptr != raw.data() + raw.size())
                throw DataError("--" + spec.name + " expects an integer, got '" + raw + "'");
            return v;
        }
        case OptionType::real: {
            const auto v = detail::parse_double(raw);
            if (!v) throw DataError("--" + spec.name + " expects a number, got '" + raw + "'");
            return *v;
        }
        case OptionType::flag: return raw == "true";
    }
    return nullptr;
}

inline Json check_config_value(const OptionSpec& spec, const Json& v) {
    const bool ok = v.is_null() || (spec.type == OptionType::text && v.is_string()) ||
                    (spec.type == OptionType::integer && v.is_number_integer()) ||
                    (spec.type == OptionType::real && v.is_number()) || (spec.type == OptionType::flag && v.is_boolean());
    if (!ok) throw DataError("config key '" + spec.name + "' has the wrong type");
    if (spec.type == OptionType::real && v.is_number()) return v.get<double>();
    return v;
}

inline Json read_config_file(const std::string& path) {
    auto in = detail::open_input(path, "config file");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw DataError("config file " + path + " is not valid JSON: " + e.what());
    }
}

inline std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (detail::trim(s).empty()) return out;
    for (auto& part : detail::split(s, ',')) {
        if (part.empty()) throw DataError("empty item in list '" + s + "'");
        out.push_back(part);
    }
    return out;
}

inline void write_config(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    auto os = detail::open_output(out_dir / "config.json");
    os << cfg.to_json().dump(2) << '\n';
}

inline std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    return format_double(v);
}

// ---------------------------------------------------------------- options

inline std::vector<OptionSpec> data_options() {
    return {
        {"input", OptionType::text, nullptr, "Training data (tab- or comma-separated, header row)"},
        {"schema", OptionType::text, nullptr, "Schema file: 'name = continuous|binary|categorical', 'response = col'"},
        {"response", OptionType::text, nullptr, "Response column (overrides the schema)"},
        {"standardize-response", OptionType::flag, false, "Center and scale the response before fitting"},
    };
}

inline std::vector<OptionSpec> sampler_options(const SamplerConfig& d) {
    return {
        {"variant", OptionType::text, "bayint", "Model: bayint, bayintstar, bayintadd, bay0int, bayloc"},
        {"chains", OptionType::integer, d.n_chains, "Number of chains"},
        {"warmup", OptionType::integer, d.n_warmup, "Warmup sweeps per chain"},
        {"keep", OptionType::integer, d.n_keep, "Retained draws per chain"},
        {"thin", OptionType::integer, d.thin, "Sweeps per retained draw"},
        {"seed", OptionType::integer, d.seed, "Random seed"},
        {"threads", OptionType::integer, 0, "Worker threads (0: LINKSHRINK_THREADS or hardware)"},
        {"level", OptionType::real, 0.95, "Credible level"},
    };
}

inline std::vector<OptionSpec> explain_options() {
    return {
        {"test", OptionType::text, nullptr, "Individuals to explain (default: the training data)"},
        {"draws", OptionType::text, nullptr, "Draw dump from 'fit --save-draws' (skips sampling)"},
    };
}

inline std::vector<OptionSpec> synth_options() {
    const SynthConfig d;
    return {
        {"n-master", OptionType::integer, d.n_master, "Rows in the master set"},
        {"n-train", OptionType::integer, d.n_train, "Rows per training set"},
        {"B", OptionType::integer, d.B, "Number of training sets"},
        {"n-continuous", OptionType::integer, d.schema.n_continuous, "Continuous covariates"},
        {"n-binary", OptionType::integer, d.schema.n_binary, "Binary covariates"},
        {"levels", OptionType::text, "5", "Comma-separated level counts of categorical covariates"},
        {"n-noise", OptionType::integer, d.schema.n_noise, "Noise covariates"},
        {"pattern", OptionType::text, "random", "True coefficients: random or linked"},
        {"intercept", OptionType::real, d.alpha, "True intercept"},
        {"noise-sd", OptionType::real, d.noise_sd, "Residual standard deviation"},
    };
}

inline SamplerConfig sampler_config(const RunConfig& cfg) {
    SamplerConfig s;
    s.n_chains = cfg.count("chains");
    s.n_warmup = cfg.count("warmup");
    s.n_keep = cfg.count("keep");
    s.thin = cfg.count("thin");
    s.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    s.threads = cfg.count("threads");
    if (s.n_chains < 1) throw DataError("--chains must be at least 1");
    if (s.n_keep < 1) throw DataError("--keep must be at least 1");
    if (s.thin < 1) throw DataError("--thin must be at least 1");
    return s;
}

inline double level_of(const RunConfig& cfg) {
    const double level = cfg.real("level");
    if (!(level > 0.0 && level < 1.0)) throw DataError("--level must lie in (0, 1)");
    return level;
}

inline SynthConfig synth_config(const RunConfig& cfg) {
    SynthConfig s;
    s.n_master = cfg.count("n-master");
    s.n_train = cfg.count("n-train");
    s.B = cfg.count("B");
    s.schema.n_continuous = cfg.count("n-continuous");
    s.schema.n_binary = cfg.count("n-binary");
    s.schema.categorical_levels.clear();
    for (const auto& l : split_list(cfg.text("levels"))) {
        const auto v = convert_option({"levels", OptionType::integer, nullptr, ""}, l).get<std::int64_t>();
        if (v < 2) throw DataError("categorical level counts must be at least 2");
        s.schema.categorical_levels.push_back(static_cast<std::size_t>(v));
    }
    s.schema.n_noise = cfg.count("n-noise");
    if (s.schema.n_continuous + s.schema.n_binary + s.schema.categorical_levels.size() + s.schema.n_noise == 0)
        throw DataError("schema has no covariates");
    const auto pattern = cfg.text("pattern");
    if (pattern == "random") s.pattern = TruthPattern::random;
    else if (pattern == "linked") s.pattern = TruthPattern::linked;
    else throw DataError("unknown pattern '" + pattern + "' (valid: random, linked)");
    s.alpha = cfg.real("intercept");
    s.noise_sd = cfg.real("noise-sd");
    if (!(s.noise_sd >= 0.0)) throw DataError("--noise-sd must be nonnegative");
    s.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    return s;
}

// ---------------------------------------------------------------- data

struct LoadedData {
    Schema schema;
    RawDataset data;
    DesignMatrix X;
    std::vector<double> y;
    ResponseScale scale;
};

inline std::string response_name(const RunConfig& cfg, const Schema& schema) {
    if (cfg.has("response") && !cfg.text("response").empty()) return cfg.text("response");
    if (!schema.response.empty()) return schema.response;
    return "y";
}

inline LoadedData load_training(const RunConfig& cfg) {
    LoadedData out;
    const auto schema_path = cfg.require("schema");
    const auto input_path = cfg.require("input");
    out.schema = read_schema(schema_path);
    out.schema.response = response_name(cfg, out.schema);
    out.data = read_dataset(input_path, out.schema, out.schema.response, true);
    out.X = build_design(out.data);
    out.y = out.data.response;
    if (cfg.flag("standardize-response")) {
        const std::size_t n = out.y.size();
        if (n < 2) throw DataError("cannot standardize a response with fewer than two rows");
        double mean = 0.0;
        for (double v : out.y) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : out.y) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0)) throw DataError("response '" + out.schema.response + "' is constant");
        for (double& v : out.y) v = (v - mean) / sd;
        out.scale = {mean, sd};
    }
    return out;
}

inline ModelSpec model_spec(const RunConfig& cfg) {
    ModelSpec spec;
    spec.variant = parse_variant(cfg.text("variant"));
    return spec;
}

inline PosteriorDraws obtain_draws(const RunConfig& cfg, const LoadedData& train) {
    const ModelSpec spec = model_spec(cfg);
    if (cfg.has("draws") && !cfg.text("draws").empty()) {
        PosteriorDraws d = read_draws(cfg.text("draws"), train.X.map, spec);
        d.response_scale = train.scale;
        return d;
    }
    PosteriorDraws d = run_sampler(spec, train.X, train.y, sampler_config(cfg));
    d.response_scale = train.scale;
    return d;
}

inline DesignMatrix load_test(const RunConfig& cfg, const LoadedData& train) {
    if (!cfg.has("test") || cfg.text("test").empty()) return train.X;
    const RawDataset test = read_dataset(cfg.text("test"), train.schema, train.schema.response, false);
    return apply_feature_map(train.X.map, test);
}

inline std::vector<std::size_t> requested_covariates(const RunConfig& cfg, const FeatureMap& map,
                                                     const std::string& response) {
    std::vector<std::size_t> out;
    const auto names = split_list(cfg.text("covariate"));
    if (names.empty()) {
        for (std::size_t g = 0; g < map.p_covariates(); ++g) out.push_back(g);
        return out;
    }
    for (const auto& n : names) {
        if (n == response) throw DataError("'" + n + "' is the response, not a covariate");
        out.push_back(map.covariate_index(n));
    }
    return out;
}

// ---------------------------------------------------------------- commands

inline void write_feature_map(const std::filesystem::path& path, const FeatureMap& map, const ResponseScale& rs,
                              const std::string& response) {
    auto os = detail::open_output(path);
    os << "covariate\tkind\tcenter\tscale\tcolumns\tlevels\n";
    for (const auto& c : map.covariates()) {
        std::string levels;
        for (const auto& l : c.levels) levels += (levels.empty() ? "" : ",") + l;
        os << c.name << '\t' << to_string(c.kind) << '\t' << fmt(c.center) << '\t' << fmt(c.scale) << '\t'
           << c.n_columns << '\t' << (levels.empty() ? "-" : levels) << '\n';
    }
    os << response << "\tresponse\t" << fmt(rs.center) << '\t' << fmt(rs.scale) << "\t0\t-\n";
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out) {
    const std::filesystem::path dir = cfg.require("out");
    const double level = level_of(cfg);
    const LoadedData train = load_training(cfg);
    PosteriorDraws draws = run_sampler(model_spec(cfg), train.X, train.y, sampler_config(cfg));
    draws.response_scale = train.scale;
    const auto summary = posterior_summary(draws, level);
    const Diagnostics diag = compute_diagnostics(draws);
    std::filesystem::create_directories(dir);

    const auto& map = *train.X.map;
    const auto names = map.coefficient_names();
    {
        auto os = detail::open_output(dir / "coefficients.tsv");
        os << "coefficient\tmean\tsd\tlower\tupper\n";
        for (std::size_t k = 0; k < names.size(); ++k) {
            const auto& s = summary[k].summary;
            os << names[k] << '\t' << fmt(s.mean) << '\t' << fmt(s.sd) << '\t' << fmt(s.lower) << '\t' << fmt(s.upper)
               << '\n';
        }
    }
    {
        auto os = detail::open_output(dir / "parameters.tsv");
        os << "parameter\tmean\tsd\tlower\tupper\trhat\tess\n";
        for (std::size_t k = 0; k < summary.size(); ++k) {
            const auto& s = summary[k].summary;
            os << summary[k].name << '\t' << fmt(s.mean) << '\t' << fmt(s.sd) << '\t' << fmt(s.lower) << '\t'
               << fmt(s.upper) << '\t' << fmt(diag.rhat[k]) << '\t' << fmt(diag.ess[k]) << '\n';
        }
    }
    {
        auto os = detail::open_output(dir / "diagnostics.tsv");
        os << "parameter\trhat\tess\n";
        for (std::size_t k = 0; k < diag.names.size(); ++k)
            os << diag.names[k] << '\t' << fmt(diag.rhat[k]) << '\t' << fmt(diag.ess[k]) << '\n';
    }
    {
        auto os = detail::open_output(dir / "sampler.tsv");
        os << "chain\tsweeps\ttau_updates\ttau_evaluations\ttau_expansions\ttau_shrinks\ttau_int_updates\t"
              "tau_int_evaluations\ttau_int_shrinks\n";
        for (std::size_t c = 0; c < diag.counters.size(); ++c) {
            const auto& k = diag.counters[c];
            os << c << '\t' << k.sweeps << '\t' << k.tau.updates << '\t' << k.tau.evaluations << '\t' << k.tau.expansions
               << '\t' << k.tau.shrinks << '\t' << k.tau_int.updates << '\t' << k.tau_int.evaluations << '\t'
               << k.tau_int.shrinks << '\n';
        }
    }
    write_feature_map(dir / "scales.tsv", map, train.scale, train.schema.response);
    if (cfg.flag("save-draws")) write_draws(dir / "draws.tsv", draws);
    write_config(cfg, dir);

    double worst = 1.0;
    for (double r : diag.rhat)
        if (!std::isnan(r)) worst = std::max(worst, r);
    out << "fit: n=" << train.X.n() << " p=" << map.p_columns() << " q=" << map.q() << " draws=" << draws.size()
        << " max_rhat=" << fmt(worst) << '\n';
    for (const auto& w : diag.warnings) out << "warning: " << w << '\n';
    return 0;
}

inline double oracle_check(const PosteriorDraws& draws, const ShapleyQuery& query, std::ostream& out,
                           const std::filesystem::path& dir) {
    const auto& map = *query.map;
    ShapleyQuery sub = query;
    const Eigen::Index m = std::min<Eigen::Index>(query.individuals.rows(), 100);
    sub.individuals = query.individuals.topRows(m);
    std::vector<ModelState> states;
    ModelState mean = draws.states.front();
    const Eigen::VectorXd coef = draws.posterior_mean_coefficients();
    const auto p = static_cast<Eigen::Index>(map.p_columns());
    mean.alpha = coef(0);
    mean.beta_main = coef.segment(1, p);
    mean.beta_int = coef.tail(static_cast<Eigen::Index>(map.q()));
    states.push_back(mean);
    const std::size_t n_extra = std::min<std::size_t>(10, draws.size());
    for (std::size_t t = 0; t < n_extra; ++t) states.push_back(draws.states[t * draws.size() / n_extra]);
    double worst = 0.0;
    for (const auto& s : states) {
        const Eigen::MatrixXd fast = shapley_categorical(shapley_fast(s, sub), map).total();
        const Eigen::MatrixXd brute = shapley_bruteforce(s, sub, PlayerMode::covariates).total();
        worst = std::max(worst, (fast - brute).cwiseAbs().maxCoeff());
    }
    auto os = detail::open_output(dir / "oracle.tsv");
    os << "states\tindividuals\tmax_abs_difference\ttolerance\n"
       << states.size() << '\t' << m << '\t' << fmt(worst) << '\t' << fmt(kOracleTolerance) << '\n';
    out << "oracle: max |fast - brute force| = " << fmt(worst) << " over " << states.size() << " states\n";
    return worst;
}

inline int cmd_shapley(const RunConfig& cfg, std::ostream& out) {
    const std::filesystem::path dir = cfg.require("out");
    const double level = level_of(cfg);
    const LoadedData train = load_training(cfg);
    const auto& map = *train.X.map;
    const auto covs = requested_covariates(cfg, map, train.schema.response);
    const DesignMatrix X_test = load_test(cfg, train);
    const PosteriorDraws draws = obtain_draws(cfg, train);
    const ShapleyQuery query = make_shapley_query(X_test, train.X);
    std::filesystem::create_directories(dir);

    if (cfg.flag("oracle")) {
        if (map.p_covariates() > kOracleMaxCovariates) {
            out << "oracle: skipped, " << map.p_covariates() << " covariates exceeds " << kOracleMaxCovariates << '\n';
        } else {
            const double worst = oracle_check(draws, query, out, dir);
            if (!(worst <= kOracleTolerance))
                throw NumericalError("oracle mismatch: max difference " + fmt(worst) + " exceeds " + fmt(kOracleTolerance));
        }
    }

    const ShapleyResult res = shapley_posterior(draws, query, level, cfg.count("threads"));
    {
        auto os = detail::open_output(dir / "shapley.tsv");
        os << "individual\tcovariate\tphi_mean\tphi_sd\tphi_lower\tphi_upper\tmain_mean\tmain_lower\tmain_upper\t"
              "int_mean\tint_lower\tint_upper\n";
        for (std::size_t i = 0; i < res.n_individuals; ++i)
            for (auto c : covs) {
                const auto& t = res.total(i, c);
                const auto& mn = res.main(i, c);
                const auto& in = res.interaction(i, c);
                os << i << '\t' << res.covariates[c] << '\t' << fmt(t.mean) << '\t' << fmt(t.sd) << '\t' << fmt(t.lower)
                   << '\t' << fmt(t.upper) << '\t' << fmt(mn.mean) << '\t' << fmt(mn.lower) << '\t' << fmt(mn.upper)
                   << '\t' << fmt(in.mean) << '\t' << fmt(in.lower) << '\t' << fmt(in.upper) << '\n';
            }
    }
    write_config(cfg, dir);
    out << "shapley: individuals=" << res.n_individuals << " covariates=" << covs.size() << '\n';
    return 0;
}

inline int cmd_importance(const RunConfig& cfg, std::ostream& out) {
    const std::filesystem::path dir = cfg.require("out");
    const double level = level_of(cfg);
    const LoadedData train = load_training(cfg);
    const auto& map = *train.X.map;
    const DesignMatrix X_test = load_test(cfg, train);

    std::optional<RawColumn> stratifier;
    if (cfg.has("stratify") && !cfg.text("stratify").empty()) {
        const auto name = cfg.text("stratify");
        RawDataset raw = (cfg.has("test") && !cfg.text("test").empty())
                             ? read_dataset(cfg.text("test"), train.schema, train.schema.response, false)
                             : train.data;
        const RawColumn* col = raw.find(name);
        if (!col) throw DataError("stratifier '" + name + "' is not a covariate in the schema");
        stratifier = *col;
    }
    std::string unit;
    if (cfg.has("unit-effect") && !cfg.text("unit-effect").empty()) {
        unit = cfg.text("unit-effect");
        if (unit == train.schema.response) throw DataError("'" + unit + "' is the response, not a covariate");
        if (map.covariates()[map.covariate_index(unit)].kind == ColumnKind::categorical)
            throw DataError("unit effect is undefined for categorical covariate '" + unit + "'; use Shapley values instead");
    }

    const PosteriorDraws draws = obtain_draws(cfg, train);
    const ShapleyQuery query = make_shapley_query(X_test, train.X);
    std::filesystem::create_directories(dir);
    const GlobalImportance imp = cfg.flag("per-draw")
                                     ? global_importance_per_draw(draws, query)
                                     : global_importance(shapley_posterior(draws, query, level, cfg.count("threads")));
    {
        auto os = detail::open_output(dir / "importance.tsv");
        os << "covariate\timportance\timportance_main\timportance_interaction\n";
        for (std::size_t c = 0; c < imp.covariates.size(); ++c)
            os << imp.covariates[c] << '\t' << fmt(imp.total[c]) << '\t' << fmt(imp.main[c]) << '\t'
               << fmt(imp.interaction[c]) << '\n';
    }
    if (!unit.empty()) {
        const UnitEffect eff = unit_effect_posterior(draws, X_test.main, unit, level);
        auto os = detail::open_output(dir / "unit_effect.tsv");
        os << "individual\tcovariate";
        if (stratifier) os << '\t' << stratifier->name;
        os << "\tmean\tsd\tlower\tupper\n";
        for (std::size_t i = 0; i < eff.per_individual.size(); ++i) {
            const auto& s = eff.per_individual[i];
            os << i << '\t' << unit;
            if (stratifier)
                os << '\t'
                   << (stratifier->kind == ColumnKind::continuous ? fmt(stratifier->numeric[i]) : stratifier->labels[i]);
            os << '\t' << fmt(s.mean) << '\t' << fmt(s.sd) << '\t' << fmt(s.lower) << '\t' << fmt(s.upper) << '\n';
        }
    }
    write_config(cfg, dir);
    out << "importance: covariates=" << imp.covariates.size() << " individuals=" << X_test.n() << '\n';
    return 0;
}

inline void write_truth(const std::filesystem::path& path, const std::vector<std::string>& names, const Eigen::VectorXd& v) {
    auto os = detail::open_output(path);
    os << "coefficient\tvalue\n";
    for (std::size_t k = 0; k < names.size(); ++k) os << names[k] << '\t' << fmt(v(static_cast<Eigen::Index>(k))) << '\n';
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const std::filesystem::path dir = cfg.require("out");
    const SynthConfig sc = synth_config(cfg);
    const SynthMaster master = generate_master(sc);
    const auto blocks = split_training_sets(sc.n_master, sc.n_train, sc.B, sc.seed);
    std::filesystem::create_directories(dir);
    write_dataset(dir / "master.tsv", master.data);
    {
        auto os = detail::open_output(dir / "schema.txt");
        os << format_schema(schema_of(master.data));
    }
    write_truth(dir / "truth.tsv", master.map->coefficient_names(), master.truth);
    {
        auto os = detail::open_output(dir / "noise.txt");
        for (const auto& n : master.noise_covariates) os << n << '\n';
    }
    {
        auto os = detail::open_output(dir / "splits.tsv");
        os << "replicate\trow\n";
        for (std::size_t b = 0; b < blocks.size(); ++b)
            for (auto r : blocks[b]) os << b << '\t' << r << '\n';
    }
    write_config(cfg, dir);
    out << "simulate: N=" << sc.n_master << " p=" << master.map->p_columns() << " q=" << master.map->q() << '\n';
    return 0;
}

inline int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    const std::filesystem::path dir = cfg.require("out");
    EvalConfig ec;
    ec.synth = synth_config(cfg);
    ec.methods.clear();
    for (const auto& m : split_list(cfg.text("methods"))) ec.methods.push_back(parse_method(m));
    if (ec.methods.empty()) throw DataError("--methods is empty");
    ec.sampler = sampler_config(cfg);
    ec.sampler.threads = 1;
    ec.level = level_of(cfg);
    ec.threads = cfg.count("threads");
    ec.coverage = !cfg.flag("no-coverage");
    ec.n_test_individuals = cfg.count("n-test");
    ec.noise_covariates = split_list(cfg.text("noise"));

    std::optional<RawDataset> master;
    if (cfg.has("input") && !cfg.text("input").empty()) {
        Schema schema = read_schema(cfg.require("schema"));
        schema.response = response_name(cfg, schema);
        master = read_dataset(cfg.text("input"), schema, schema.response, true);
        ec.synth.n_master = master->n_rows();
    }
    const EvalReport report = run_evaluation(ec, master);
    report.write(dir);
    write_truth(dir / "truth.tsv", report.coefficient_names, report.truth);
    write_config(cfg, dir);
    out << "evaluate: methods=" << ec.methods.size() << " replicates=" << report.n_replicates << '\n';
    return 0;
}

struct Command {
    std::string name;
    std::string description;
    std::vector<OptionSpec> options;
    int (*run)(const RunConfig&, std::ostream&);
};

inline std::vector<Command> commands() {
    const SamplerConfig sd;
    const SamplerConfig ed = default_eval_sampler();
    const OptionSpec out_opt{"out", OptionType::text, nullptr, "Output directory"};

    auto with = [](std::vector<OptionSpec> a, const std::vector<OptionSpec>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    std::vector<Command> cmds;
    cmds.push_back({"fit", "Sample the posterior and write coefficient and diagnostic tables",
                    with(with(data_options(), sampler_options(sd)),
                         {out_opt, {"save-draws", OptionType::flag, false, "Write every retained draw to draws.tsv"}}),
                    &cmd_fit});
    cmds.push_back({"shapley", "Posterior Shapley values for test individuals",
                    with(with(with(data_options(), sampler_options(sd)), explain_options()),
                         {out_opt,
                          {"covariate", OptionType::text, nullptr, "Comma-separated covariates to report (default: all)"},
                          {"oracle", OptionType::flag, false, "Cross-check against subset enumeration"}}),
                    &cmd_shapley});
    cmds.push_back({"importance", "Global importance and personalized unit-change effects",
                    with(with(with(data_options(), sampler_options(sd)), explain_options()),
                         {out_opt,
                          {"unit-effect", OptionType::text, nullptr, "Covariate for the unit-change effect table"},
                          {"stratify", OptionType::text, nullptr, "Covariate exported next to each unit effect"},
                          {"per-draw", OptionType::flag, false, "Average |phi| per draw instead of |posterior mean phi|"}}),
                    &cmd_importance});
    cmds.push_back({"simulate", "Write a synthetic master set, its truth and training splits",
                    with(synth_options(), {out_opt, {"seed", OptionType::integer, 1, "Random seed"}}), &cmd_simulate});
    auto eval_opts = with(synth_options(), sampler_options(ed));
    eval_opts.push_back(out_opt);
    eval_opts.push_back({"methods", OptionType::text, "bayint,ols",
                         "Comma-separated: bayint, bayintstar, bayintadd, bay0int, bayloc, ols, twostep"});
    eval_opts.push_back({"input", OptionType::text, nullptr, "Master data file (default: synthetic)"});
    eval_opts.push_back({"schema", OptionType::text, nullptr, "Schema of --input"});
    eval_opts.push_back({"response", OptionType::text, nullptr, "Response column of --input"});
    eval_opts.push_back({"noise", OptionType::text, nullptr, "Comma-separated known-null covariates of --input"});
    eval_opts.push_back({"n-test", OptionType::integer, 100, "Test individuals for Shapley coverage"});
    eval_opts.push_back({"no-coverage", OptionType::flag, false, "Skip Shapley coverage"});
    for (auto& o : eval_opts)
        if (o.name == "seed") o.fallback = 1;
    cmds.push_back({"evaluate", "Replicate-subset evaluation against a master benchmark", eval_opts, &cmd_evaluate});
    return cmds;
}

}  // namespace cli

/// Entry point. Returns 0 on success, 2 on usage or data errors, 1 otherwise.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace cli;
    const auto cmds = commands();
    CLI::App app{"Linked-shrinkage interaction regression with posterior Shapley values", "linkshrink"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "linkshrink 1.0.0");

    struct Bound {
        const Command* cmd;
        CLI::App* sub;
        std::vector<std::string> text;
        std::vector<char> flags;  // std::vector<bool> cannot bind
        std::vector<CLI::Option*> opts;
        std::string config;
        CLI::Option* config_opt = nullptr;
    };
    std::vector<Bound> bound(cmds.size());
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        auto& b = bound[i];
        b.cmd = &cmds[i];
        b.sub = app.add_subcommand(cmds[i].name, cmds[i].description);
        b.text.resize(cmds[i].options.size());
        b.flags.assign(cmds[i].options.size(), 0);
        b.config_opt = b.sub->add_option("--config", b.config, "JSON config; explicit flags take precedence");
        for (std::size_t k = 0; k < cmds[i].options.size(); ++k) {
            const auto& o = cmds[i].options[k];
            std::string help = o.help;
            if (!o.fallback.is_null()) help += " [" + (o.fallback.is_string() ? o.fallback.get<std::string>() : o.fallback.dump()) + "]";
            if (o.type == OptionType::flag) {
                b.opts.push_back(b.sub->add_flag_callback("--" + o.name, [&b, k] { b.flags[k] = 1; }, help));
            } else {
                b.opts.push_back(b.sub->add_option("--" + o.name, b.text[k], help));
            }
        }
    }

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::Success& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            err << "error: usage: " << one_line(e.what()) << '\n';
            return 2;
        }
        for (auto& b : bound) {
            if (!b.sub->parsed()) continue;
            Json file;
            if (b.config_opt->count() > 0) {
                file = read_config_file(b.config);
                if (!file.is_object()) throw DataError("config file must hold a JSON object");
                for (const auto& [key, value] : file.items()) {
                    if (key == "command") {
                        if (value != b.cmd->name)
                            throw DataError("config file is for command '" + value.dump() + "', not '" + b.cmd->name + "'");
                        continue;
                    }
                    const bool known = std::any_of(b.cmd->options.begin(), b.cmd->options.end(),
                                                   [&](const OptionSpec& o) { return o.name == key; });
                    if (!known) throw DataError("unknown config key '" + key + "' for command '" + b.cmd->name + "'");
                }
            }
            Json values = Json::object();
            for (std::size_t k = 0; k < b.cmd->options.size(); ++k) {
                const auto& o = b.cmd->options[k];
                if (b.opts[k]->count() > 0)
                    values[o.name] = o.type == OptionType::flag ? Json(true) : convert_option(o, b.text[k]);
                else if (file.contains(o.name))
                    values[o.name] = check_config_value(o, file[o.name]);
                else
                    values[o.name] = o.fallback;
            }
            return b.cmd->run(RunConfig(b.cmd->name, std::move(values)), out);
        }
        err << "error: usage: no subcommand\n";
        return 2;
    } catch (const DataError& e) {
        err << "error: data: " << one_line(e.what()) << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "error: numerical: " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << one_line(e.what()) << '\n';
        return 1;
    }
}

}  // namespace linkshrink
