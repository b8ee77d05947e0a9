#include <gtest/gtest.h>

#include <sstream>

#include "linkshrink/cli.hpp"
#include "test_util.hpp"

namespace {

using namespace linkshrink;
using linkshrink::testing::slurp;
using linkshrink::testing::TempDir;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "linkshrink");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto r = run({"simulate", "--out", (dir / "sim").string(), "--n-master", "200", "--n-train", "100", "--B", "1",
                            "--n-continuous", "3", "--n-binary", "2", "--levels", "3", "--n-noise", "1"});
        ASSERT_EQ(r.code, 0) << r.err;
        master = (dir / "sim" / "master.tsv").string();
        schema = (dir / "sim" / "schema.txt").string();
    }
    std::vector<std::string> fit_args(const std::string& out) const {
        return {"fit", "--input", master, "--schema", schema, "--out", out, "--chains", "2", "--warmup", "100", "--keep", "100"};
    }
    TempDir dir;
    std::string master;
    std::string schema;
};

TEST_F(CliTest, SimulateWritesFiles) {
    for (const char* f : {"master.tsv", "schema.txt", "truth.tsv", "noise.txt", "splits.tsv", "config.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / "sim" / f)) << f;
    EXPECT_EQ(count_lines(slurp(dir / "sim" / "master.tsv")), 201u);
}

TEST_F(CliTest, FitTableShapeAndDeterminism) {
    const auto r = run(fit_args((dir / "fit").string()));
    ASSERT_EQ(r.code, 0) << r.err;
    // 3 + 2 + 2 + 1 = 8 columns, q = 28 - 1 = 27
    EXPECT_EQ(count_lines(slurp(dir / "fit" / "coefficients.tsv")), 1u + 1u + 8u + 27u);
    for (const char* f : {"parameters.tsv", "diagnostics.tsv", "sampler.tsv", "scales.tsv", "config.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / "fit" / f)) << f;

    const auto again = run({"fit", "--config", (dir / "fit" / "config.json").string(), "--out", (dir / "fit2").string()});
    ASSERT_EQ(again.code, 0) << again.err;
    for (const char* f : {"coefficients.tsv", "parameters.tsv", "diagnostics.tsv", "sampler.tsv", "scales.tsv"})
        EXPECT_EQ(slurp(dir / "fit" / f), slurp(dir / "fit2" / f)) << f;
}

TEST_F(CliTest, FlagsOverrideConfig) {
    ASSERT_EQ(run(fit_args((dir / "a").string())).code, 0);
    const auto r = run({"fit", "--config", (dir / "a" / "config.json").string(), "--out", (dir / "b").string(), "--keep", "50"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto cfg = nlohmann::json::parse(slurp(dir / "b" / "config.json"));
    EXPECT_EQ(cfg["keep"], 50);
    EXPECT_EQ(cfg["warmup"], 100);
}

TEST_F(CliTest, MissingSchemaNamesPath) {
    auto args = fit_args((dir / "x").string());
    args[4] = (dir / "nope.txt").string();
    const auto r = run(args);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("nope.txt"), std::string::npos);
    EXPECT_EQ(count_lines(r.err), 1u);
}

TEST_F(CliTest, ShapleyOracleAndErrors) {
    const std::vector<std::string> base{"shapley", "--input", master, "--schema", schema, "--chains", "1", "--warmup", "50",
                                        "--keep", "50"};
    auto ok = base;
    for (const char* a : {"--oracle", "--out"}) ok.emplace_back(a);
    ok.push_back((dir / "shap").string());
    const auto r = run(ok);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "shap" / "shapley.tsv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "shap" / "oracle.tsv"));

    auto resp = base;
    for (const char* a : {"--covariate", "y", "--out"}) resp.emplace_back(a);
    resp.push_back((dir / "shap2").string());
    EXPECT_EQ(run(resp).code, 2);

    linkshrink::testing::write_text(dir / "test.tsv", slurp(master));
    std::string text = slurp(master);
    const auto pos = text.find("\tA\t", text.find('\n'));
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 3, "\tZZ\t");
    linkshrink::testing::write_text(dir / "unseen.tsv", text);
    auto unseen = base;
    for (const char* a : {"--test"}) unseen.emplace_back(a);
    unseen.push_back((dir / "unseen.tsv").string());
    unseen.emplace_back("--out");
    unseen.push_back((dir / "shap3").string());
    const auto u = run(unseen);
    EXPECT_EQ(u.code, 2);
    EXPECT_NE(u.err.find("ZZ"), std::string::npos);
}

TEST_F(CliTest, ImportanceWithUnitEffect) {
    const auto r = run({"importance", "--input", master, "--schema", schema, "--chains", "1", "--warmup", "50", "--keep", "50",
                        "--unit-effect", "cont1", "--stratify", "bin1", "--out", (dir / "imp").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "imp" / "importance.tsv"));
    EXPECT_EQ(count_lines(slurp(dir / "imp" / "unit_effect.tsv")), 201u);
}

TEST(Cli, EvaluateSmokeAndUnknownMethod) {
    TempDir dir;
    const std::vector<std::string> base{"evaluate", "--n-master", "1500", "--n-train", "200", "--B", "2", "--n-continuous", "2",
                                        "--n-binary", "1", "--levels", "", "--n-noise", "1", "--warmup", "100", "--keep",
                                        "100"};
    auto ok = base;
    for (const char* a : {"--methods", "bayint,ols,twostep", "--out"}) ok.emplace_back(a);
    ok.push_back((dir / "ev").string());
    const auto r = run(ok);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"rmse.tsv", "detection.tsv", "roc.tsv", "coverage.tsv", "r2.tsv", "summary.json", "truth.tsv",
                          "config.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / "ev" / f)) << f;
    EXPECT_EQ(slurp(dir / "ev" / "rmse.tsv").find("nan"), std::string::npos);

    auto bad = base;
    for (const char* a : {"--methods", "bayint,lasso", "--out"}) bad.emplace_back(a);
    bad.push_back((dir / "ev2").string());
    const auto b = run(bad);
    EXPECT_EQ(b.code, 2);
    EXPECT_NE(b.err.find("bayloc"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"fit", "--chains", "two"}).code, 2);
    TempDir dir;
    linkshrink::testing::write_text(dir / "c.json", R"({"command": "fit", "bogus": 1})");
    const auto r = run({"fit", "--config", (dir / "c.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("bogus"), std::string::npos);
    linkshrink::testing::write_text(dir / "d.json", R"({"command": "simulate"})");
    EXPECT_EQ(run({"fit", "--config", (dir / "d.json").string()}).code, 2);
}

}  // namespace
