#include <rcover/experiment.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace rcover;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.family = {"balls", 1, {1.0}, {1.3}, {}};
    c.run.n = 5000;
    c.run.resolution = 1024;
    c.run.m_list = {1, 2, 5};
    c.run.m = 2;
    c.run.k_list = {100, 300};
    c.run.trials = 40;
    return c;
}

nlohmann::json result_of(const RunResult& r) { return nlohmann::json::parse(r.artifacts.front().content)["result"]; }

} // namespace

TEST(Experiment, ThresholdOnBoxExample) {
    ExperimentConfig c;
    c.family = {"boxes", 2, {0.5, 0.5}, {1.2, 1.8}, {}};
    c.output.format = "json";
    auto r = run_command("threshold", c);
    ASSERT_EQ(r.exit_code, kExitOk) << r.error;
    auto j = result_of(r);
    EXPECT_NEAR(j["corollary1"].get<double>(), 0.666667, 1e-6);
    EXPECT_NEAR(j["corollary3"].get<double>(), 0.833333, 1e-6);
}

TEST(Experiment, EnergyOfUnitInterval) {
    ExperimentConfig c;
    c.shape = {"interval", 1, 0.0, {1.0}, {}};
    c.run.t = 0.5;
    c.output.format = "json";
    for (const char* method : {"closed_form", "quadrature"}) {
        c.run.method = method;
        auto r = run_command("energy", c);
        ASSERT_EQ(r.exit_code, kExitOk) << r.error;
        EXPECT_NEAR(result_of(r)["value"].get<double>(), 2.666667, 1e-6) << method;
    }
}

TEST(Experiment, SimulateIsByteIdentical) {
    auto c = small_config();
    auto a = run_command("simulate", c);
    auto b = run_command("simulate", c);
    ASSERT_EQ(a.exit_code, kExitOk) << a.error;
    EXPECT_EQ(a.artifacts.front().content, b.artifacts.front().content);
    EXPECT_NE(a.artifacts.front().content.find("# config_hash: " + config_hash(c)), std::string::npos);
}

TEST(Experiment, OutputIndependentOfThreads) {
    auto c = small_config();
    c.output.threads = 1;
    auto a = run_command("diagnostics", c);
    c.output.threads = 3;
    auto b = run_command("diagnostics", c);
    ASSERT_EQ(a.exit_code, kExitOk) << a.error;
    EXPECT_EQ(a.artifacts.front().content, b.artifacts.front().content);
}

TEST(Experiment, RerunFromArtifactHeaderReproducesFile) {
    auto c = small_config();
    for (const char* cmd : {"dimension", "weights"}) {
        auto first = run_command(cmd, c);
        ASSERT_EQ(first.exit_code, kExitOk) << first.error;
        ExperimentConfig again = parse_config(embedded_config_text(first.artifacts.front().content));
        auto second = run_command(cmd, again);
        EXPECT_EQ(first.artifacts.front().content, second.artifacts.front().content) << cmd;
    }
    c.output.format = "json";
    auto first = run_command("weights", c);
    ExperimentConfig again = parse_config(embedded_config_text(first.artifacts.front().content));
    again.output.format = "json";
    EXPECT_EQ(first.artifacts.front().content, run_command("weights", again).artifacts.front().content);
}

TEST(Experiment, CoveringCsvColumns) {
    auto c = small_config();
    auto r = run_command("dimension", c);
    ASSERT_EQ(r.exit_code, kExitOk) << r.error;
    EXPECT_NE(r.artifacts.front().content.find("\nfamily_id,seed,N,resolution,M,boxdim,r2\n"), std::string::npos);
}

TEST(Experiment, WeightsCsvColumnsAndReport) {
    auto c = small_config();
    c.output.report = true;
    auto r = run_command("weights", c);
    ASSERT_EQ(r.exit_code, kExitOk) << r.error;
    EXPECT_NE(r.artifacts.front().content.find("\nk,m_k,c_k,identity_residual_1,identity_residual_2\n"),
              std::string::npos);
    ASSERT_EQ(r.artifacts.size(), 2u);
    EXPECT_EQ(r.artifacts[1].name, "weights_ck.dat");
}

TEST(Experiment, ValidationErrorsExitWithOne) {
    auto c = small_config();
    EXPECT_EQ(run_command("bogus", c).exit_code, kExitValidation);
    c.run.t = 2.0;
    EXPECT_EQ(run_command("weights", c).exit_code, kExitValidation);
    c = small_config();
    c.run.trials = 10;
    EXPECT_EQ(run_command("diagnostics", c).exit_code, kExitValidation);
    c = small_config();
    c.output.format = "xml";
    EXPECT_EQ(run_command("threshold", c).exit_code, kExitValidation);
    c = small_config();
    c.run.t = 0.9; // above the critical exponent 1/1.3
    EXPECT_EQ(run_command("diagnostics", c).exit_code, kExitValidation);
}

TEST(Experiment, AssertionFailuresExitWithTwo) {
    // with no slack and a tiny C_phi c_k budget some variance check must fail
    auto c = small_config();
    c.run.slack = -0.99;
    auto r = run_command("diagnostics", c);
    ASSERT_EQ(r.exit_code, kExitAssertion) << r.error;
    ASSERT_EQ(r.artifacts.back().name, "violations.json");
    auto v = nlohmann::json::parse(r.artifacts.back().content);
    EXPECT_FALSE(v["violations"].empty());
    EXPECT_EQ(v["command"], "diagnostics");
}

TEST(Experiment, WritesArtifactsToDirectory) {
    auto dir = std::filesystem::temp_directory_path() / "rcover_experiment_test";
    std::filesystem::remove_all(dir);
    auto c = small_config();
    c.output.report = true;
    auto r = run_command("dimension", c);
    write_artifacts(r, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "dimension.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "dimension_boxcount.dat"));
    EXPECT_EQ(load_config_file((dir / "dimension.csv").string()).run, c.run);
    std::filesystem::remove_all(dir);
}
