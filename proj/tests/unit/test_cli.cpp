#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bellsim/cli/app.hpp"

namespace fs = std::filesystem;
using namespace bellsim;
using namespace bellsim::cli;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("bellsim_cli_" + std::string(info->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write_config(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }

    int run(std::vector<std::string> args) {
        std::vector<const char*> argv{"bellsim"};
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

    static std::string slurp(const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    std::map<std::string, std::string> bundle(const std::string& sub) const {
        std::map<std::string, std::string> m;
        for (const auto& e : fs::directory_iterator(dir_ / sub)) m[e.path().filename().string()] = slurp(e.path());
        return m;
    }

    // First data row of a CSV as column -> value.
    static std::map<std::string, std::string> first_row(const std::string& csv) {
        return rows(csv).at(0);
    }

    static std::vector<std::map<std::string, std::string>> rows(const std::string& csv) {
        std::istringstream is(csv);
        std::string line;
        std::getline(is, line);
        const auto header = split(line);
        std::vector<std::map<std::string, std::string>> out;
        while (std::getline(is, line)) {
            const auto cells = split(line);
            std::map<std::string, std::string> r;
            for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) r[header[i]] = cells[i];
            out.push_back(r);
        }
        return out;
    }

    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> v;
        std::string cell;
        std::istringstream is(line);
        while (std::getline(is, cell, ',')) v.push_back(cell);
        if (!line.empty() && line.back() == ',') v.emplace_back();
        return v;
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, VerifyTheoremDefaultReportsBoundTwo) {
    ASSERT_EQ(run({"verify-theorem", "--seed", "1", "--out", out("vt")}), kExitOk) << err_.str();
    const auto b = bundle("vt");
    ASSERT_TRUE(b.count("config.json"));
    for (const auto& r : rows(b.at("theorem_report.csv"))) {
        EXPECT_EQ(r.at("pass"), "1") << r.at("check");
        if (r.at("check") == "chsh_scan_max") {
            EXPECT_NEAR(std::stod(r.at("value")), 2.0, 1e-12);
        } else if (r.at("check") == "quantum_chsh") {
            EXPECT_NEAR(std::stod(r.at("value")), 2.0 * std::sqrt(2.0), 1e-10);
        }
    }
}

TEST_F(CliTest, CoarseGridIsFast) {
    const auto cfg = write_config("c.json", R"({"master_seed": 3, "grid_step": 0.5, "lemma_models": 50})");
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_EQ(run({"verify-theorem", "--config", cfg, "--out", out("vt")}), kExitOk) << err_.str();
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
    const auto r = rows(bundle("vt").at("theorem_report.csv"));
    EXPECT_EQ(r[1].at("check"), "chsh_scan_points");
    EXPECT_EQ(r[1].at("value"), "81");
}

TEST_F(CliTest, ConfigAndUsageErrorsExitTwo) {
    EXPECT_EQ(run({"verify-theorem", "--config", write_config("bad.json", "{\"master_seed\": 1,"), "--out",
                   out("x")}),
              kExitUsage);
    EXPECT_EQ(run({"verify-theorem", "--config", write_config("noseed.json", "{}"), "--out", out("x")}), kExitUsage);
    EXPECT_NE(err_.str().find("master_seed"), std::string::npos);
    EXPECT_EQ(run({"epr", "--config", write_config("unknown.json", R"({"master_seed": 1, "paris": 10})"), "--out",
                   out("x")}),
              kExitUsage);
    EXPECT_EQ(run({"epr", "--config", write_config("model.json", R"({"master_seed": 1, "model": "Magic"})"), "--out",
                   out("x")}),
              kExitUsage);
    EXPECT_EQ(run({"density", "--config", write_config("grid.json", R"({"master_seed": 1, "grid": {"n": 4}})"),
                   "--out", out("x")}),
              kExitUsage);
    EXPECT_EQ(run({"epr", "--config", write_config("cmd.json", R"({"command": "swap", "master_seed": 1})"), "--out",
                   out("x")}),
              kExitUsage);
    EXPECT_EQ(run({"no-such-command"}), kExitUsage);
    EXPECT_EQ(run({}), kExitUsage);
    EXPECT_EQ(run({"epr", "--seed", "1", "--threads", "0", "--out", out("x")}), kExitUsage);
    EXPECT_EQ(run({"epr", "--config", (dir_ / "missing.json").string()}), kExitUsage);
    EXPECT_FALSE(fs::exists(dir_ / "x"));
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}), kExitOk); }

TEST_F(CliTest, SeedOverrideWinsAndIsEchoed) {
    const auto cfg = write_config("c.json", R"({"master_seed": 5, "pairs": 1000})");
    ASSERT_EQ(run({"epr", "--config", cfg, "--seed", "9", "--out", out("a")}), kExitOk) << err_.str();
    const auto echo = json::parse(bundle("a").at("config.json"));
    EXPECT_EQ(echo.at("master_seed").get<std::uint64_t>(), 9u);
    ASSERT_EQ(run({"epr", "--seed", "9", "--config", write_config("d.json", R"({"pairs": 1000})"), "--out", out("b")}),
              kExitOk);
    EXPECT_EQ(bundle("a"), bundle("b"));
}

TEST_F(CliTest, EchoRerunReproducesEveryBundle) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"verify-theorem", R"({"master_seed": 2, "grid_step": 0.25, "lemma_models": 20})"},
        {"epr", R"({"master_seed": 2, "pairs": 800})"},
        {"swap", R"({"master_seed": 2, "pairs": 400, "second_source_seed": 11})"},
        {"density", R"({"master_seed": 2, "trajectories": 2000})"},
        {"disturbance", R"({"master_seed": 2, "pairs": 256, "magnitudes": [0, 0.01, 1]})"},
        {"chsh-scan", R"({"master_seed": 2, "pairs": 200, "angle_step_deg": 45})"},
    };
    for (const auto& [cmd, text] : cases) {
        ASSERT_EQ(run({cmd, "--config", write_config(cmd + ".json", text), "--out", out(cmd + "_1")}), kExitOk)
            << cmd << ": " << err_.str();
        const auto first = bundle(cmd + "_1");
        const auto echo = write_config(cmd + "_echo.json", first.at("config.json"));
        ASSERT_EQ(run({cmd, "--config", echo, "--out", out(cmd + "_2")}), kExitOk) << cmd << ": " << err_.str();
        EXPECT_EQ(first, bundle(cmd + "_2")) << cmd;
    }
}

TEST_F(CliTest, EqualAxisSharedStreamColumnIsOne) {
    const auto cfg = write_config(
        "c.json",
        R"({"master_seed": 4, "pairs": 10000, "model": "SharedStreamThreshold", "mu_deg": [30], "nu_deg": [30], "chsh_deg": []})");
    ASSERT_EQ(run({"epr", "--config", cfg, "--out", out("e")}), kExitOk) << err_.str();
    const auto b = bundle("e");
    const auto r = first_row(b.at("correlations.csv"));
    EXPECT_EQ(r.at("n"), "10000");
    EXPECT_EQ(r.at("anticorrelated_fraction"), "1");
    EXPECT_EQ(r.at("e_hat"), "-1");
    EXPECT_FALSE(b.count("chsh.csv"));
    // A single setting has nothing to compare across remote settings.
    EXPECT_EQ(b.at("no_signaling.csv"), "wing,local_deg,remote_a_deg,remote_b_deg,shift,std_error,pass\n");
}

TEST_F(CliTest, OracleChshNearTsirelson) {
    const auto cfg = write_config(
        "c.json",
        R"({"master_seed": 6, "pairs": 40000, "model": "AnalyticQuantumOracle", "mu_deg": [0, 90], "nu_deg": [45, 315]})");
    ASSERT_EQ(run({"epr", "--config", cfg, "--out", out("e")}), kExitOk) << err_.str();
    const auto r = first_row(bundle("e").at("chsh.csv"));
    const double s = std::stod(r.at("s_hat")), se = std::stod(r.at("std_error"));
    EXPECT_GT(se, 0.0);
    EXPECT_NEAR(s, 2.0 * std::sqrt(2.0), 4.0 * se);
}

TEST_F(CliTest, ChshSettingsMustBeSampled) {
    const auto cfg = write_config("c.json", R"({"master_seed": 6, "mu_deg": [0], "nu_deg": [0]})");
    EXPECT_EQ(run({"epr", "--config", cfg, "--out", out("e")}), kExitUsage);
}

TEST_F(CliTest, SameSeedSameBytesAcrossThreads) {
    const auto cfg = write_config("c.json", R"({"master_seed": 8, "pairs": 2000})");
    ASSERT_EQ(run({"epr", "--config", cfg, "--out", out("t1"), "--threads", "1"}), kExitOk);
    ASSERT_EQ(run({"epr", "--config", cfg, "--out", out("t1b"), "--threads", "1"}), kExitOk);
    ASSERT_EQ(run({"epr", "--config", cfg, "--out", out("t4"), "--threads", "4"}), kExitOk);
    EXPECT_EQ(bundle("t1"), bundle("t1b"));
    EXPECT_EQ(bundle("t1"), bundle("t4"));
    ASSERT_EQ(run({"epr", "--config", cfg, "--seed", "10", "--out", out("other")}), kExitOk);
    EXPECT_NE(bundle("t1").at("counts.csv"), bundle("other").at("counts.csv"));
}

TEST_F(CliTest, TinyDensityEnsembleWarnsButSucceeds) {
    const auto cfg = write_config("c.json", R"({"master_seed": 1, "trajectories": 100})");
    ASSERT_EQ(run({"density", "--config", cfg, "--out", out("d")}), kExitOk) << err_.str();
    const auto r = first_row(bundle("d").at("summary.csv"));
    EXPECT_EQ(r.at("warning"), "1");
    EXPECT_GT(std::stod(r.at("ks_distance")), 0.05);
}

TEST_F(CliTest, DensityEchoResolvesFinalTime) {
    ASSERT_EQ(run({"density", "--seed", "1", "--config", write_config("c.json", R"({"trajectories": 500})"), "--out",
                   out("d")}),
              kExitOk);
    const auto echo = json::parse(bundle("d").at("config.json"));
    EXPECT_DOUBLE_EQ(echo.at("t_final").get<double>(), 2.0);
}

TEST_F(CliTest, DisturbanceTableFlagsLargeKicks) {
    const auto cfg = write_config("c.json", R"({"master_seed": 1, "pairs": 512, "magnitudes": [0, 0.001, 1]})");
    ASSERT_EQ(run({"disturbance", "--config", cfg, "--out", out("d")}), kExitOk) << err_.str();
    const auto r = rows(bundle("d").at("disturbance.csv"));
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].at("efficiency"), "1");
    EXPECT_EQ(r[0].at("precondition_violated"), "0");
    EXPECT_EQ(r[2].at("precondition_violated"), "1");
}

TEST_F(CliTest, SwapSameSourceKeepsAnticorrelation) {
    const auto cfg = write_config("c.json", R"({"master_seed": 1, "pairs": 2000})");
    ASSERT_EQ(run({"swap", "--config", cfg, "--out", out("s")}), kExitOk) << err_.str();
    const auto echo = json::parse(bundle("s").at("config.json"));
    EXPECT_EQ(echo.at("second_source_seed").get<std::uint64_t>(), 1u);
    EXPECT_EQ(first_row(bundle("s").at("correlations.csv")).at("anticorrelated_fraction"), "1");
}

TEST_F(CliTest, ChshScanReportsFactorizedReference) {
    const auto cfg = write_config("c.json", R"({"master_seed": 1, "pairs": 1000, "angle_step_deg": 90})");
    ASSERT_EQ(run({"chsh-scan", "--config", cfg, "--out", out("c")}), kExitOk) << err_.str();
    const auto b = bundle("c");
    EXPECT_EQ(rows(b.at("correlations.csv")).size(), 16u);
    const auto r = first_row(b.at("chsh_scan.csv"));
    EXPECT_EQ(r.at("combinations"), std::to_string(4 * 4 * 4 * 4));
    EXPECT_EQ(run({"chsh-scan", "--seed", "1", "--config", write_config("few.json", R"({"pairs": 50})"), "--out",
                   out("few")}),
              kExitUsage);
}

#ifdef BELLSIM_CONFIG_DIR
TEST(ShippedConfigs, ParseAndEchoUnchanged) {
    auto check = [](const std::string& name, auto parse) {
        std::ifstream f(fs::path(BELLSIM_CONFIG_DIR) / (name + ".json"), std::ios::binary);
        ASSERT_TRUE(f) << name;
        std::stringstream ss;
        ss << f.rdbuf();
        const auto cfg = parse(parse_config_text(ss.str(), name), std::nullopt);
        EXPECT_EQ(cfg.echo().dump(2) + "\n", ss.str()) << name;
    };
    check("verify-theorem", VerifyConfig::parse);
    check("epr", [](const json& d, auto s) { return EprConfig::parse(d, s); });
    check("swap", SwapConfig::parse);
    check("density", DensityCliConfig::parse);
    check("disturbance", DisturbanceConfig::parse);
    check("chsh-scan", ChshScanConfig::parse);
}
#endif
