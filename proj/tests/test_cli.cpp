#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("fivec_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

Result run(const std::string& args, const std::string& env = "") {
    const fs::path dir = fs::temp_directory_path();
    const fs::path o = dir / "fivec_cli_stdout.txt", e = dir / "fivec_cli_stderr.txt";
    const std::string cmd = env + " " + FIVEC_BIN + " " + args + " > " + o.string() + " 2> " + e.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

const std::string kSource = FIVEC_SOURCE_DIR;

}  // namespace

TEST(Cli, SpeedsPrintsWaveSpeeds) {
    const fs::path d = scratch("speeds");
    const Result r = run("speeds -c " + write_config(d, {{"medium", {{"lambda", 2}, {"mu", 1}}}}).string() +
                         " -o " + (d / "out").string());
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "c_P=2 c_S=1\n");
    EXPECT_TRUE(fs::exists(d / "out" / "speeds.json"));
}

TEST(Cli, InvalidMediumIsValidationError) {
    const fs::path d = scratch("badmedium");
    const Result r = run("speeds -c " + write_config(d, {{"medium", {{"lambda", -2}, {"mu", 1}}}}).string() +
                         " -o " + (d / "out").string());
    EXPECT_EQ(r.code, 2);
    const json e = json::parse(r.err);
    EXPECT_EQ(e["error"]["kind"], "validation");
    EXPECT_EQ(e["error"]["subcommand"], "speeds");
}

TEST(Cli, MissingConfigIsUsageError) {
    const Result r = run("speeds -c /nonexistent/config.json");
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(json::parse(r.err)["error"]["exit_code"], r.code);
}

TEST(Cli, UnknownKeyIsRejectedBeforeComputing) {
    const fs::path d = scratch("typo");
    const Result r = run("table -c " + write_config(d, {{"medium", {{"lambda", 1}, {"mu", 1}}}, {"alhpa_deg", 60}}).string() +
                         " -o " + (d / "out").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(d / "out"));
}

TEST(Cli, ClassifyGlancing) {
    const fs::path d = scratch("classify");
    const json c{{"medium", {{"lambda", 2}, {"mu", 1}}}, {"tau", 2}, {"xi", {1, 0, 0}}, {"normal", {0, 0, 1}}};
    const Result r = run("classify -c " + write_config(d, c).string() + " -o " + (d / "out").string());
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(slurp(d / "out" / "classify.json"))["P"]["tag"], "glancing");
}

TEST(Cli, TraceHomogeneousIsStraight) {
    const fs::path d = scratch("trace");
    const json c{{"medium", {{"lambda", 2}, {"mu", 1}}},
                 {"start", {{"x", {0, 0, 0}}, {"xi", {1, 0, 0}}, {"mode", "P"}}},
                 {"t_end", 2.0}};
    ASSERT_EQ(run("trace -c " + write_config(d, c).string() + " -o " + (d / "out").string()).code, 0);
    std::ifstream csv(d / "out" / "ray.csv");
    std::string line;
    std::getline(csv, line);
    int rows = 0;
    while (std::getline(csv, line)) {
        std::vector<double> v;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
        EXPECT_NEAR(v[2], 2.0 * v[1], 1e-10);
        EXPECT_EQ(v[3], 0.0);
        ++rows;
    }
    EXPECT_GT(rows, 2);
}

TEST(Cli, ResonanceShearPairAboveThresholdHasNoInteraction) {
    const fs::path d = scratch("resonance");
    const json c{{"medium", {{"lambda", 1}, {"mu", 1}}}, {"modes", {"S", "S"}}, {"alpha_deg", {60}}};
    ASSERT_EQ(run("resonance -c " + write_config(d, c).string() + " -o " + (d / "out").string()).code, 0);
    EXPECT_NE(slurp(d / "out" / "resonance.csv").find("no-interaction"), std::string::npos);
}

TEST(Cli, TableHasSevenRowsWithVanishingShSv) {
    const fs::path d = scratch("table");
    const json c{{"medium", {{"lambda", 1}, {"mu", 1}, {"A", 0}, {"B", 0}}}};
    ASSERT_EQ(run("table -c " + write_config(d, c).string() + " -o " + (d / "out").string()).code, 0);
    const json t = json::parse(slurp(d / "out" / "table.json"));
    ASSERT_EQ(t["rows"].size(), 7u);
    for (const auto& row : t["rows"]) EXPECT_EQ(row["vanishing"].get<bool>(), row["case"] == "SH+SV->none");
}

TEST(Cli, SymbolSweepZerosAtHalfAlpha) {
    const fs::path d = scratch("symbol");
    const json c{{"medium", {{"lambda", 1}, {"mu", 1}}}, {"case", "P+P->SH"}, {"alpha_deg", 70}, {"psi_count", 99}};
    ASSERT_EQ(run("symbol -c " + write_config(d, c).string() + " -o " + (d / "out").string()).code, 0);
    std::ifstream csv(d / "out" / "symbol_sweep.csv");
    std::string line;
    std::getline(csv, line);
    double prev_psi = 0.0, prev_val = 0.0;
    int crossings = 0;
    while (std::getline(csv, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        const double alpha = std::stod(cells[1]), psi = std::stod(cells[2]), val = std::stod(cells[5]);
        if (prev_val * val < 0.0) {
            ++crossings;
            EXPECT_LE(prev_psi, alpha / 2.0 + 1e-12);
            EXPECT_GE(psi, alpha / 2.0 - 1e-12);
        }
        if (std::abs(2.0 * psi - alpha) < 1e-12) {
            EXPECT_LT(std::abs(val), 1e-12);
        }
        if (val != 0.0) {
            prev_psi = psi;
            prev_val = val;
        }
    }
    EXPECT_GE(crossings, 1);
}

TEST(Cli, InvertShippedSyntheticMeasurements) {
    const fs::path d = scratch("invert");
    const Result r = run("invert -c " + kSource + "/configs/invert_synthetic.json -o " + (d / "out").string());
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(d / "out" / "recovery.json"));
    EXPECT_LT(std::abs(j["recovery"]["A"].get<double>() - 0.3) / 0.3, 1e-10);
    EXPECT_LT(std::abs(j["recovery"]["B"].get<double>() + 0.4) / 0.4, 1e-10);
    EXPECT_EQ(j["noise_trials"]["trials"].get<int>(), 200);
    EXPECT_LT(j["noise_trials"]["mean_rel_err_B"].get<double>(), 0.1);
    EXPECT_LT(std::abs(j["noise_trials"]["mean_A"].get<double>() - 0.3), 0.05);
    EXPECT_LE(j["c_report"]["max_sensitivity"].get<double>(), 1e-14);
}

TEST(Cli, DegenerateInversionIsNumericError) {
    const fs::path d = scratch("degenerate");
    const json m{{"case", "P+SV->SV"}, {"alpha", 1.0}, {"psi", 0.4}, {"measured", {{"re", 0.0}, {"im", -2.0}}}};
    const json c{{"lambda", 2.0}, {"mu", 1.0}, {"measurements", {m, m}}};
    const Result r = run("invert -c " + write_config(d, c).string() + " -o " + (d / "out").string());
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(json::parse(r.err)["error"]["kind"], "numeric");
}

TEST(Cli, UnwritableOutputIsIoError) {
    const fs::path d = scratch("io");
    std::ofstream(d / "blocker") << "file";
    const Result r = run("speeds -c " + write_config(d, {{"medium", {{"lambda", 2}, {"mu", 1}}}}).string() +
                         " -o " + (d / "blocker" / "out").string());
    EXPECT_EQ(r.code, 4);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
    const fs::path d = scratch("env");
    const Result r = run("speeds -c " + write_config(d, {{"medium", {{"lambda", 2}, {"mu", 1}}}}).string(),
                         "FIVEC_OUTPUT_DIR=" + (d / "envout").string());
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(d / "envout" / "speeds.json"));
}

TEST(Cli, SetOverridesConfigValues) {
    const fs::path d = scratch("set");
    const Result r = run("speeds -c " + write_config(d, {{"medium", {{"lambda", 2}, {"mu", 1}}}}).string() +
                         " --set medium.lambda=7 --set medium.mu=4 -o " + (d / "out").string());
    EXPECT_EQ(r.out.rfind("c_P=3.87298334620741", 0), 0u) << r.out;
    EXPECT_NE(r.out.find(" c_S=2\n"), std::string::npos);
}

TEST(Cli, DryRunValidatesAndWritesNothing) {
    const fs::path d = scratch("dry");
    const std::vector<std::pair<std::string, json>> cases{
        {"speeds", {{"medium", {{"lambda", 2}, {"mu", 1}}}}},
        {"table", {{"medium", {{"lambda", 1}, {"mu", 1}}}}},
        {"symbol", {{"medium", {{"lambda", 1}, {"mu", 1}}}, {"case", "P+SV->SV"}, {"alpha_deg", 60}}},
        {"resonance", {{"medium", {{"lambda", 1}, {"mu", 1}}}, {"modes", {"P", "S"}}, {"alpha_deg", 60}}},
    };
    for (const auto& [sub, cfg] : cases) {
        const Result r = run(sub + " -n -c " + write_config(d, cfg).string() + " -o " + (d / "out").string());
        EXPECT_EQ(r.code, 0) << sub << r.err;
        EXPECT_TRUE(json::parse(r.out)["dry_run"].get<bool>());
    }
    for (const char* demo : {"pp_sh", "pp_sh_tuned", "psv_sv_60", "psv_sv_120"}) {
        const Result r = run("simulate -n -c " + kSource + "/configs/" + demo + ".json -o " + (d / "out").string());
        EXPECT_EQ(r.code, 0) << demo << r.err;
    }
    EXPECT_FALSE(fs::exists(d / "out"));
}

TEST(Cli, SimulateRejectsCflViolation) {
    const Result r = run("simulate -n -c " + kSource + "/configs/pp_sh.json --set solver.cfl=0.9");
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, OutputsAreByteIdentical) {
    const fs::path d = scratch("determinism");
    const fs::path cfg = write_config(d, {{"medium", {{"lambda", 1}, {"mu", 1}, {"A", 0.5}, {"B", 0.25}}}});
    ASSERT_EQ(run("table -c " + cfg.string() + " -o " + (d / "a").string()).code, 0);
    ASSERT_EQ(run("table -c " + cfg.string() + " -o " + (d / "b").string()).code, 0);
    EXPECT_EQ(slurp(d / "a" / "table.json"), slurp(d / "b" / "table.json"));
    const std::string inv = kSource + "/configs/invert_synthetic.json";
    ASSERT_EQ(run("invert --seed 5 -c " + inv + " -o " + (d / "c").string()).code, 0);
    ASSERT_EQ(run("invert --seed 5 -c " + inv + " -o " + (d / "e").string()).code, 0);
    EXPECT_EQ(slurp(d / "c" / "recovery.json"), slurp(d / "e" / "recovery.json"));
}
