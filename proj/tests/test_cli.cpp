#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace lamdd;
namespace fs = std::filesystem;

namespace {

std::string cli_path()
{
    return LAMDD_CLI_PATH;
}

int run_cli(const std::string& args)
{
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string write_quick_config(const fs::path& dir)
{
    // strip scenario with a short budget: fast end-to-end run
    Scenario sc = builtin_scenario("strip");
    std::string text = builtin_scenario_text("strip");
    const auto pos = text.find("program = 0:0, 0.012:1");
    text.replace(pos, std::string("program = 0:0, 0.012:1").size(), "program = 0:0, 0.003:1");
    const fs::path p = dir / "quick_strip.cfg";
    std::ofstream(p) << text;
    return p.string();
}

} // namespace

TEST(Cli, MissingConfigExitsWithUsageError)
{
    EXPECT_EQ(run_cli("run /nonexistent/nope.cfg"), 2);
    EXPECT_EQ(run_cli("run"), 2);
    EXPECT_EQ(run_cli("bogus"), 2);
}

TEST(Cli, RunProducesOutputsAndManifest)
{
    const fs::path tmp = fs::temp_directory_path() / "lamdd_cli_test";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string cfg = write_quick_config(tmp);
    const std::string out = (tmp / "out").string();
    ASSERT_EQ(run_cli("run " + cfg + " --out " + out), 0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "steps.csv"));
    EXPECT_TRUE(fs::exists(fs::path(out) / "subtime_indicator.csv"));
    EXPECT_TRUE(fs::exists(fs::path(out) / "global_curve.csv"));
    EXPECT_TRUE(fs::exists(fs::path(out) / "manifest.json"));
    bool damage_map = false;
    for (const auto& e : fs::directory_iterator(out))
        if (e.path().filename().string().rfind("damage_map_", 0) == 0) damage_map = true;
    EXPECT_TRUE(damage_map);

    // manifest records the override
    const std::string out2 = (tmp / "out2").string();
    ASSERT_EQ(run_cli("run " + cfg + " --nu-time-target 1e-2 --out " + out2), 0);
    std::ifstream m(fs::path(out2) / "manifest.json");
    std::ostringstream ss;
    ss << m.rdbuf();
    EXPECT_NE(ss.str().find("\"nu_time_target\": 0.01"), std::string::npos);
    fs::remove_all(tmp);
}

TEST(Cli, StepsCsvRoundTripsLosslessly)
{
    const fs::path tmp = fs::temp_directory_path() / "lamdd_cli_rt";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    Scenario sc = builtin_scenario("strip");
    sc.program.points.back().t = 0.003;
    const RunResult rr = run_strip(sc);
    const SubstructuredModel model = build_model(sc);
    write_run_outputs(tmp.string(), model, rr);

    const auto back = read_steps_csv((tmp / "steps.csv").string());
    ASSERT_EQ(back.size(), rr.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].t_n, rr.records[i].t_n);
        EXPECT_EQ(back[i].t_np1, rr.records[i].t_np1);
        EXPECT_EQ(back[i].dt, rr.records[i].dt);
        EXPECT_EQ(back[i].nu_time, rr.records[i].nu_time);
        EXPECT_EQ(back[i].nu_iter_final, rr.records[i].nu_iter_final);
        EXPECT_EQ(back[i].e_dissi_end, rr.records[i].e_dissi_end);
        EXPECT_EQ(back[i].lambda, rr.records[i].lambda);
        EXPECT_EQ(back[i].controller_iters, rr.records[i].controller_iters);
        EXPECT_EQ(back[i].solver_iters, rr.records[i].solver_iters);
        EXPECT_EQ(back[i].flag, rr.records[i].flag);
    }
    fs::remove_all(tmp);
}

TEST(Cli, SweepWritesSummaryAndSubruns)
{
    const fs::path tmp = fs::temp_directory_path() / "lamdd_cli_sweep";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string cfg = write_quick_config(tmp);
    const std::string out = (tmp / "sweep").string();
    ASSERT_EQ(run_cli("sweep " + cfg + " --nu-time-targets 5e-2,1e-1 --out " + out), 0);
    EXPECT_TRUE(fs::exists(fs::path(out) / "sweep.csv"));
    std::ifstream in(fs::path(out) / "sweep.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line); // header
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 2);
    fs::remove_all(tmp);
}

TEST(Cli, SweepNeedsTwoValues)
{
    const fs::path tmp = fs::temp_directory_path() / "lamdd_cli_sweep1";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string cfg = write_quick_config(tmp);
    EXPECT_EQ(run_cli("sweep " + cfg + " --nu-time-targets 5e-2 --out " + (tmp / "x").string()), 2);
    fs::remove_all(tmp);
}

TEST(Cli, RepeatedSweepValuesAreDeterministic)
{
    const fs::path tmp = fs::temp_directory_path() / "lamdd_cli_det";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string cfg = write_quick_config(tmp);
    const std::string out = (tmp / "s").string();
    ASSERT_EQ(run_cli("sweep " + cfg + " --nu-time-targets 5e-2,5e-2 --out " + out), 0);
    // identical rows apart from wall time
    std::ifstream in(fs::path(out) / "sweep.csv");
    std::string header, r1, r2;
    std::getline(in, header);
    std::getline(in, r1);
    std::getline(in, r2);
    auto strip_wall = [](const std::string& s) {
        auto cols = ConfigDoc::split(s, ',');
        return cols.at(0) + "," + cols.at(1) + "," + cols.at(2) + "," + cols.at(4);
    };
    EXPECT_EQ(strip_wall(r1), strip_wall(r2));
    fs::remove_all(tmp);
}
