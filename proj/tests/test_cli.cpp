#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(std::string const& name)
{
    auto const d = fs::temp_directory_path() / ("kinshock_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_ini(fs::path const& dir, std::string const& text)
{
    auto const p = dir / "run.ini";
    std::ofstream(p) << text;
    return p;
}

int shockctl(std::string const& args)
{
    std::string const cmd = std::string(SHOCKCTL_PATH) + " " + args + " --log-level error > /dev/null 2>&1";
    int const st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string const relax_ini = "schema = 1\n"
                              "[grid]\nn = 12\nL = 6\n"
                              "[model]\ns = 5\n"
                              "[collision]\nradial_nodes = 8\nsphere_theta = 8\ndealias = false\n"
                              "[evolve]\ndt = 0.05\nt_end = 0.2\n"
                              "[initial]\nkind = two_bump\ntemperature = 0.8\nseparation = 1.5\n";

} // namespace

TEST(Cli, RelaxWritesArtifacts)
{
    auto const d = scratch_dir("relax");
    auto const ini = write_ini(d, relax_ini);
    ASSERT_EQ(shockctl("relax -c " + ini.string() + " -o " + (d / "out").string()), 0);
    EXPECT_TRUE(fs::exists(d / "out" / "moments.csv"));
    EXPECT_TRUE(fs::exists(d / "out" / "final_state.txt"));
    EXPECT_TRUE(fs::exists(d / "out" / "config.resolved.ini"));
    auto const s = nlohmann::json::parse(slurp(d / "out" / "summary.json"));
    EXPECT_EQ(s["status"], "ok");
    EXPECT_EQ(s["exit_code"], 0);
    EXPECT_EQ(s["command"], "relax");
    // header plus t = 0 and four steps
    auto const csv = slurp(d / "out" / "moments.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
    EXPECT_EQ(csv.rfind("index,t,density,px,py,pz,energy,entropy\n", 0), 0u);
}

TEST(Cli, DeterministicRunsAreBitwiseIdentical)
{
    auto const d = scratch_dir("repro");
    auto const ini = write_ini(d, relax_ini);
    ASSERT_EQ(shockctl("relax -c " + ini.string() + " -o " + (d / "a").string() + " --deterministic"), 0);
    ASSERT_EQ(shockctl("relax -c " + ini.string() + " -o " + (d / "b").string() + " --deterministic"), 0);
    EXPECT_EQ(slurp(d / "a" / "moments.csv"), slurp(d / "b" / "moments.csv"));
    EXPECT_EQ(slurp(d / "a" / "final_state.txt"), slurp(d / "b" / "final_state.txt"));
}

TEST(Cli, ResolvedConfigIsReloadable)
{
    auto const d = scratch_dir("resolved");
    auto const ini = write_ini(d, relax_ini);
    ASSERT_EQ(shockctl("relax -c " + ini.string() + " -o " + (d / "a").string()), 0);
    ASSERT_EQ(shockctl("relax -c " + (d / "a" / "config.resolved.ini").string() + " -o " + (d / "b").string()), 0);
    EXPECT_EQ(slurp(d / "a" / "moments.csv"), slurp(d / "b" / "moments.csv"));
}

TEST(Cli, ConfigErrorsExitWithTwo)
{
    auto const d = scratch_dir("bad");
    auto const ini = write_ini(d, "schema = 1\n[model]\ns = 3\n[selfsim]\ncase = hard\n");
    EXPECT_EQ(shockctl("verify -c " + ini.string() + " -o " + (d / "out").string()), 2);
    auto const s = nlohmann::json::parse(slurp(d / "out" / "summary.json"));
    EXPECT_EQ(s["exit_code"], 2);
    EXPECT_NE(s["message"].get<std::string>().find("line 5"), std::string::npos);
    EXPECT_EQ(shockctl("relax -c " + (d / "missing.ini").string()), 2);
}

TEST(Cli, FailedVerificationExitsWithFour)
{
    auto const d = scratch_dir("verify");
    auto const ini = write_ini(d, "schema = 1\n[grid]\nn = 8\nL = 4\n[model]\ns = 5\n"
                                  "[collision]\nradial_nodes = 8\nsphere_theta = 8\ndealias = false\n"
                                  "[verify]\noracle_n = 4\noracle_L = 3\ntol_equilibrium = 1e-30\n");
    EXPECT_EQ(shockctl("verify -c " + ini.string() + " -o " + (d / "out").string()), 4);
    auto const v = nlohmann::json::parse(slurp(d / "out" / "verify.json"));
    EXPECT_FALSE(v["passed"].get<bool>());
}

TEST(Cli, ReducedAndTwoTimeRun)
{
    auto const d = scratch_dir("reduced");
    auto const ini = write_ini(d, "schema = 1\n[grid]\nn = 8\nL = 5\n[model]\ns = 5\n"
                                  "[collision]\nradial_nodes = 8\nsphere_theta = 8\ndealias = false\n"
                                  "[selfsim]\nlambda = 0.3\n"
                                  "[evolve]\ndt = 0.02\nt_end = 0.1\ntau_cells = 4\n");
    ASSERT_EQ(shockctl("reduced -c " + ini.string() + " -o " + (d / "r").string()), 0);
    auto const csv = slurp(d / "r" / "reduced.csv");
    EXPECT_EQ(csv.rfind("rho,E,mass,gap\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
    ASSERT_EQ(shockctl("two-time -c " + ini.string() + " -o " + (d / "t").string()), 0);
    EXPECT_TRUE(fs::exists(d / "t" / "two_time.csv"));
    EXPECT_TRUE(fs::exists(d / "t" / "slices.csv"));
}

TEST(Cli, EigenEmptyBracketReportsNoRoots)
{
    auto const d = scratch_dir("eigen");
    auto const ini = write_ini(d, "schema = 1\n[grid]\nn = 12\nL = 7\n[model]\ns = 5\n"
                                  "[collision]\nradial_nodes = 8\nsphere_theta = 8\ndealias = false\n"
                                  "[eigen]\nlo = 0.6\nhi = 1.0\nscan_points = 3\nwindow = 0.1\ndrho = 0.025\n");
    ASSERT_EQ(shockctl("eigen -c " + ini.string() + " -o " + (d / "out").string()), 0);
    auto const e = nlohmann::json::parse(slurp(d / "out" / "eigen.json"));
    EXPECT_TRUE(e["roots"].is_array());
    EXPECT_TRUE(e["roots"].empty());
    EXPECT_EQ(e["samples"].size(), 3u);
}

TEST(Cli, MissingSubcommandIsAnError) { EXPECT_NE(shockctl(""), 0); }
