#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(RACETRACK_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("racetrack_cli_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Cli, AnalyticReferencePoint) {
    const auto r = cli("analytic --cycles_N 134 --gen_prob_p 0.05 --inner_loop_delay_ns 9 --waveguide_loss_db_ns 0.006");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\"output_prob\": 0.7197"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\"required_switches_m\": 16"), std::string::npos) << r.out;
}

TEST(Cli, SwitchesTable) {
    const auto r = cli("switches --p 0.05 --N 134 --q 0.999");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "cycles_N,gen_prob_p,switch_budget_q,required_switches_m,cdf_at_m");
    EXPECT_NE(r.out.find("134,0.05,0.999,16,"), std::string::npos) << r.out;
}

TEST(Cli, SweepWritesFile) {
    const auto path = temp_file("sweep.csv");
    const auto r = cli("sweep --axis sources_S=1,2 --axis cycles_N=5 --out " + path.string());
    ASSERT_EQ(r.code, 0);
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    std::filesystem::remove(path);
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(cli("").code, 1);
    EXPECT_EQ(cli("figures fig9").code, 1);
    EXPECT_EQ(cli("sweep --axis nonsense=1").code, 1);
    EXPECT_EQ(cli("analytic --no-such-flag 3").code, 1);
}

TEST(Cli, ConfigErrorsExitTwo) {
    EXPECT_EQ(cli("analytic --gen_prob_p 1.5").code, 2);
    EXPECT_EQ(cli("analytic --storage_policy hoard").code, 2);
    EXPECT_EQ(cli("analytic --loop_traversal_ns 500").code, 2);
    const auto path = temp_file("bad.json");
    std::ofstream(path) << "{ not json";
    EXPECT_EQ(cli("analytic --config " + path.string()).code, 2);
    std::filesystem::remove(path);
}

TEST(Cli, IoErrorsExitThree) {
    EXPECT_EQ(cli("analytic --config /nonexistent/racetrack.json").code, 3);
    EXPECT_EQ(cli("switches --out /nonexistent-dir/out.csv").code, 3);
}

TEST(Cli, EventLogValidates) {
    const auto path = temp_file("events.jsonl");
    const auto r = cli("simulate --trials 50 --sources_S 3 --cycles_N 40 --gen_prob_p 0.2 --switches_per_source_m 4 "
                       "--event-log " + path.string() + " --log-trials 10");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\"schedule_violations\": 0"), std::string::npos) << r.out;
    EXPECT_EQ(cli("validate-log " + path.string()).code, 0);

    std::ofstream(path, std::ios::app)
        << "{\"type\":\"episode\",\"trial\":99,\"sources\":1,\"switches_per_source\":1,\"cycles\":2}\n"
        << "{\"type\":\"cycle\",\"cycle\":0,\"heralds\":[0],\"selected\":0,"
           "\"actions\":[{\"action\":\"insert\",\"source\":0,\"slot\":0}],"
           "\"photon_stored\":true,\"stored_age\":0,\"survived\":null,\"discarded\":0}\n";
    EXPECT_EQ(cli("validate-log " + path.string()).code, 2);
    std::filesystem::remove(path);
}

TEST(Cli, SampleConfigsRun) {
    const std::string dir = RACETRACK_SOURCE_DIR "/configs/";
    EXPECT_EQ(cli("analytic --config " + dir + "baseline.json").code, 0);
    EXPECT_EQ(cli("sweep --config " + dir + "delay_sweep.json --trials 500").code, 0);
}
