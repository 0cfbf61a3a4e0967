#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string output;
};

CmdResult run(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "dlsq_cli_test.log";
    const std::string cmd = std::string("env -u DLSQ_OUT_ROOT ") + DLSQ_CLI + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream s;
    s << in.rdbuf();
    r.output = s.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string config(const std::string& name) { return std::string(DLSQ_CONFIG_DIR) + "/" + name; }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("dlsq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }

    fs::path dir_;
};

TEST_F(Cli, ToyWeightsWritesCsvAndFrames) {
    const CmdResult r = run("toy " + config("toy_weights.ini") + " --out " + (dir_ / "toy").string());
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream csv(dir_ / "toy" / "trajectory.csv");
    std::size_t lines = 0;
    for (std::string line; std::getline(csv, line);) ++lines;
    EXPECT_EQ(lines, 1u + 201u);
    EXPECT_TRUE(fs::exists(dir_ / "toy" / "frames" / "step_0000.svg"));
    EXPECT_TRUE(fs::exists(dir_ / "toy" / "frames" / "step_0200.svg"));
    EXPECT_FALSE(fs::exists(dir_ / "toy" / "frames" / "step_0001.svg"));
}

TEST_F(Cli, ToyModeFlagOverridesConfig) {
    const CmdResult r = run("toy " + config("toy_weights.ini") + " --mode coords --out " + (dir_ / "t").string());
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("toy coords"), std::string::npos);
}

TEST_F(Cli, ToyIsByteIdenticalAcrossRuns) {
    ASSERT_EQ(run("toy " + config("toy_both.ini") + " --out " + (dir_ / "a").string()).code, 0);
    ASSERT_EQ(run("toy " + config("toy_both.ini") + " --out " + (dir_ / "b").string()).code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "trajectory.csv"), slurp(dir_ / "b" / "trajectory.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "frames" / "step_0100.svg"), slurp(dir_ / "b" / "frames" / "step_0100.svg"));
}

TEST_F(Cli, MissingConfigExitsOne) {
    EXPECT_EQ(run("toy " + (dir_ / "nope.ini").string()).code, 1);
}

TEST_F(Cli, NegativeLearningRateExitsOneNamingKey) {
    const fs::path cfg = write("bad.ini", "[toy]\nlr = -0.1\n");
    const CmdResult r = run("toy " + cfg.string() + " --out " + (dir_ / "t").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("bad.ini:2: toy.lr"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "t"));
}

TEST_F(Cli, DivergingToyExitsTwoWithoutPartialFiles) {
    const fs::path cfg = write("wild.ini", "[toy]\nmode = coords\nlr = 1e200\n");
    const CmdResult r = run("toy " + cfg.string() + " --out " + (dir_ / "t").string());
    EXPECT_EQ(r.code, 2) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "t" / "trajectory.csv"));
}

TEST_F(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("check --suite everything").code, 1);
    EXPECT_EQ(run("train " + config("lanes.ini") + " --regime adam").code, 1);
}

TEST_F(Cli, CheckSuitesPass) {
    for (const char* suite : {"grads", "losses", "oracle"}) {
        const CmdResult r = run(std::string("check --suite ") + suite + " --count 50");
        EXPECT_EQ(r.code, 0) << suite << ": " << r.output;
        EXPECT_NE(r.output.find("0 failures"), std::string::npos);
    }
}

TEST_F(Cli, GenScenesIsByteIdentical) {
    const fs::path cfg = write("small.ini", "[scenes]\ntrain = 3\nval = 2\n\n[scenes.distractor]\ncount = 2\n");
    ASSERT_EQ(run("gen-scenes " + cfg.string() + " --out " + (dir_ / "a").string()).code, 0);
    ASSERT_EQ(run("gen-scenes " + cfg.string() + " --out " + (dir_ / "b").string()).code, 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir_ / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / fs::relative(e.path(), dir_ / "a"))) << e.path();
    }
    EXPECT_EQ(files, 3u + 2u + 2u + 1u);
    EXPECT_TRUE(fs::exists(dir_ / "a" / "val" / "scene_000004.lsim"));
    EXPECT_EQ(slurp(dir_ / "a" / "train" / "scene_000001.lsim").substr(0, 5), "LSIM1");
}

TEST_F(Cli, TrainThenEvalOnSmallConfig) {
    const fs::path cfg = write("tiny.ini", "[scenes]\ntrain = 4\nval = 2\n\n[scenes.distractor]\ncount = 2\n\n"
                                           "[train]\nepochs = 2\nbatch_size = 2\n\n[output]\ndir = " +
                                               (dir_ / "run").string() + "\n");
    EXPECT_EQ(run("eval " + cfg.string()).code, 1);
    ASSERT_EQ(run("train " + cfg.string() + " --regime end2end").code, 0);
    ASSERT_EQ(run("train " + cfg.string() + " --regime xent").code, 0);
    const std::string report_a = slurp(dir_ / "run" / "end2end" / "report.csv");
    EXPECT_EQ(report_a.rfind("epoch,train_loss,val_error\n1,", 0), 0u);
    EXPECT_TRUE(fs::exists(dir_ / "run" / "xent" / "params.txt"));
    EXPECT_TRUE(fs::exists(dir_ / "run" / "end2end" / "meta.txt"));

    ASSERT_EQ(run("train " + cfg.string() + " --regime end2end").code, 0);
    EXPECT_EQ(slurp(dir_ / "run" / "end2end" / "report.csv"), report_a);

    const CmdResult r = run("eval " + cfg.string() + " --report " + (dir_ / "eval.csv").string());
    ASSERT_EQ(r.code, 0) << r.output;
    const std::string eval = slurp(dir_ / "eval.csv");
    EXPECT_EQ(eval.rfind("regime,mode,val_error,curves,degenerate,distractor_share\nend2end,end_to_end,", 0), 0u);
    EXPECT_NE(eval.find("\nxent,two_step,"), std::string::npos);
}

TEST_F(Cli, OutputRootEnvironmentVariable) {
    const std::string cmd = std::string("DLSQ_OUT_ROOT=") + dir_.string() + " " + DLSQ_CLI + " toy " +
                            config("toy_coords.ini") + " > /dev/null";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "toy_coords" / "trajectory.csv"));
}

}  // namespace
