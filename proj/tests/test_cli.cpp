#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#ifndef DEVREC_CLI_PATH
#error "DEVREC_CLI_PATH must name the devrec executable"
#endif

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = fs::temp_directory_path() / ("devrec_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir_);
    }
    static void TearDownTestSuite() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    // Runs the CLI with `args`; stdout goes to `out`, stderr is discarded.
    static int run(const std::string& args, std::string* out = nullptr) {
        const fs::path capture = dir_ / "stdout.txt";
        const std::string cmd = std::string(DEVREC_CLI_PATH) + " " + args + " > " + capture.string() + " 2>/dev/null";
        const int status = std::system(cmd.c_str());
        if (out) {
            std::ifstream in(capture);
            std::stringstream ss;
            ss << in.rdbuf();
            *out = ss.str();
        }
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static std::string p(const std::string& name) { return (dir_ / name).string(); }

    static inline fs::path dir_;
};

} // namespace

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("train --features x.txt"), 1);
    EXPECT_EQ(run("train --features x.txt --classifier colour --out m.txt"), 1);
    EXPECT_EQ(run("predict --models a b --weights-from r --image i"), 1);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(CliTest, DataErrors) {
    EXPECT_EQ(run("extract --data " + p("nowhere") + " --out " + p("f.txt")), 2);
    EXPECT_EQ(run("train --features " + p("nowhere.txt") + " --classifier shadow --out " + p("m.txt")), 2);
    {
        std::ofstream bad(p("bad_features.txt"));
        bad << "0,shadow,1,2,3\n";
    }
    EXPECT_EQ(run("train --features " + p("bad_features.txt") + " --classifier shadow --out " + p("m.txt")), 2);
}

TEST_F(CliTest, EndToEnd) {
    const std::string data = p("corpus");
    ASSERT_EQ(run("synth --out " + data + " --classes 3 --per-class 12 --seed 5"), 0);
    ASSERT_EQ(run("extract --data " + data + " --out " + p("features.txt")), 0);
    {
        std::ifstream in(p("features.txt"));
        std::size_t lines = 0;
        for (std::string line; std::getline(in, line);)
            ++lines;
        EXPECT_EQ(lines, 3u * 36);
    }

    for (const char* c : {"shadow", "chaincode", "intersection"})
        ASSERT_EQ(run(std::string("train --features ") + p("features.txt") + " --classifier " + c +
                      " --hidden 6 --epochs 40 --seed 2 --out " + p(std::string(c) + ".model")),
                  0)
            << c;
    // momentum must stay below one: the trainer refuses
    EXPECT_EQ(run("train --features " + p("features.txt") + " --classifier shadow --momentum 1 --out " + p("x.model")), 3);

    {
        std::ofstream cfg(p("cv.cfg"));
        cfg << "epochs=40\nhidden.shadow=6\nhidden.chaincode=8\nhidden.intersection=6\nseed=3\n";
    }
    std::string summary;
    ASSERT_EQ(run("cv --data " + data + " --config " + p("cv.cfg") + " --report " + p("report.txt"), &summary), 0);
    EXPECT_NE(summary.find("ensemble      top-1"), std::string::npos);

    {
        std::ofstream cfg(p("bad.cfg"));
        cfg << "epochz=40\n";
    }
    EXPECT_EQ(run("cv --data " + data + " --config " + p("bad.cfg") + " --report " + p("r2.txt")), 1);

    const std::string models = p("chaincode.model") + " " + p("shadow.model") + " " + p("intersection.model");
    std::string ranked;
    ASSERT_EQ(run("predict --models " + models + " --weights-from " + p("report.txt") + " --image " + data +
                      "/c01/s000.pgm --top 2",
                  &ranked),
              0);
    std::istringstream lines(ranked);
    std::string first, second, extra;
    ASSERT_TRUE(std::getline(lines, first));
    ASSERT_TRUE(std::getline(lines, second));
    EXPECT_FALSE(std::getline(lines, extra));
    EXPECT_EQ(first.rfind("1 ", 0), 0u);
    EXPECT_EQ(second.rfind("2 ", 0), 0u);

    {
        std::ofstream junk(p("junk.pgm"));
        junk << "not an image";
    }
    EXPECT_EQ(run("predict --models " + models + " --weights-from " + p("report.txt") + " --image " + p("junk.pgm")), 2);
    EXPECT_EQ(run("predict --models " + models + " --weights-from " + p("features.txt") + " --image " + data +
                  "/c01/s000.pgm"),
              2);
}
