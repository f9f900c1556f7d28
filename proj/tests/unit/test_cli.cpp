#include <sscd/metrics.hpp>
#include <sscd/reporter.hpp>

#include "corpus.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string output;
};

// Runs the CLI through the shell with stderr folded into the captured output.
CliRun run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + "\"" SSCD_CLI_PATH "\" " + args + " 2>&1";
    CliRun r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
    int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        static int counter = 0;
        dir_ = fs::temp_directory_path() / ("sscd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(dir_);
        fs::create_directories(dir_ / "src");
        // two identical 5-LOC functions
        std::ofstream(dir_ / "src" / "a.c") << "int f(int a) {\n  int b = a;\n  b += 2;\n  return b;\n}\n";
        std::ofstream(dir_ / "src" / "b.c") << "int g(int x) {\n  int y = x;\n  y += 7;\n  return y;\n}\n";
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string detect(const std::string& extra) const {
        return "detect --source " + (dir_ / "src").string() + " --out " + (dir_ / "out").string() + " " + extra;
    }
    static std::size_t fragment_count(const CliRun& r) {
        std::smatch m;
        if (!std::regex_search(r.output, m, std::regex(R"((\d+) fragments, )"))) return SIZE_MAX;
        return std::stoul(m[1]);
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpExitsZero) {
    auto r = run("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.output.find("detect"), std::string::npos);
    EXPECT_NE(r.output.find("bench"), std::string::npos);
    auto sub = run("detect --help");
    EXPECT_EQ(sub.code, 0);
    EXPECT_NE(sub.output.find("--similarity"), std::string::npos);
}

TEST_F(CliTest, DetectSucceeds) {
    auto r = run(detect("--min-loc 3 --similarity 0.95"));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(fragment_count(r), 2u);
    auto rows = sscd::read_report(dir_ / "out" / "report.csv");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].pair.similarity, 1.0, 1e-6);
}

TEST_F(CliTest, UserErrorsExitOne) {
    EXPECT_EQ(run("").code, 1) << "a subcommand is required";
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run(detect("--similarity 1.5")).code, 1);
    EXPECT_EQ(run(detect("--search-type lsh")).code, 1);
    EXPECT_EQ(run("detect --source " + (dir_ / "missing").string()).code, 1);
    EXPECT_EQ(run("detect").code, 1);
    EXPECT_EQ(run("eval --report nope.csv --truth nope.csv").code, 1);
    auto r = run(detect("--save-index " + (dir_ / "i.bin").string()));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("error:"), std::string::npos);
}

TEST_F(CliTest, ServiceFailureIsInternalError) {
    auto r = run(detect("--min-loc 3 --provider remote --endpoint http://127.0.0.1:9"));
    EXPECT_EQ(r.code, 2) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "out" / "report.csv"));
}

TEST_F(CliTest, ConfigPrecedence) {
    auto cfg = dir_ / "sscd.toml";
    std::ofstream(cfg) << "min_loc = 10\n";
    // env alone
    EXPECT_EQ(fragment_count(run(detect(""), "SSCD_MIN_LOC=3")), 2u);
    // the file beats env
    EXPECT_EQ(fragment_count(run(detect("--config " + cfg.string()), "SSCD_MIN_LOC=3")), 0u);
    // flags beat the file
    EXPECT_EQ(fragment_count(run(detect("--config " + cfg.string() + " --min-loc 3"))), 2u);
    EXPECT_EQ(fragment_count(run("--config " + cfg.string() + " " + detect("--min-loc 3"))), 2u);

    std::ofstream(cfg, std::ios::trunc) << "no_such_key = 1\n";
    EXPECT_EQ(run(detect("--config " + cfg.string())).code, 1);
    EXPECT_EQ(run(detect("--config " + (dir_ / "absent.toml").string())).code, 1);
}

TEST_F(CliTest, EvalAndBench) {
    sscd::testing::CorpusSpec spec;
    spec.base_functions = 20;
    spec.t1 = 4;
    spec.t2 = 4;
    spec.st3 = 0;
    auto corpus = sscd::testing::generate_corpus(dir_ / "corpus", spec);
    sscd::save_ground_truth(dir_ / "truth.csv", corpus.truth);
    auto d = run("detect --min-loc 3 --similarity 0.95 --source " + (dir_ / "corpus").string() + " --out " +
                 (dir_ / "out").string());
    ASSERT_EQ(d.code, 0) << d.output;
    auto e = run("eval --report " + (dir_ / "out" / "report.csv").string() + " --truth " +
                 (dir_ / "truth.csv").string() + " --review 285,32,21,62 --out " + (dir_ / "eval.json").string());
    ASSERT_EQ(e.code, 0) << e.output;
    EXPECT_NE(e.output.find("100.00"), std::string::npos) << e.output;
    EXPECT_TRUE(fs::exists(dir_ / "eval.json"));
    EXPECT_EQ(run("eval --report " + (dir_ / "out" / "report.csv").string() + " --truth " +
                  (dir_ / "truth.csv").string() + " --review 1,2,3")
                  .code,
              1);

    auto b = run("bench --n 300 --dimension 16 --queries 50");
    EXPECT_EQ(b.code, 0) << b.output;
    EXPECT_NE(b.output.find("graph audit: ok"), std::string::npos);
    EXPECT_EQ(run("bench --n 5").code, 1);
}

TEST_F(CliTest, EmbedCacheBuildAndInspect) {
    auto cache = dir_ / "cache.bin";
    auto r = run("embed-cache --min-loc 3 --dimension 64 --source " + (dir_ / "src").string() + " --out " + cache.string());
    ASSERT_EQ(r.code, 0) << r.output;
    auto i = run("embed-cache --inspect " + cache.string());
    EXPECT_EQ(i.code, 0);
    EXPECT_NE(i.output.find("count 2"), std::string::npos);
    EXPECT_NE(i.output.find("dimension 64"), std::string::npos);
    auto cached = run(detect("--min-loc 3 --dimension 64 --embeddings " + cache.string()));
    EXPECT_EQ(cached.code, 0) << cached.output;
    EXPECT_NE(cached.output.find("\"inference_ms\": 0"), std::string::npos) << cached.output;
}
