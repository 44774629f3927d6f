#include <gtest/gtest.h>

#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pdwsim/dataset_io.hpp"
#include "test_support.hpp"

namespace pdwsim {
namespace {

using testing::ScratchDir;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"pdwsim"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : storage) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write_config(const ScratchDir& dir, const std::string& body = "collection_us = 200000\n") {
    const auto path = dir / "config.txt";
    std::ofstream(path) << body;
    return path.string();
}

LabeledPulseTrain ten_pulses() {
    LabeledPulseTrain t;
    for (int i = 0; i < 10; ++i) {
        t.pulses.push_back({10.0 * i, 1000.0 + 300.0 * (i % 2), 1.0, 20.0 * (i % 2), -60});
        t.labels.push_back(static_cast<EmitterId>(i % 2));
    }
    return t;
}

TEST(Cli, GenerateTwiceIsIdentical) {
    ScratchDir dir("cli_gen");
    const auto cfg = write_config(dir);
    const auto a = run({"generate", "--config", cfg, "--seed", "11", "--out", (dir / "a").string(), "--trains", "2",
                        "--splits", "2,0,0"});
    ASSERT_EQ(a.code, cli::kExitOk) << a.err;
    const auto b = run({"generate", "--config", cfg, "--seed", "11", "--out", (dir / "b").string(), "--trains", "2",
                        "--splits", "2,0,0", "--threads", "3"});
    ASSERT_EQ(b.code, cli::kExitOk) << b.err;
    const auto ta = testing::snapshot_tree(dir / "a");
    EXPECT_EQ(ta, testing::snapshot_tree(dir / "b"));
    EXPECT_EQ(ta.size(), 5u);  // two trains, two sidecars, manifest

    const auto c = run({"generate", "--config", cfg, "--seed", "12", "--out", (dir / "c").string(), "--splits", "2,0,0"});
    ASSERT_EQ(c.code, cli::kExitOk) << c.err;
    EXPECT_NE(ta, testing::snapshot_tree(dir / "c"));
}

TEST(Cli, GeneratePrintsSeedAndResolvedConfig) {
    ScratchDir dir("cli_print");
    const auto r = run({"generate", "--config", write_config(dir), "--seed", "77", "--out", (dir / "d").string(),
                        "--mode", "scan", "--splits", "1,0,0"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("master_seed = 77"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("mode = scan"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("collection_us = 200000"), std::string::npos) << r.out;
}

TEST(Cli, TrainsAndSplitsMustAgree) {
    ScratchDir dir("cli_split");
    const auto r = run({"generate", "--config", write_config(dir), "--seed", "1", "--out", (dir / "x").string(),
                        "--trains", "3", "--splits", "2,0,0"});
    EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST(Cli, TrainsAloneFollowConfigProportions) {
    ScratchDir dir("cli_trains");
    const auto r = run({"generate", "--config", write_config(dir, "collection_us = 100000\n"), "--seed", "1", "--out",
                        (dir / "x").string(), "--trains", "10"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto m = read_manifest(dir / "x" / kManifestName);
    EXPECT_EQ(m.entries.size(), 10u);
    EXPECT_EQ(m.config.splits, (SplitCounts{8, 1, 1}));
}

TEST(Cli, EvaluateAgainstSelf) {
    ScratchDir dir("cli_eval");
    ASSERT_EQ(run({"generate", "--config", write_config(dir), "--seed", "3", "--out", (dir / "d").string(), "--splits",
                   "2,0,0"})
                  .code,
              0);
    const auto before = testing::snapshot_tree(dir / "d");
    const auto r = run({"evaluate", "--truth", (dir / "d").string(), "--pred", (dir / "d").string(), "--count", "500",
                        "--report", (dir / "rep").string()});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("median_v = 1.0\n"), std::string::npos) << r.out;
    EXPECT_NE(testing::slurp(dir / "rep" / "score.txt").find("median_v = 1.0"), std::string::npos);
    EXPECT_EQ(before, testing::snapshot_tree(dir / "d"));
}

TEST(Cli, StatsLeavesInputsUntouched) {
    ScratchDir dir("cli_stats");
    ASSERT_EQ(run({"generate", "--config", write_config(dir), "--seed", "4", "--out", (dir / "d").string(), "--splits",
                   "2,1,0"})
                  .code,
              0);
    const auto before = testing::snapshot_tree(dir / "d");
    const auto r = run({"stats", "--in", (dir / "d").string(), "--csv", (dir / "hist.csv").string()});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("validation"), std::string::npos) << r.out;
    EXPECT_EQ(before, testing::snapshot_tree(dir / "d"));
    EXPECT_EQ(testing::slurp(dir / "hist.csv").rfind("split,quantity,bin_lower,bin_upper,count", 0), 0u);
}

TEST(Cli, WindowByCount) {
    ScratchDir dir("cli_window");
    write_train(ten_pulses(), dir / "t.bin");
    const auto r = run({"window", "--in", (dir / "t.bin").string(), "--count", "4", "--out", (dir / "w").string()});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    std::vector<std::size_t> sizes;
    for (const auto& f : testing::snapshot_tree(dir / "w")) {
        if (f.first.ends_with(".bin")) sizes.push_back(read_train(dir / "w" / f.first).size());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 2}));
}

TEST(Cli, BaselineThenEvaluate) {
    ScratchDir dir("cli_base");
    std::filesystem::create_directories(dir / "truth");
    std::filesystem::create_directories(dir / "pred");
    write_train(ten_pulses(), dir / "truth/t.bin");
    ASSERT_EQ(run({"baseline", "--in", (dir / "truth/t.bin").string(), "--out", (dir / "pred/t.bin").string()}).code, 0);
    const auto r = run({"evaluate", "--truth", (dir / "truth").string(), "--pred", (dir / "pred").string(), "--duration",
                        "1000"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("median_v = 1.0\n"), std::string::npos) << r.out;
}

TEST(Cli, CatalogueJson) {
    ScratchDir dir("cli_cat");
    ASSERT_EQ(run({"catalogue", "--seed", "1", "--out", (dir / "c.json").string()}).code, 0);
    const auto doc = nlohmann::json::parse(testing::slurp(dir / "c.json"));
    EXPECT_EQ(doc.at("transmitter_types").size(), 68u);
    EXPECT_EQ(doc.at("catalogue_seed"), 1);
}

TEST(Cli, ExitCodes) {
    ScratchDir dir("cli_codes");
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"generate", "--seed", "1"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"stats", "--in", dir.path().string(), "--bogus"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"window", "--in", (dir / "none.bin").string(), "--count", "4", "--out", "x"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);

    // Bad config content is a usage error.
    const auto bad_cfg = write_config(dir, "nonsense = 1\n");
    EXPECT_EQ(run({"generate", "--config", bad_cfg, "--seed", "1", "--out", (dir / "o").string()}).code,
              cli::kExitUsage);

    // Corrupt data is a data error.
    std::ofstream(dir / "junk.bin") << "not a train file";
    EXPECT_EQ(run({"window", "--in", (dir / "junk.bin").string(), "--count", "4", "--out", (dir / "w").string()}).code,
              cli::kExitData);
    std::filesystem::create_directories(dir / "t");
    std::filesystem::create_directories(dir / "p");
    write_train(ten_pulses(), dir / "t/a.bin");
    EXPECT_EQ(run({"evaluate", "--truth", (dir / "t").string(), "--pred", (dir / "p").string(), "--count", "4"}).code,
              cli::kExitData);
    // Window policy must be given exactly once.
    EXPECT_EQ(run({"evaluate", "--truth", (dir / "t").string(), "--pred", (dir / "t").string()}).code, cli::kExitUsage);
    EXPECT_EQ(run({"evaluate", "--truth", (dir / "t").string(), "--pred", (dir / "t").string(), "--count", "4",
                   "--duration", "10"})
                  .code,
              cli::kExitUsage);
    EXPECT_EQ(run({"evaluate", "--truth", (dir / "t").string(), "--pred", (dir / "t").string(), "--count", "0"}).code,
              cli::kExitUsage);
}

}  // namespace
}  // namespace pdwsim
