#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "pdwsim/dataset_io.hpp"
#include "pdwsim/errors.hpp"
#include "pdwsim/scenario.hpp"
#include "test_support.hpp"

namespace pdwsim {
namespace {

using testing::ScratchDir;

ScenarioConfig desk_config(double collection_us = 2e5) {
    ScenarioConfig c;
    c.collection_us = collection_us;
    c.splits = {2, 1, 1};
    return c;
}

TEST(EmitterCount, ZeroCapMeansEmpty) {
    ScenarioConfig c;
    c.max_emitters = 0;
    c.tail_start = 0;
    for (std::uint64_t s = 0; s < 50; ++s) EXPECT_TRUE(sample_scenario(c, Seed(s)).emitters.empty());
}

TEST(EmitterCount, FlatThenTailOff) {
    Rng rng{Seed(17)};
    std::vector<int> hist(101, 0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto k = sample_emitter_count(100, 80, rng);
        ASSERT_LE(k, 100u);
        ++hist[k];
    }
    // Expected weights: 1 up to 80, then (101 - k) / 21.
    double total_weight = 81;
    for (int k = 81; k <= 100; ++k) total_weight += (101.0 - k) / 21.0;
    const double flat = n / total_weight;
    int low = 0, high = 0;
    for (int k = 0; k <= 80; ++k) low += hist[static_cast<std::size_t>(k)];
    for (int k = 81; k <= 100; ++k) high += hist[static_cast<std::size_t>(k)];
    EXPECT_NEAR(low, 81 * flat, 4 * std::sqrt(81 * flat));
    for (int b = 0; b < 8; ++b) {
        int c = 0;
        for (int k = 10 * b; k < 10 * b + 10; ++k) c += hist[static_cast<std::size_t>(k)];
        EXPECT_NEAR(c, 10 * flat, 5 * std::sqrt(10 * flat)) << b;
    }
    // Decay: the top ten counts carry well under a flat share.
    int top = 0;
    for (int k = 91; k <= 100; ++k) top += hist[static_cast<std::size_t>(k)];
    EXPECT_LT(top, 0.4 * 10 * flat);
    EXPECT_GT(high, 0);
}

TEST(Scenario, Deterministic) {
    const auto c = desk_config();
    const auto a = sample_scenario(c, Seed(5));
    const auto b = sample_scenario(c, Seed(5));
    ASSERT_EQ(a.emitters.size(), b.emitters.size());
    for (std::size_t i = 0; i < a.emitters.size(); ++i) {
        EXPECT_EQ(a.emitters[i].position, b.emitters[i].position);
        EXPECT_EQ(a.emitters[i].start_us, b.emitters[i].start_us);
        EXPECT_EQ(a.emitters[i].type.type_id, b.emitters[i].type.type_id);
    }
    EXPECT_EQ(simulate(a, c), simulate(b, c));
}

TEST(Scenario, EmittersRespectConfig) {
    const auto c = desk_config();
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto sc = sample_scenario(c, Seed(s));
        for (std::size_t i = 0; i < sc.emitters.size(); ++i) {
            const auto& e = sc.emitters[i];
            EXPECT_EQ(e.emitter_id, i);
            const double d = distance_m(e.position, sc.receiver.position);
            EXPECT_GE(d, c.min_distance_m);
            EXPECT_LE(d, c.arena_radius_m);
            EXPECT_GE(e.start_us, 0.0);
            EXPECT_LT(e.start_us, c.collection_us);
            EXPECT_NO_THROW(validate_mode(e.mode));
            for (double ch : e.mode.freq.channels_mhz) {
                EXPECT_GE(ch, e.type.freq_min_mhz);
                EXPECT_LE(ch, e.type.freq_max_mhz);
            }
        }
    }
}

TEST(Scenario, ScanModeGetsSchedule) {
    auto c = desk_config();
    c.mode = ReceiverMode::scan;
    const auto sc = sample_scenario(c, Seed(3));
    ASSERT_TRUE(sc.receiver.schedule.has_value());
    const auto train = simulate(sc, c);
    for (const auto& p : train.pulses) ASSERT_TRUE(in_band(p.freq_mhz, dwell_at(*sc.receiver.schedule, p.toa_us)));
}

TEST(Scenario, TestSplitRaisesCap) {
    const ScenarioConfig c;
    EXPECT_EQ(split_config(c, Split::train).max_emitters, 100u);
    EXPECT_EQ(split_config(c, Split::validation).max_emitters, 100u);
    EXPECT_EQ(split_config(c, Split::test).max_emitters, 110u);

    std::uint32_t train_max = 0, test_max = 0;
    for (std::uint32_t i = 0; i < 3000; ++i) {
        train_max = std::max<std::uint32_t>(
            train_max, static_cast<std::uint32_t>(sample_scenario(split_config(c, Split::train), Seed(i)).emitters.size()));
        test_max = std::max<std::uint32_t>(
            test_max, static_cast<std::uint32_t>(sample_scenario(split_config(c, Split::test), Seed(i)).emitters.size()));
    }
    EXPECT_LE(train_max, 100u);
    EXPECT_GT(test_max, 100u);
    EXPECT_LE(test_max, 110u);
}

TEST(Config, ParseOverridesAndRoundTrip) {
    const auto c = parse_config(
        "# desk run\n"
        "mode = scan\n"
        "collection_us = 250000\n"
        "noise.sigma_aoa_deg = 2.5\n"
        "detection.always_detect = true\n"
        "splits.train = 7\n");
    EXPECT_EQ(c.mode, ReceiverMode::scan);
    EXPECT_EQ(c.collection_us, 250000.0);
    EXPECT_EQ(c.noise.sigma_aoa_deg, 2.5);
    EXPECT_TRUE(c.detection.always_detect);
    EXPECT_EQ(c.splits.train, 7u);
    EXPECT_EQ(c.max_emitters, 100u);
    EXPECT_EQ(parse_config(to_config_text(c)), c);
    EXPECT_EQ(parse_config(to_config_text(ScenarioConfig{})), ScenarioConfig{});
}

TEST(Config, ErrorsNameTheLine) {
    auto message = [](const char* text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("mode = stare\nbogus_key = 1\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("max_emitters = lots\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("mode = sideways\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("mode = stare\nmode = scan\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("no equals sign\n").find("line 1"), std::string::npos);
}

TEST(Config, ValidationRejectsBadValues) {
    EXPECT_THROW(parse_config("collection_us = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("arena_radius_m = 500\n"), ConfigError);
    EXPECT_THROW(parse_config("detection.slope_db = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("noise.sigma_toa_us = -1\n"), ConfigError);
}

TEST(Dataset, SplitCountsAndManifest) {
    ScratchDir dir("ds_counts");
    const auto m = generate_dataset(desk_config(), 99, dir.path(), 2);
    ASSERT_EQ(m.entries.size(), 4u);
    std::map<Split, int> per_split;
    std::set<std::uint64_t> seeds;
    for (const auto& e : m.entries) {
        ++per_split[e.split];
        seeds.insert(e.seed);
        EXPECT_TRUE(std::filesystem::exists(dir.path() / e.file));
        EXPECT_TRUE(std::filesystem::exists(metadata_path(dir.path() / e.file)));
        EXPECT_EQ(e.seed, train_seed(99, e.split, e.index));
        const auto meta = read_metadata(metadata_path(dir.path() / e.file));
        EXPECT_EQ(meta.seed, e.seed);
        EXPECT_EQ(meta.num_emitters, e.num_emitters);
    }
    EXPECT_EQ(seeds.size(), 4u);
    EXPECT_EQ(per_split[Split::train], 2);
    EXPECT_EQ(per_split[Split::validation], 1);
    EXPECT_EQ(per_split[Split::test], 1);

    std::size_t bins = 0;
    for (const auto& f : std::filesystem::recursive_directory_iterator(dir.path())) bins += f.path().extension() == ".bin";
    EXPECT_EQ(bins, 4u);

    const auto back = read_manifest(dir / kManifestName);
    EXPECT_EQ(back, m);
}

TEST(Dataset, RegenerationFromManifestIsByteIdentical) {
    ScratchDir dir("ds_regen");
    const auto m = generate_dataset(desk_config(), 123, dir / "a", 3);
    const auto manifest = read_manifest(dir / "a" / kManifestName);
    for (const auto& e : manifest.entries) {
        const auto train = generate_train(manifest.config, e.split, e.seed);
        write_train(train, dir / "regen.bin");
        EXPECT_TRUE(testing::slurp(dir / "regen.bin") == testing::slurp(dir / "a" / e.file)) << e.file;
        EXPECT_EQ(train.size(), e.num_pulses);
    }
}

TEST(Dataset, ThreadCountDoesNotChangeBytes) {
    ScratchDir dir("ds_threads");
    generate_dataset(desk_config(), 5, dir / "one", 1);
    generate_dataset(desk_config(), 5, dir / "many", 4);
    EXPECT_EQ(testing::snapshot_tree(dir / "one"), testing::snapshot_tree(dir / "many"));
}

// A seeded train in which one emitter takes more than 99% of the pulses while
// others are still received.
TEST(Dominance, SeededExampleAboveNinetyNinePercent) {
    ScenarioConfig c;
    c.collection_us = 1e6;
    const std::uint64_t seed = 431;
    const auto train = generate_train(c, Split::train, seed);
    std::map<EmitterId, std::size_t> counts;
    for (auto l : train.labels) ++counts[l];
    ASSERT_GE(counts.size(), 2u);
    std::size_t top = 0;
    for (const auto& [id, n] : counts) top = std::max(top, n);
    EXPECT_GT(static_cast<double>(top) / static_cast<double>(train.size()), 0.99);
}

}  // namespace
}  // namespace pdwsim
