#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pdwsim/emitters.hpp"
#include "pdwsim/errors.hpp"

namespace pdwsim {
namespace {

EmitterSpec make_spec(OperatingMode mode, double start_us = 0.0) {
    EmitterSpec spec;
    spec.mode = std::move(mode);
    spec.start_us = start_us;
    spec.type.tx_power_dbm = 50.0;
    return spec;
}

OperatingMode constant_mode(double pri, double freq = 1000.0, double pw = 1.0) {
    return {ConstantPri{pri}, FrequencyProgram{{freq}, 1}, PulseWidthProgram{{pw}}};
}

TEST(NextInterval, ConstantIgnoresIndex) {
    Rng rng{Seed(1)};
    for (std::uint64_t i : {0u, 1u, 17u, 100000u}) EXPECT_EQ(next_interval(ConstantPri{1000}, i, rng), 1000.0);
}

TEST(NextInterval, StaggerCycles) {
    Rng rng{Seed(1)};
    const PriPattern p = StaggeredPri{{200, 300}};
    EXPECT_EQ(next_interval(p, 0, rng), 200.0);
    EXPECT_EQ(next_interval(p, 3, rng), 300.0);
    EXPECT_EQ(next_interval(p, 4, rng), 200.0);
}

TEST(NextInterval, JitterMonteCarlo) {
    Rng rng{Seed(77)};
    const PriPattern p = JitteredPri{100.0, 0.1};
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = next_interval(p, static_cast<std::uint64_t>(i), rng);
        ASSERT_GE(x, 90.0);
        ASSERT_LE(x, 110.0);
        sum += x;
    }
    const double mean = sum / n;
    EXPECT_GE(mean, 99.5);
    EXPECT_LE(mean, 100.5);
}

TEST(EmitPulses, ConstantGrid) {
    Rng rng{Seed(1)};
    const auto pulses = emit_pulses(make_spec(constant_mode(1000)), 10000, rng);
    ASSERT_EQ(pulses.size(), 10u);
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        EXPECT_EQ(pulses[i].tx_time_us, 1000.0 * static_cast<double>(i));
        EXPECT_EQ(pulses[i].tx_freq_mhz, 1000.0);
        EXPECT_EQ(pulses[i].tx_power_dbm, 50.0);
    }
}

TEST(EmitPulses, StaggerScheduleWalk) {
    const std::vector<double> levels{2000, 3000};
    // Manual walk: accumulate levels in order until the duration is reached.
    std::vector<double> expected;
    double t = 0;
    for (std::size_t n = 0; t < 10001; t += levels[n++ % 2]) expected.push_back(t);
    ASSERT_EQ(expected, (std::vector<double>{0, 2000, 5000, 7000, 10000}));

    Rng rng{Seed(1)};
    OperatingMode mode{StaggeredPri{levels}, FrequencyProgram{{1000}, 1}, PulseWidthProgram{{1}}};
    const auto pulses = emit_pulses(make_spec(mode), 10001, rng);
    std::vector<double> times;
    for (const auto& p : pulses) times.push_back(p.tx_time_us);
    EXPECT_EQ(times, expected);
}

TEST(EmitPulses, HoppingAlternates) {
    Rng rng{Seed(1)};
    OperatingMode mode{ConstantPri{10}, FrequencyProgram{{1000, 2000}, 1}, PulseWidthProgram{{1}}};
    const auto pulses = emit_pulses(make_spec(mode), 40, rng);
    ASSERT_EQ(pulses.size(), 4u);
    EXPECT_EQ(pulses[0].tx_freq_mhz, 1000.0);
    EXPECT_EQ(pulses[1].tx_freq_mhz, 2000.0);
    EXPECT_EQ(pulses[2].tx_freq_mhz, 1000.0);
    EXPECT_EQ(pulses[3].tx_freq_mhz, 2000.0);
}

TEST(EmitPulses, HopEveryNAndCyclicWidths) {
    Rng rng{Seed(1)};
    OperatingMode mode{ConstantPri{10}, FrequencyProgram{{1000, 2000, 3000}, 2}, PulseWidthProgram{{1, 2, 3, 4}}};
    const auto pulses = emit_pulses(make_spec(mode), 80, rng);
    ASSERT_EQ(pulses.size(), 8u);
    const double freqs[] = {1000, 1000, 2000, 2000, 3000, 3000, 1000, 1000};
    const double widths[] = {1, 2, 3, 4, 1, 2, 3, 4};
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_EQ(pulses[i].tx_freq_mhz, freqs[i]) << i;
        EXPECT_EQ(pulses[i].pw_us, widths[i]) << i;
    }
}

TEST(EmitPulses, StartsAtPhaseOffset) {
    Rng rng{Seed(1)};
    const auto pulses = emit_pulses(make_spec(constant_mode(1000), 2500), 10000, rng);
    ASSERT_FALSE(pulses.empty());
    EXPECT_EQ(pulses.front().tx_time_us, 2500.0);
    EXPECT_EQ(pulses.size(), 8u);
}

TEST(EmitPulses, InvalidModesRejected) {
    Rng rng{Seed(1)};
    EXPECT_THROW(emit_pulses(make_spec(constant_mode(0)), 100, rng), ConfigError);
    EXPECT_THROW(emit_pulses(make_spec(constant_mode(-5)), 100, rng), ConfigError);
    OperatingMode one_level{StaggeredPri{{100}}, FrequencyProgram{{1000}, 1}, PulseWidthProgram{{1}}};
    EXPECT_THROW(emit_pulses(make_spec(one_level), 100, rng), ConfigError);
    OperatingMode wild{JitteredPri{100, 0.5}, FrequencyProgram{{1000}, 1}, PulseWidthProgram{{1}}};
    EXPECT_THROW(emit_pulses(make_spec(wild), 100, rng), ConfigError);
    OperatingMode no_channels{ConstantPri{100}, FrequencyProgram{{}, 1}, PulseWidthProgram{{1}}};
    EXPECT_THROW(emit_pulses(make_spec(no_channels), 100, rng), ConfigError);
}

TEST(EmitPulses, ChannelsOutsideTypeBandRejected) {
    Rng rng{Seed(1)};
    auto spec = make_spec(constant_mode(100, 5000));
    spec.type.freq_min_mhz = 1000;
    spec.type.freq_max_mhz = 2000;
    EXPECT_THROW(emit_pulses(spec, 1000, rng), ConfigError);
}

TEST(EmitPulses, JitteredTimesStrictlyIncrease) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng{Seed(s)};
        OperatingMode mode{JitteredPri{50, 0.49}, FrequencyProgram{{1000}, 1}, PulseWidthProgram{{1}}};
        const auto pulses = emit_pulses(make_spec(mode), 1e5, rng);
        for (std::size_t i = 1; i < pulses.size(); ++i) ASSERT_GT(pulses[i].tx_time_us, pulses[i - 1].tx_time_us);
        ASSERT_LT(pulses.back().tx_time_us, 1e5);
    }
}

TEST(EmitPulses, StaggerDifferencesHaveLevelPeriod) {
    Rng rng{Seed(2)};
    const std::vector<double> levels{110, 170, 130};
    OperatingMode mode{StaggeredPri{levels}, FrequencyProgram{{1000}, 1}, PulseWidthProgram{{1}}};
    const auto pulses = emit_pulses(make_spec(mode), 1e5, rng);
    for (std::size_t i = 1; i < pulses.size(); ++i) {
        const double d = pulses[i].tx_time_us - pulses[i - 1].tx_time_us;
        ASSERT_NEAR(d, levels[(i - 1) % 3], 1e-9);
    }
}

TEST(ScanGain, MainLobeAndFloor) {
    const AntennaScan scan{5.0, 4.0, -30.0};
    EXPECT_NEAR(scan_gain_db(scan, 0.0), 0.0, 1e-12);
    EXPECT_EQ(scan_gain_db(scan, 90.0), -30.0);
    EXPECT_EQ(scan_gain_db(scan, -179.0), -30.0);
    EXPECT_LT(scan_gain_db(scan, 2.0), 0.0);
    EXPECT_GE(scan_gain_db(scan, 2.0), -30.0);
    EXPECT_EQ(scan_gain_db(scan, 1.0), scan_gain_db(scan, -1.0));
}

TEST(Catalogue, Deterministic) {
    const auto a = sample_catalogue(Seed(1));
    const auto b = sample_catalogue(Seed(1));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].freq_min_mhz, b[i].freq_min_mhz);
        EXPECT_EQ(a[i].pw_max_us, b[i].pw_max_us);
        EXPECT_EQ(a[i].pri_min_us, b[i].pri_min_us);
        EXPECT_EQ(a[i].allowed_modes, b[i].allowed_modes);
        EXPECT_EQ(a[i].scan.has_value(), b[i].scan.has_value());
    }
    const auto c = sample_catalogue(Seed(2));
    EXPECT_NE(a[0].freq_min_mhz, c[0].freq_min_mhz);
}

TEST(Catalogue, EnvelopesHold) {
    for (std::uint64_t s : {1u, 2u, 99u}) {
        const auto cat = sample_catalogue(Seed(s));
        ASSERT_EQ(cat.size(), 68u);
        std::size_t scanning = 0, wide = 0, long_pulse = 0;
        for (std::size_t i = 0; i < cat.size(); ++i) {
            const auto& t = cat[i];
            EXPECT_EQ(t.type_id, i);
            EXPECT_GE(t.pw_min_us, 0.007);
            EXPECT_LE(t.pw_max_us, 368.522);
            EXPECT_LE(t.pw_min_us, t.pw_max_us);
            EXPECT_GE(t.freq_min_mhz, 500.0);
            EXPECT_LE(t.freq_max_mhz, 18000.0);
            EXPECT_LT(t.freq_min_mhz, t.freq_max_mhz);
            EXPECT_GT(t.pri_min_us, 0.0);
            EXPECT_LE(t.pri_min_us, t.pri_max_us);
            EXPECT_NE(t.allowed_modes, 0);
            scanning += t.scan.has_value();
            wide += (t.freq_max_mhz - t.freq_min_mhz) > 100.0;
            long_pulse += t.pw_min_us >= 2.0;
        }
        EXPECT_GT(scanning, 0u);
        EXPECT_LT(scanning, 68u);
        EXPECT_GT(wide, 0u);
        EXPECT_LT(wide, 68u);
        EXPECT_GT(long_pulse, 0u);
        EXPECT_LT(long_pulse, 68u);
    }
}

}  // namespace
}  // namespace pdwsim
