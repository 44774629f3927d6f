#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pdwsim/emitters.hpp"
#include "pdwsim/propagation.hpp"
#include "pdwsim/random.hpp"
#include "pdwsim/receiver.hpp"
#include "pdwsim/types.hpp"

namespace pdwsim {

enum class Split { train, validation, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct SplitCounts {
    std::uint32_t train = 2500;
    std::uint32_t validation = 250;
    std::uint32_t test = 250;

    std::uint32_t operator[](Split s) const {
        return s == Split::train ? train : s == Split::validation ? validation : test;
    }
    std::uint32_t total() const { return train + validation + test; }

    friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// Everything needed to regenerate a dataset apart from the master seed.
/// Serialized as one `key = value` pair per line; see to_config_text().
struct ScenarioConfig {
    ReceiverMode mode = ReceiverMode::stare;
    std::uint32_t max_emitters = 100;
    std::uint32_t test_max_emitters = 110;
    /// Emitter counts above this value become linearly less likely.
    std::uint32_t tail_start = 80;
    double collection_us = 10'000'000.0;
    double arena_radius_m = 200'000.0;
    double min_distance_m = 1'000.0;
    std::uint64_t catalogue_seed = 1;
    NoiseModel noise{0.05, 0.5, 0.01, 1.0, 1.0};
    DetectionCurve detection;
    double noise_floor_db = -100.0;
    double rx_gain_db = 10.0;
    double rx_fov_deg = 360.0;
    SplitCounts splits;

    /// Throws ConfigError on out-of-range values.
    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses `key = value` lines. '#' starts a comment; unknown keys and
/// malformed values throw ConfigError with the line number.
ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base = {});
/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ScenarioConfig& config);

struct Scenario {
    Seed seed;
    ReceiverSpec receiver;
    std::vector<EmitterSpec> emitters;
};

/// Emitter count: uniform on [0, tail_start], then weights decaying linearly
/// to zero at max_emitters + 1.
std::uint32_t sample_emitter_count(std::uint32_t max_emitters, std::uint32_t tail_start, Rng& rng);

Scenario sample_scenario(const ScenarioConfig& config, const std::vector<TransmitterType>& catalogue,
                         const Seed& seed);
Scenario sample_scenario(const ScenarioConfig& config, const Seed& seed);

/// Emits, propagates and receives every emitter of the scenario.
LabeledPulseTrain simulate(const Scenario& scenario, const ScenarioConfig& config,
                           unsigned threads = 1);

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

struct ManifestEntry {
    Split split = Split::train;
    std::uint32_t index = 0;
    std::uint64_t seed = 0;
    std::string file;  ///< relative to the dataset root
    std::uint32_t num_emitters = 0;
    std::uint64_t num_pulses = 0;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
    std::uint64_t master_seed = 0;
    ScenarioConfig config;
    std::vector<ManifestEntry> entries;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Seed of train `index` in `split`.
std::uint64_t train_seed(std::uint64_t master_seed, Split split, std::uint32_t index);

/// The config a split is generated with (the test split raises the emitter cap).
ScenarioConfig split_config(const ScenarioConfig& config, Split split);

/// Regenerates one train from its manifest seed.
LabeledPulseTrain generate_train(const ScenarioConfig& config, Split split, std::uint64_t seed,
                                 unsigned threads = 1);

/// Writes <out>/<split>/<split>_NNNNN.bin with .meta sidecars plus
/// <out>/manifest.txt. Trains are generated in parallel; the manifest is
/// written last.
Manifest generate_dataset(const ScenarioConfig& config, std::uint64_t master_seed,
                          const std::filesystem::path& out_dir, unsigned threads = 1);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.txt";

}  // namespace pdwsim
