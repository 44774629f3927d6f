#include "pdwsim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "pdwsim/dataset_io.hpp"
#include "pdwsim/errors.hpp"
#include "pdwsim/parallel.hpp"
#include "pdwsim/text.hpp"

namespace pdwsim {

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "train";
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "validation") return Split::validation;
    if (text == "test") return Split::test;
    throw ConfigError("unknown split '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

struct ConfigKey {
    const char* name;
    std::function<std::string(const ScenarioConfig&)> get;
    std::function<void(ScenarioConfig&, std::string_view)> set;
};

template <typename T>
ConfigKey number_key(const char* name, T ScenarioConfig::*member) {
    return {name, [member](const ScenarioConfig& c) { return text::format(c.*member); },
            [member](ScenarioConfig& c, std::string_view v) { c.*member = text::parse<T>(v); }};
}

template <typename Outer, typename T>
ConfigKey nested_key(const char* name, Outer ScenarioConfig::*outer, T Outer::*inner) {
    return {name, [=](const ScenarioConfig& c) { return text::format(c.*outer.*inner); },
            [=](ScenarioConfig& c, std::string_view v) { c.*outer.*inner = text::parse<T>(v); }};
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"mode", [](const ScenarioConfig& c) { return std::string(to_string(c.mode)); },
         [](ScenarioConfig& c, std::string_view v) { c.mode = parse_receiver_mode(v); }},
        number_key("max_emitters", &ScenarioConfig::max_emitters),
        number_key("test_max_emitters", &ScenarioConfig::test_max_emitters),
        number_key("tail_start", &ScenarioConfig::tail_start),
        number_key("collection_us", &ScenarioConfig::collection_us),
        number_key("arena_radius_m", &ScenarioConfig::arena_radius_m),
        number_key("min_distance_m", &ScenarioConfig::min_distance_m),
        number_key("catalogue_seed", &ScenarioConfig::catalogue_seed),
        nested_key("noise.sigma_toa_us", &ScenarioConfig::noise, &NoiseModel::sigma_toa_us),
        nested_key("noise.sigma_freq_mhz", &ScenarioConfig::noise, &NoiseModel::sigma_freq_mhz),
        nested_key("noise.sigma_pw_fraction", &ScenarioConfig::noise, &NoiseModel::sigma_pw_fraction),
        nested_key("noise.sigma_aoa_deg", &ScenarioConfig::noise, &NoiseModel::sigma_aoa_deg),
        nested_key("noise.sigma_amp_db", &ScenarioConfig::noise, &NoiseModel::sigma_amp_db),
        nested_key("detection.threshold_db", &ScenarioConfig::detection, &DetectionCurve::threshold_db),
        nested_key("detection.slope_db", &ScenarioConfig::detection, &DetectionCurve::slope_db),
        nested_key("detection.always_detect", &ScenarioConfig::detection, &DetectionCurve::always_detect),
        number_key("noise_floor_db", &ScenarioConfig::noise_floor_db),
        number_key("rx_gain_db", &ScenarioConfig::rx_gain_db),
        number_key("rx_fov_deg", &ScenarioConfig::rx_fov_deg),
        nested_key("splits.train", &ScenarioConfig::splits, &SplitCounts::train),
        nested_key("splits.validation", &ScenarioConfig::splits, &SplitCounts::validation),
        nested_key("splits.test", &ScenarioConfig::splits, &SplitCounts::test),
    };
    return keys;
}

}  // namespace

void ScenarioConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    require(collection_us > 0.0 && std::isfinite(collection_us), "collection_us must be positive");
    require(min_distance_m >= kMinDistanceM && std::isfinite(min_distance_m),
            "min_distance_m must be at least 1 m");
    require(arena_radius_m > min_distance_m && std::isfinite(arena_radius_m),
            "arena_radius_m must exceed min_distance_m");
    require(std::isfinite(noise_floor_db), "noise_floor_db must be finite");
    require(std::isfinite(rx_gain_db), "rx_gain_db must be finite");
    require(rx_fov_deg > 0.0 && rx_fov_deg <= 360.0, "rx_fov_deg must lie in (0, 360]");
    noise.validate();
    detection.validate();
}

ScenarioConfig parse_config(std::string_view body, ScenarioConfig config) {
    const auto& keys = config_keys();
    for (const auto& [key, value, line] : text::parse_key_values(body)) {
        const std::string where = "line " + std::to_string(line) + ": ";
        auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return key == k.name; });
        if (it == keys.end()) throw ConfigError(where + "unknown config key '" + key + "'");
        try {
            it->set(config, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + "config key '" + key + "': " + e.what());
        }
    }
    config.validate();
    return config;
}

ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base) {
    try {
        return parse_config(text::read_file(path), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string to_config_text(const ScenarioConfig& config) {
    std::string out;
    for (const auto& key : config_keys()) {
        out += key.name;
        out += " = ";
        out += key.get(config);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario sampling
// ---------------------------------------------------------------------------

std::uint32_t sample_emitter_count(std::uint32_t max_emitters, std::uint32_t tail_start, Rng& rng) {
    if (max_emitters == 0) return 0;
    if (max_emitters <= tail_start) {
        return static_cast<std::uint32_t>(rng.uniform_index(max_emitters + 1ULL));
    }
    // Weight 1 on [0, tail_start]; (max + 1 - k) / (max + 1 - tail_start) above.
    const double tail_len = static_cast<double>(max_emitters + 1 - tail_start);
    auto weight = [&](std::uint32_t k) {
        return k <= tail_start ? 1.0 : static_cast<double>(max_emitters + 1 - k) / tail_len;
    };
    double total = 0.0;
    for (std::uint32_t k = 0; k <= max_emitters; ++k) total += weight(k);
    double u = rng.uniform() * total;
    for (std::uint32_t k = 0; k <= max_emitters; ++k) {
        u -= weight(k);
        if (u < 0.0) return k;
    }
    return max_emitters;
}

namespace {

PriPattern sample_pri(ModeKind kind, const TransmitterType& type, Rng& rng) {
    const double base = rng.log_uniform(type.pri_min_us, type.pri_max_us);
    switch (kind) {
        case ModeKind::staggered: {
            StaggeredPri p;
            const auto levels = rng.uniform_int(2, 5);
            for (std::int64_t i = 0; i < levels; ++i) p.levels_us.push_back(base * rng.uniform(0.7, 1.3));
            return p;
        }
        case ModeKind::jittered:
            return JitteredPri{base, rng.uniform(0.01, 0.3)};
        default:
            return ConstantPri{base};
    }
}

OperatingMode sample_mode(const TransmitterType& type, Rng& rng) {
    std::vector<ModeKind> kinds;
    for (auto k : {ModeKind::constant, ModeKind::staggered, ModeKind::jittered, ModeKind::hopping}) {
        if (type.allows(k)) kinds.push_back(k);
    }
    const ModeKind kind = kinds[rng.uniform_index(kinds.size())];

    OperatingMode mode;
    if (kind == ModeKind::hopping) {
        const auto base = static_cast<ModeKind>(rng.uniform_index(3));
        mode.pri = sample_pri(base, type, rng);
        const auto channels = rng.uniform_int(2, 16);
        for (std::int64_t i = 0; i < channels; ++i) {
            mode.freq.channels_mhz.push_back(rng.uniform(type.freq_min_mhz, type.freq_max_mhz));
        }
        mode.freq.hop_every_n_pulses = static_cast<std::uint32_t>(rng.uniform_int(1, 8));
    } else {
        mode.pri = sample_pri(kind, type, rng);
        mode.freq.channels_mhz.push_back(rng.uniform(type.freq_min_mhz, type.freq_max_mhz));
    }

    const std::int64_t widths = rng.uniform() < 0.7 ? 1 : rng.uniform_int(2, 4);
    for (std::int64_t i = 0; i < widths; ++i) {
        mode.pw.widths_us.push_back(rng.log_uniform(type.pw_min_us, type.pw_max_us));
    }
    return mode;
}

}  // namespace

Scenario sample_scenario(const ScenarioConfig& config, const std::vector<TransmitterType>& catalogue,
                         const Seed& seed) {
    config.validate();
    if (catalogue.empty()) throw ConfigError("transmitter catalogue is empty");

    Scenario scenario;
    scenario.seed = seed;

    Rng rng(derive_seed(seed, "scenario", 0));
    const std::uint32_t count = sample_emitter_count(config.max_emitters, config.tail_start, rng);

    auto& rx = scenario.receiver;
    rx.mode = config.mode;
    rx.orientation_deg = rng.uniform(-180.0, 180.0);
    rx.mainlobe_gain_db = config.rx_gain_db;
    rx.fov_deg = config.rx_fov_deg;
    rx.noise_floor_db = config.noise_floor_db;
    rx.collection_us = config.collection_us;
    rx.detection = config.detection;
    if (config.mode == ReceiverMode::scan) {
        Rng schedule_rng(derive_seed(seed, "schedule", 0));
        rx.schedule = sample_dwell_schedule(schedule_rng);
    }

    const double r_min2 = config.min_distance_m * config.min_distance_m;
    const double r_max2 = config.arena_radius_m * config.arena_radius_m;
    scenario.emitters.reserve(count);
    for (std::uint32_t id = 0; id < count; ++id) {
        Rng erng(derive_seed(seed, "emitter", id));
        EmitterSpec e;
        e.emitter_id = id;
        e.type = catalogue[erng.uniform_index(catalogue.size())];
        e.mode = sample_mode(e.type, erng);
        // Uniform over the annulus between the minimum distance and the arena edge.
        const double r = std::sqrt(erng.uniform(r_min2, r_max2));
        const double theta = erng.uniform(-std::numbers::pi, std::numbers::pi);
        e.position = {rx.position.x_m + r * std::cos(theta), rx.position.y_m + r * std::sin(theta)};
        e.start_us = erng.uniform(0.0, config.collection_us);
        e.scan_phase_deg = erng.uniform(-180.0, 180.0);
        scenario.emitters.push_back(std::move(e));
    }
    return scenario;
}

Scenario sample_scenario(const ScenarioConfig& config, const Seed& seed) {
    return sample_scenario(config, sample_catalogue(Seed(config.catalogue_seed)), seed);
}

LabeledPulseTrain simulate(const Scenario& scenario, const ScenarioConfig& config, unsigned threads) {
    std::vector<std::vector<TxPulse>> streams(scenario.emitters.size());
    parallel_for(streams.size(), threads, [&](std::size_t i) {
        const auto& spec = scenario.emitters[i];
        Rng rng(derive_seed(scenario.seed, "emit", spec.emitter_id));
        streams[i] = emit_pulses(spec, config.collection_us, rng);
    });
    LabeledPulseTrain train = receive(streams, scenario.emitters, scenario.receiver, config.noise,
                                      derive_seed(scenario.seed, "rx", 0), threads);
    train.meta.seed = scenario.seed.master();
    return train;
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

std::uint64_t train_seed(std::uint64_t master_seed, Split split, std::uint32_t index) {
    return derive_seed(Seed(master_seed), to_string(split), index).key();
}

ScenarioConfig split_config(const ScenarioConfig& config, Split split) {
    ScenarioConfig c = config;
    if (split == Split::test) c.max_emitters = config.test_max_emitters;
    return c;
}

LabeledPulseTrain generate_train(const ScenarioConfig& config, Split split, std::uint64_t seed,
                                 unsigned threads) {
    const ScenarioConfig c = split_config(config, split);
    return simulate(sample_scenario(c, Seed(seed)), c, threads);
}

Manifest generate_dataset(const ScenarioConfig& config, std::uint64_t master_seed,
                          const std::filesystem::path& out_dir, unsigned threads) {
    config.validate();
    Manifest manifest;
    manifest.master_seed = master_seed;
    manifest.config = config;

    for (Split split : {Split::train, Split::validation, Split::test}) {
        for (std::uint32_t i = 0; i < config.splits[split]; ++i) {
            ManifestEntry entry;
            entry.split = split;
            entry.index = i;
            entry.seed = train_seed(master_seed, split, i);
            char name[64];
            std::snprintf(name, sizeof name, "%s/%s_%05u.bin", std::string(to_string(split)).c_str(),
                          std::string(to_string(split)).c_str(), i);
            entry.file = name;
            manifest.entries.push_back(entry);
        }
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError(out_dir.string(), "cannot create directory: " + ec.message());
    for (Split split : {Split::train, Split::validation, Split::test}) {
        if (config.splits[split] == 0) continue;
        const auto dir = out_dir / std::string(to_string(split));
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
    }

    parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
        auto& entry = manifest.entries[i];
        const LabeledPulseTrain train = generate_train(config, entry.split, entry.seed);
        const auto path = out_dir / entry.file;
        write_train(train, path);
        write_metadata(train.meta, metadata_path(path));
        entry.num_emitters = train.meta.num_emitters;
        entry.num_pulses = train.size();
    });

    write_manifest(manifest, out_dir / kManifestName);
    return manifest;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "# pdwsim dataset manifest\n";
    out << "format = 1\n";
    out << "master_seed = " << manifest.master_seed << '\n';
    std::istringstream config_lines(to_config_text(manifest.config));
    for (std::string line; std::getline(config_lines, line);) out << "config." << line << '\n';
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        out << "train." << i << " = split=" << to_string(e.split) << " index=" << e.index
            << " seed=" << e.seed << " file=" << e.file << " emitters=" << e.num_emitters
            << " pulses=" << e.num_pulses << '\n';
    }
    text::write_file(path, out.str());
}

Manifest read_manifest(const std::filesystem::path& path) {
    Manifest manifest;
    std::string config_text;
    std::vector<std::pair<std::size_t, ManifestEntry>> entries;
    try {
        for (const auto& [key, value, line] : text::parse_key_values(text::read_file(path))) {
            if (key == "format") {
                if (value != "1") throw ConfigError("unsupported manifest format " + value);
            } else if (key == "master_seed") {
                manifest.master_seed = text::parse<std::uint64_t>(value);
            } else if (key.starts_with("config.")) {
                config_text += key.substr(7) + " = " + value + '\n';
            } else if (key.starts_with("train.")) {
                ManifestEntry e;
                std::istringstream fields(value);
                for (std::string field; fields >> field;) {
                    const auto eq = field.find('=');
                    if (eq == std::string::npos) throw ConfigError("malformed manifest field '" + field + "'");
                    const std::string name = field.substr(0, eq);
                    const std::string v = field.substr(eq + 1);
                    if (name == "split") e.split = parse_split(v);
                    else if (name == "index") e.index = text::parse<std::uint32_t>(v);
                    else if (name == "seed") e.seed = text::parse<std::uint64_t>(v);
                    else if (name == "file") e.file = v;
                    else if (name == "emitters") e.num_emitters = text::parse<std::uint32_t>(v);
                    else if (name == "pulses") e.num_pulses = text::parse<std::uint64_t>(v);
                    else throw ConfigError("unknown manifest field '" + name + "'");
                }
                entries.emplace_back(text::parse<std::size_t>(key.substr(6)), e);
            } else {
                throw ConfigError("line " + std::to_string(line) + ": unknown manifest key '" + key + "'");
            }
        }
        manifest.config = parse_config(config_text);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [i, e] : entries) manifest.entries.push_back(std::move(e));
    return manifest;
}

}  // namespace pdwsim
