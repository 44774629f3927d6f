#include "pdwsim/emitters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pdwsim/angle.hpp"
#include "pdwsim/errors.hpp"

namespace pdwsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

double scan_gain_db(const AntennaScan& scan, double offset_deg) {
    const double off = angular_offset(offset_deg, 0.0);
    if (off >= scan.beamwidth_deg) return scan.sidelobe_db;
    const double lobe = 0.5 * (1.0 + std::cos(std::numbers::pi * off / scan.beamwidth_deg));
    return std::max(10.0 * std::log10(lobe), scan.sidelobe_db);
}

void validate_mode(const OperatingMode& mode) {
    std::visit(overloaded{
                   [](const ConstantPri& p) {
                       require(positive_finite(p.pri_us), "constant PRI must be positive");
                   },
                   [](const StaggeredPri& p) {
                       require(p.levels_us.size() >= 2, "staggered PRI needs at least two levels");
                       for (double level : p.levels_us) {
                           require(positive_finite(level), "staggered PRI levels must be positive");
                       }
                   },
                   [](const JitteredPri& p) {
                       require(positive_finite(p.mean_pri_us), "jittered PRI mean must be positive");
                       require(p.jitter_fraction >= 0.0 && p.jitter_fraction < 0.5,
                               "jitter fraction must lie in [0, 0.5)");
                   },
               },
               mode.pri);
    require(!mode.freq.channels_mhz.empty(), "frequency program has no channels");
    require(mode.freq.hop_every_n_pulses >= 1, "hop_every_n_pulses must be at least 1");
    for (double f : mode.freq.channels_mhz) {
        require(positive_finite(f), "channel frequencies must be positive");
    }
    require(!mode.pw.widths_us.empty(), "pulse-width program is empty");
    for (double w : mode.pw.widths_us) {
        require(positive_finite(w), "pulse widths must be positive");
    }
}

double next_interval(const PriPattern& pri, std::uint64_t pulse_index, Rng& rng) {
    return std::visit(overloaded{
                          [](const ConstantPri& p) { return p.pri_us; },
                          [pulse_index](const StaggeredPri& p) {
                              return p.levels_us[pulse_index % p.levels_us.size()];
                          },
                          [&rng](const JitteredPri& p) {
                              const double u = rng.uniform(-p.jitter_fraction, p.jitter_fraction);
                              return p.mean_pri_us * (1.0 + u);
                          },
                      },
                      pri);
}

std::vector<TxPulse> emit_pulses(const EmitterSpec& spec, double duration_us, Rng& rng) {
    require(positive_finite(duration_us), "collection duration must be positive");
    require(std::isfinite(spec.start_us) && spec.start_us >= 0.0, "emitter start time must be >= 0");
    validate_mode(spec.mode);

    const auto& type = spec.type;
    if (type.freq_max_mhz > 0.0) {
        for (double f : spec.mode.freq.channels_mhz) {
            require(f >= type.freq_min_mhz && f <= type.freq_max_mhz,
                    "channel " + std::to_string(f) + " MHz outside transmitter band of type " +
                        std::to_string(type.type_id));
        }
    }

    const auto& channels = spec.mode.freq.channels_mhz;
    const auto& widths = spec.mode.pw.widths_us;
    const std::uint64_t hop_every = spec.mode.freq.hop_every_n_pulses;

    std::vector<TxPulse> out;
    if (const auto* constant = std::get_if<ConstantPri>(&spec.mode.pri)) {
        const double span = duration_us - spec.start_us;
        if (span > 0.0) out.reserve(static_cast<std::size_t>(span / constant->pri_us) + 1);
    }

    double t = spec.start_us;
    for (std::uint64_t n = 0; t < duration_us; ++n) {
        TxPulse p;
        p.tx_time_us = t;
        p.tx_freq_mhz = channels[(n / hop_every) % channels.size()];
        p.pw_us = widths[n % widths.size()];
        p.tx_power_dbm = type.tx_power_dbm;
        if (type.scan) {
            const double beam = spec.scan_phase_deg + 360.0 * (t * 1e-6) / type.scan->period_s;
            p.tx_gain_db = scan_gain_db(*type.scan, beam);
        }
        p.emitter_id = spec.emitter_id;
        out.push_back(p);
        t += next_interval(spec.mode.pri, n, rng);
    }
    return out;
}

std::vector<TransmitterType> sample_catalogue(const Seed& seed) {
    std::vector<TransmitterType> catalogue;
    catalogue.reserve(kCatalogueSize);

    for (std::uint32_t id = 0; id < kCatalogueSize; ++id) {
        Rng rng(derive_seed(seed, "transmitter", id));
        TransmitterType t;
        t.type_id = id;

        const double centre = rng.log_uniform(600.0, 16000.0);
        const bool wideband = rng.uniform() < 0.4;
        const double width = wideband ? rng.log_uniform(200.0, 3000.0) : rng.log_uniform(2.0, 50.0);
        t.freq_min_mhz = std::max(kMinFrequencyMhz, centre - width / 2);
        t.freq_max_mhz = std::min(kMaxFrequencyMhz, centre + width / 2);

        const bool long_pulse = rng.uniform() < 0.5;
        t.pw_min_us = long_pulse ? rng.log_uniform(2.0, 100.0) : rng.log_uniform(kMinPulseWidthUs, 2.0);
        t.pw_max_us = std::min(kMaxPulseWidthUs, t.pw_min_us * rng.log_uniform(1.0, 10.0));

        // Duty cycle stays at or below 10%.
        t.pri_min_us = std::max(rng.log_uniform(50.0, 5000.0), 10.0 * t.pw_max_us);
        t.pri_max_us = std::min(20000.0, t.pri_min_us * rng.log_uniform(1.2, 8.0));
        t.pri_max_us = std::max(t.pri_max_us, t.pri_min_us * 1.2);

        t.tx_power_dbm = rng.uniform(30.0, 70.0);

        t.allowed_modes = mode_bit(ModeKind::constant);
        if (rng.uniform() < 0.5) t.allowed_modes |= mode_bit(ModeKind::staggered);
        if (rng.uniform() < 0.5) t.allowed_modes |= mode_bit(ModeKind::jittered);
        const bool can_hop = t.freq_max_mhz - t.freq_min_mhz >= 20.0;
        if (can_hop && rng.uniform() < 0.5) t.allowed_modes |= mode_bit(ModeKind::hopping);
        // Some types never run the plain constant program.
        if (t.allowed_modes != mode_bit(ModeKind::constant) && rng.uniform() < 0.3) {
            t.allowed_modes &= static_cast<std::uint8_t>(~mode_bit(ModeKind::constant));
        }

        if (rng.uniform() < 0.5) {
            AntennaScan scan;
            scan.period_s = rng.uniform(1.0, 12.0);
            scan.beamwidth_deg = rng.log_uniform(1.5, 10.0);
            scan.sidelobe_db = rng.uniform(-35.0, -20.0);
            t.scan = scan;
        }
        catalogue.push_back(t);
    }
    return catalogue;
}

}  // namespace pdwsim
