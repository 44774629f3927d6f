#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pdwsim/random.hpp"
#include "pdwsim/types.hpp"

namespace pdwsim {

// ---------------------------------------------------------------------------
// Emission programs
// ---------------------------------------------------------------------------

struct ConstantPri {
    double pri_us = 0.0;
};

/// Levels are used in order and repeat: interval n is levels[n % size].
struct StaggeredPri {
    std::vector<double> levels_us;
};

/// Interval n is mean * (1 + u), u uniform in [-jitter_fraction, +jitter_fraction].
struct JitteredPri {
    double mean_pri_us = 0.0;
    double jitter_fraction = 0.0;
};

using PriPattern = std::variant<ConstantPri, StaggeredPri, JitteredPri>;

/// One channel is a static carrier; several channels make a frequency hopper
/// that advances one channel every `hop_every_n_pulses` pulses.
struct FrequencyProgram {
    std::vector<double> channels_mhz;
    std::uint32_t hop_every_n_pulses = 1;
};

/// Fixed width (one entry) or a cyclic sequence.
struct PulseWidthProgram {
    std::vector<double> widths_us;
};

struct OperatingMode {
    PriPattern pri;
    FrequencyProgram freq;
    PulseWidthProgram pw;

    bool hops() const noexcept { return freq.channels_mhz.size() > 1; }
};

enum class ModeKind : std::uint8_t { constant = 0, staggered = 1, jittered = 2, hopping = 3 };

inline constexpr std::uint8_t mode_bit(ModeKind kind) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(kind));
}

/// Rotating transmit antenna. The gain seen by the receiver follows a
/// raised-cosine main lobe of the given null-to-null half width, floored at
/// a constant sidelobe level.
struct AntennaScan {
    double period_s = 0.0;
    double beamwidth_deg = 0.0;
    double sidelobe_db = -30.0;
};

/// Gain in dB for a beam pointing `offset_deg` away from the receiver.
double scan_gain_db(const AntennaScan& scan, double offset_deg);

// ---------------------------------------------------------------------------
// Transmitter catalogue
// ---------------------------------------------------------------------------

inline constexpr std::size_t kCatalogueSize = 68;
inline constexpr double kMinPulseWidthUs = 0.007;
inline constexpr double kMaxPulseWidthUs = 368.522;
inline constexpr double kMinFrequencyMhz = 500.0;
inline constexpr double kMaxFrequencyMhz = 18000.0;

struct TransmitterType {
    std::uint32_t type_id = 0;
    double freq_min_mhz = 0.0;
    double freq_max_mhz = 0.0;
    double pw_min_us = 0.0;
    double pw_max_us = 0.0;
    double pri_min_us = 0.0;
    double pri_max_us = 0.0;
    double tx_power_dbm = 0.0;
    std::uint8_t allowed_modes = 0;  ///< bitmask of mode_bit(ModeKind)
    std::optional<AntennaScan> scan;

    bool allows(ModeKind kind) const noexcept { return (allowed_modes & mode_bit(kind)) != 0; }
};

/// Deterministic 68-entry catalogue. Parameter envelopes cover narrowband and
/// wideband, short- and long-pulse, scanning and non-scanning transmitters.
std::vector<TransmitterType> sample_catalogue(const Seed& seed);

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

struct EmitterSpec {
    EmitterId emitter_id = 0;
    TransmitterType type;
    Position position;
    OperatingMode mode;
    double start_us = 0.0;
    /// Beam direction relative to the receiver bearing at t = 0.
    double scan_phase_deg = 0.0;
};

/// Pre-propagation truth record for one transmitted pulse.
struct TxPulse {
    double tx_time_us = 0.0;
    double tx_freq_mhz = 0.0;
    double pw_us = 0.0;
    double tx_power_dbm = 0.0;
    /// Transmit antenna gain towards the receiver (0 for non-scanning types).
    double tx_gain_db = 0.0;
    EmitterId emitter_id = 0;
};

/// Throws ConfigError if the mode breaks its invariants (non-positive PRI,
/// fewer than two stagger levels, jitter outside [0, 0.5), empty programs).
void validate_mode(const OperatingMode& mode);

/// Interval following pulse `pulse_index`. Jittered patterns draw one uniform.
double next_interval(const PriPattern& pri, std::uint64_t pulse_index, Rng& rng);

/// Full transmit schedule over [start, duration).
std::vector<TxPulse> emit_pulses(const EmitterSpec& spec, double duration_us, Rng& rng);

}  // namespace pdwsim
