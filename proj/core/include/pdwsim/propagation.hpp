#pragma once

#include <optional>

#include "pdwsim/emitters.hpp"
#include "pdwsim/random.hpp"
#include "pdwsim/types.hpp"

namespace pdwsim {

/// Speed of light in metres per microsecond.
inline constexpr double kSpeedOfLightMPerUs = 299.792458;
/// Emitter-receiver distances are clamped to this before computing path loss.
inline constexpr double kMinDistanceM = 1.0;

/// Zero-mean Gaussian measurement noise on each PDW field. All-zero is the
/// exact noise-free mode.
struct NoiseModel {
    double sigma_toa_us = 0.0;
    double sigma_freq_mhz = 0.0;
    double sigma_pw_fraction = 0.0;
    double sigma_aoa_deg = 0.0;
    double sigma_amp_db = 0.0;

    static NoiseModel none() { return {}; }
    /// Throws ConfigError on a negative or non-finite sigma.
    void validate() const;

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

/// Receiver geometry and antenna as seen by the propagation stage.
struct RxGeometry {
    Position position;
    double orientation_deg = 0.0;
    double fov_deg = 360.0;
    double mainlobe_gain_db = 10.0;
};

/// Free-space loss: 20 log10(d_km) + 20 log10(f_MHz) + 32.44.
/// Throws std::invalid_argument unless distance and frequency are positive.
double path_loss_db(double distance_m, double freq_mhz);

/// Bearing of the emitter from the receiver: 0 deg along +x, counterclockwise
/// positive, in [-180, 180]. Throws std::invalid_argument for coincident points.
double true_aoa(const Position& rx, const Position& emitter);

/// Receiver gain for a pulse arriving from `aoa_deg`, or nullopt when the
/// direction lies outside the field of view.
std::optional<double> rx_gain_db(double orientation_deg, double aoa_deg, double fov_deg,
                                 double mainlobe_gain_db);

/// Number of generator draws received_pdw consumes per pulse, whatever the
/// outcome. Callers rely on this to keep per-pulse streams aligned.
inline constexpr std::uint64_t kNoiseDrawsPerPulse = 10;

/// Propagates one transmitted pulse to the receiver. Returns nullopt when the
/// receive antenna blocks it.
std::optional<Pdw> received_pdw(const TxPulse& tx, const Position& emitter, const RxGeometry& rx,
                                const NoiseModel& noise, Rng& rng);

}  // namespace pdwsim
