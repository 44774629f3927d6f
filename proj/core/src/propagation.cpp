#include "pdwsim/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pdwsim/angle.hpp"
#include "pdwsim/errors.hpp"

namespace pdwsim {

void NoiseModel::validate() const {
    for (double s : {sigma_toa_us, sigma_freq_mhz, sigma_pw_fraction, sigma_aoa_deg, sigma_amp_db}) {
        if (!std::isfinite(s) || s < 0.0) throw ConfigError("noise sigmas must be finite and >= 0");
    }
}

double path_loss_db(double distance_m, double freq_mhz) {
    if (!(distance_m > 0.0) || !std::isfinite(distance_m)) {
        throw std::invalid_argument("path_loss_db: distance must be positive");
    }
    if (!(freq_mhz > 0.0) || !std::isfinite(freq_mhz)) {
        throw std::invalid_argument("path_loss_db: frequency must be positive");
    }
    return 20.0 * std::log10(distance_m / 1000.0) + 20.0 * std::log10(freq_mhz) + 32.44;
}

double true_aoa(const Position& rx, const Position& emitter) {
    const double dx = emitter.x_m - rx.x_m;
    const double dy = emitter.y_m - rx.y_m;
    if (dx == 0.0 && dy == 0.0) {
        throw std::invalid_argument("true_aoa: emitter coincides with receiver");
    }
    return normalize_angle(std::atan2(dy, dx) * (180.0 / std::numbers::pi));
}

std::optional<double> rx_gain_db(double orientation_deg, double aoa_deg, double fov_deg,
                                 double mainlobe_gain_db) {
    if (fov_deg >= 360.0) return mainlobe_gain_db;
    if (angular_offset(aoa_deg, orientation_deg) <= fov_deg / 2.0) return mainlobe_gain_db;
    return std::nullopt;
}

std::optional<Pdw> received_pdw(const TxPulse& tx, const Position& emitter, const RxGeometry& rx,
                                const NoiseModel& noise, Rng& rng) {
    // Draw first so every pulse advances the stream by the same amount.
    const double n_toa = rng.normal();
    const double n_freq = rng.normal();
    const double n_pw = rng.normal();
    const double n_aoa = rng.normal();
    const double n_amp = rng.normal();

    const double aoa = true_aoa(rx.position, emitter);
    const auto gain = rx_gain_db(rx.orientation_deg, aoa, rx.fov_deg, rx.mainlobe_gain_db);
    if (!gain) return std::nullopt;

    const double d = std::max(distance_m(rx.position, emitter), kMinDistanceM);

    Pdw pdw;
    pdw.toa_us = tx.tx_time_us + d / kSpeedOfLightMPerUs + noise.sigma_toa_us * n_toa;
    pdw.freq_mhz = tx.tx_freq_mhz + noise.sigma_freq_mhz * n_freq;
    pdw.pw_us = tx.pw_us * (1.0 + noise.sigma_pw_fraction * n_pw);
    pdw.aoa_deg = normalize_angle(aoa + noise.sigma_aoa_deg * n_aoa);
    pdw.amp_db = tx.tx_power_dbm - path_loss_db(d, tx.tx_freq_mhz) + *gain + tx.tx_gain_db +
                 noise.sigma_amp_db * n_amp;
    return pdw;
}

}  // namespace pdwsim
