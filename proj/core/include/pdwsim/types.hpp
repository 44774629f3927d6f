#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pdwsim {

// Repo-wide units: time and pulse width in microseconds, frequency in MHz,
// angles in degrees, amplitude and gains in dB.

using EmitterId = std::uint32_t;

/// One received pulse descriptor word.
struct Pdw {
    double toa_us = 0.0;
    double freq_mhz = 0.0;
    double pw_us = 0.0;
    double aoa_deg = 0.0;
    double amp_db = 0.0;

    friend bool operator==(const Pdw&, const Pdw&) = default;
};

enum class ReceiverMode { stare, scan };

std::string_view to_string(ReceiverMode mode);
ReceiverMode parse_receiver_mode(std::string_view text);

struct TrainMeta {
    std::uint64_t seed = 0;
    ReceiverMode mode = ReceiverMode::stare;
    double collection_us = 0.0;
    std::uint32_t num_emitters = 0;
    /// Serialized dwell schedule; empty for stare trains.
    std::string schedule;

    friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

/// Time-ordered PDW sequence with ground-truth emitter labels.
struct LabeledPulseTrain {
    std::vector<Pdw> pulses;
    std::vector<EmitterId> labels;
    TrainMeta meta;

    std::size_t size() const noexcept { return pulses.size(); }
    bool empty() const noexcept { return pulses.empty(); }

    /// Throws ContractError unless labels match pulses in length and ToAs are
    /// non-decreasing.
    void validate() const;

    friend bool operator==(const LabeledPulseTrain&, const LabeledPulseTrain&) = default;
};

struct Position {
    double x_m = 0.0;
    double y_m = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance_m(const Position& a, const Position& b);

}  // namespace pdwsim
