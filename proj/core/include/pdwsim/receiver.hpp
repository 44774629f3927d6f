#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdwsim/emitters.hpp"
#include "pdwsim/propagation.hpp"
#include "pdwsim/random.hpp"
#include "pdwsim/types.hpp"

namespace pdwsim {

inline constexpr double kBandwidthMhz = 500.0;
inline constexpr double kFirstCentreMhz = 500.0;
inline constexpr double kLastCentreMhz = 18000.0;
inline constexpr std::size_t kNumBands = 36;

struct Dwell {
    double centre_mhz = 0.0;
    double dwell_us = 0.0;

    friend bool operator==(const Dwell&, const Dwell&) = default;
};

/// Cyclic scan plan. Centres are multiples of 500 MHz in [500, 18000] and the
/// plan repeats unchanged for the whole collection.
class DwellSchedule {
public:
    /// Throws ConfigError on an empty plan, an invalid centre or a
    /// non-positive dwell.
    explicit DwellSchedule(std::vector<Dwell> entries);

    const std::vector<Dwell>& entries() const noexcept { return entries_; }
    double cycle_us() const noexcept { return ends_.back(); }

    /// Centre the receiver is tuned to at `toa_us`. A time exactly on a dwell
    /// boundary belongs to the dwell that starts there.
    double centre_at(double toa_us) const;

    /// "centre:dwell,centre:dwell,..." with round-trip precision.
    std::string serialize() const;
    static DwellSchedule parse(std::string_view text);

    friend bool operator==(const DwellSchedule& a, const DwellSchedule& b) {
        return a.entries_ == b.entries_;
    }

private:
    std::vector<Dwell> entries_;
    std::vector<double> ends_;
};

inline double dwell_at(const DwellSchedule& schedule, double toa_us) {
    return schedule.centre_at(toa_us);
}

/// Random permutation of all 36 centres with dwells log-uniform in [5, 100] ms.
DwellSchedule sample_dwell_schedule(Rng& rng);

/// Band membership with a half-open lower edge: (centre - 250, centre + 250].
/// Every frequency therefore belongs to exactly one 500 MHz band.
bool in_band(double freq_mhz, double centre_mhz);

struct DetectionCurve {
    double threshold_db = 3.0;
    double slope_db = 2.0;
    /// Bypass the curve and keep every pulse that reaches this stage.
    bool always_detect = false;

    void validate() const;

    friend bool operator==(const DetectionCurve&, const DetectionCurve&) = default;
};

/// Logistic detection law in SNR. Throws ConfigError when slope <= 0.
double detection_probability(double snr_db, const DetectionCurve& curve);

struct ReceiverSpec {
    ReceiverMode mode = ReceiverMode::stare;
    std::optional<DwellSchedule> schedule;  ///< required in scan mode
    Position position;
    double orientation_deg = 0.0;
    double mainlobe_gain_db = 10.0;
    double fov_deg = 360.0;
    double noise_floor_db = -100.0;
    double collection_us = 10'000'000.0;
    DetectionCurve detection;

    RxGeometry geometry() const {
        return {position, orientation_deg, fov_deg, mainlobe_gain_db};
    }
    void validate() const;
};

/// A received pulse before merging, tagged with its tie-break key.
struct TaggedPulse {
    Pdw pdw;
    EmitterId emitter_id = 0;
    std::uint64_t seq = 0;
};

/// Strict ordering used everywhere trains are assembled: ToA, then emitter,
/// then per-emitter sequence number.
inline bool merge_order(const TaggedPulse& a, const TaggedPulse& b) noexcept {
    if (a.pdw.toa_us != b.pdw.toa_us) return a.pdw.toa_us < b.pdw.toa_us;
    if (a.emitter_id != b.emitter_id) return a.emitter_id < b.emitter_id;
    return a.seq < b.seq;
}

/// k-way merge of streams that are each sorted under merge_order. Throws
/// ContractError naming the stream and position of the first violation.
LabeledPulseTrain merge_streams(std::span<const std::vector<TaggedPulse>> streams);

/// Generator draws consumed per transmitted pulse by receive(): the noise
/// draws plus one detection uniform.
inline constexpr std::uint64_t kDrawsPerPulse = kNoiseDrawsPerPulse + 1;

/// Runs the receive chain for one emitter: propagate, antenna, band filter,
/// detection. Pulse j always uses draws [j * kDrawsPerPulse, (j+1) * kDrawsPerPulse)
/// of the emitter's substream, so outcomes do not depend on what happens to
/// other pulses.
std::vector<TaggedPulse> receive_emitter(std::span<const TxPulse> pulses, const EmitterSpec& spec,
                                         const ReceiverSpec& rx, const NoiseModel& noise,
                                         const Seed& seed);

/// Full receive chain for a scenario; `streams[i]` belongs to `specs[i]`.
LabeledPulseTrain receive(std::span<const std::vector<TxPulse>> streams,
                          std::span<const EmitterSpec> specs, const ReceiverSpec& rx,
                          const NoiseModel& noise, const Seed& seed, unsigned threads = 1);

}  // namespace pdwsim
