#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pdwsim/scenario.hpp"
#include "pdwsim/types.hpp"

namespace pdwsim {

// ---------------------------------------------------------------------------
// Train files
//
//   offset  size  field
//   0       4     magic "TSRD"
//   4       2     format version (u16 LE), currently 1
//   6       2     flags (u16 LE), bit 0 = labels present
//   8       8     record count (u64 LE)
//   16      ...   records: toa_us, freq_mhz, pw_us, aoa_deg, amp_db as f64 LE,
//                 then emitter_id as u32 LE when labels are present
// ---------------------------------------------------------------------------

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint16_t kFlagLabels = 0x1;
inline constexpr std::size_t kHeaderBytes = 16;
inline constexpr std::size_t kPdwBytes = 40;

inline constexpr std::size_t record_bytes(bool labels) { return kPdwBytes + (labels ? 4 : 0); }

/// Streaming writer. The record count is patched into the header on finish().
class TrainWriter {
public:
    TrainWriter(const std::filesystem::path& path, bool labels);
    ~TrainWriter();
    TrainWriter(const TrainWriter&) = delete;
    TrainWriter& operator=(const TrainWriter&) = delete;

    /// Throws ContractError if ToAs go backwards.
    void append(const Pdw& pdw, EmitterId label = 0);
    /// Flushes, writes the final header and returns the file size.
    std::uint64_t finish();

    std::uint64_t count() const noexcept { return count_; }

private:
    void flush_buffer();

    std::filesystem::path path_;
    std::ofstream out_;
    bool labels_;
    std::vector<unsigned char> buffer_;
    std::uint64_t count_ = 0;
    double last_toa_ = 0.0;
    bool finished_ = false;
};

/// Streaming reader over the records of one file.
class TrainReader {
public:
    explicit TrainReader(const std::filesystem::path& path);

    bool has_labels() const noexcept { return labels_; }
    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t remaining() const noexcept { return count_ - read_; }

    /// Decodes up to `max_records` records into the output vectors (cleared
    /// first). Returns the number decoded; 0 at end of file.
    std::size_t next_chunk(std::vector<Pdw>& pulses, std::vector<EmitterId>& labels,
                           std::size_t max_records = 65536);

private:
    std::string path_;
    std::ifstream in_;
    bool labels_ = false;
    std::uint64_t count_ = 0;
    std::uint64_t read_ = 0;
    double last_toa_ = 0.0;
    std::vector<unsigned char> buffer_;
};

/// Writes the train (labels included) and returns the byte count.
std::uint64_t write_train(const LabeledPulseTrain& train, const std::filesystem::path& path);
/// Unlabelled variant: PDW records only, flag bit 0 clear.
std::uint64_t write_pdws(std::span<const Pdw> pulses, const std::filesystem::path& path);
/// Reads a whole file. Unlabelled files yield an empty label vector. The
/// sidecar is not consulted; see read_metadata().
LabeledPulseTrain read_train(const std::filesystem::path& path);

/// Sidecar path for a train file: same stem, ".meta" extension.
std::filesystem::path metadata_path(const std::filesystem::path& train_path);
/// Plain-text `key = value` sidecar: seed, mode, collection_us,
/// num_emitters, and schedule for scan trains.
void write_metadata(const TrainMeta& meta, const std::filesystem::path& path);
TrainMeta read_metadata(const std::filesystem::path& path);

/// Human-inspection export: toa_us,freq_mhz,pw_us,aoa_deg,amp_db,emitter_id.
void write_csv(const LabeledPulseTrain& train, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Windowing
// ---------------------------------------------------------------------------

struct FixedCount {
    std::size_t n = 1;
};

/// Half-open bins [k * span, (k + 1) * span) measured from time zero.
struct FixedDuration {
    double span_us = 0.0;
};

using WindowPolicy = std::variant<FixedCount, FixedDuration>;

/// Throws std::invalid_argument for n == 0 or a non-positive span.
void validate_policy(const WindowPolicy& policy);

/// [begin, end) index ranges of the non-empty windows, in order. The ranges
/// partition [0, pulses.size()).
std::vector<std::pair<std::size_t, std::size_t>> window_bounds(std::span<const Pdw> pulses,
                                                               const WindowPolicy& policy);

struct TrainWindow {
    LabeledPulseTrain train;
    /// Ordinal among the emitted (non-empty) windows.
    std::size_t index = 0;
};

std::vector<TrainWindow> window(const LabeledPulseTrain& train, const WindowPolicy& policy);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

/// Single-pass mean/variance/min/max; partial summaries merge associatively.
class RunningStats {
public:
    void add(double x) noexcept;
    void merge(const RunningStats& other) noexcept;

    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    /// Population standard deviation.
    double stddev() const noexcept;
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double min_ = 0.0;
    double max_ = 0.0;
};

/// Fixed-range histogram with clamped end bins.
struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
    std::vector<std::uint64_t> counts;

    Histogram() = default;
    Histogram(double lo, double hi, std::size_t bins, bool log_scale = false);
    void add(double x);
    void merge(const Histogram& other);
    double bin_lower(std::size_t i) const;
};

inline constexpr std::size_t kNumFields = 5;
inline constexpr std::array<const char*, kNumFields> kFieldNames = {"toa_us", "freq_mhz", "pw_us",
                                                                     "aoa_deg", "amp_db"};

struct SplitStats {
    std::uint64_t trains = 0;
    std::uint64_t pulse_total = 0;
    RunningStats pulses_per_train;
    RunningStats emitters_per_train;   ///< emitters with at least one received pulse
    RunningStats scenario_emitters;    ///< emitters placed in the scenario
    std::array<RunningStats, kNumFields> fields;
    RunningStats dominant_share;       ///< per train, over non-empty trains
    RunningStats pulses_per_emitter;   ///< per emitter with >= 1 pulse
    std::vector<double> emitter_shares;
    std::array<Histogram, kNumFields> field_histograms;
    Histogram emitter_count_histogram;
    Histogram emitter_pulse_histogram;

    SplitStats();
    void merge(const SplitStats& other);
    double median_emitter_share() const;
    std::uint64_t total_pulses() const { return pulse_total; }
};

struct StatsReport {
    std::map<Split, SplitStats> splits;
    SplitStats overall;
};

/// Summary of one file in a single streaming pass.
SplitStats train_stats(const std::filesystem::path& path, std::uint32_t scenario_emitters);

/// Streams every train listed in the manifest at <root>/manifest.txt.
/// Missing or unreadable files are collected and reported together.
StatsReport compute_stats(const std::filesystem::path& root, unsigned threads = 1);

std::string format_stats(const StatsReport& report);
/// CSV histograms: one row per (split, quantity, bin).
void write_histograms_csv(const StatsReport& report, const std::filesystem::path& path);

}  // namespace pdwsim
