#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdwsim/dataset_io.hpp"
#include "pdwsim/types.hpp"

namespace pdwsim {

/// Joint counts of true class x predicted cluster. Label values are mapped to
/// dense indices in order of first appearance.
struct Contingency {
    struct Cell {
        std::size_t cls = 0;
        std::size_t cluster = 0;
        std::uint64_t count = 0;
    };

    std::vector<std::uint32_t> class_labels;
    std::vector<std::uint32_t> cluster_labels;
    std::vector<std::uint64_t> class_totals;    ///< a_i
    std::vector<std::uint64_t> cluster_totals;  ///< b_k
    std::vector<Cell> cells;                    ///< non-zero cells, sorted by (cls, cluster)
    std::uint64_t total = 0;
};

/// Throws std::invalid_argument when the lengths differ.
Contingency contingency(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred);

struct VScore {
    double homogeneity = 1.0;
    double completeness = 1.0;
    double v = 1.0;
};

/// Homogeneity, completeness and their harmonic mean from natural-log
/// entropies of the contingency table:
///   h = 1 - H(C|K) / H(C), with h = 1 when H(C) = 0
///   c = 1 - H(K|C) / H(K), with c = 1 when H(K) = 0
///   v = 2hc / (h + c),     with v = 0 when h + c = 0
VScore v_measure(const Contingency& table);
/// Throws std::invalid_argument on empty or mismatched inputs.
VScore v_measure(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred);

// ---------------------------------------------------------------------------
// Dataset scoring
// ---------------------------------------------------------------------------

enum class Aggregation { pooled, per_train_median };

struct WindowScore {
    std::string file;
    std::size_t window = 0;
    std::size_t pulses = 0;
    VScore score;
};

struct MetricReport {
    std::vector<WindowScore> windows;
    /// Absent when no non-empty window was scored.
    std::optional<double> median_v;
    Aggregation aggregation = Aggregation::pooled;
};

/// Median with the even-count convention (mean of the middle two).
/// Empty input yields nullopt.
std::optional<double> median(std::vector<double> values);

/// Scores matching files: `truth[i]` against `pred[i]`. Files are windowed with
/// the same policy and must hold the same number of records.
MetricReport score_files(std::span<const std::filesystem::path> truth,
                         std::span<const std::filesystem::path> pred, const WindowPolicy& policy,
                         Aggregation aggregation = Aggregation::pooled, unsigned threads = 1);

/// Every *.bin below `root`, sorted by relative path.
std::vector<std::filesystem::path> list_train_files(const std::filesystem::path& root);

/// Pairs the train files of two directory trees by relative path and scores
/// them. Throws MismatchError if the trees do not contain the same files.
MetricReport score_dataset(const std::filesystem::path& truth_root,
                           const std::filesystem::path& pred_root, const WindowPolicy& policy,
                           Aggregation aggregation = Aggregation::pooled, unsigned threads = 1);

/// Plain-text summary.
std::string format_report(const MetricReport& report);
/// Machine-readable `key = value` summary (median_v, num_windows, aggregation,
/// windows_csv) and the per-window CSV it points at.
void write_report(const MetricReport& report, const std::filesystem::path& summary_path,
                  const std::filesystem::path& windows_csv_path);

// ---------------------------------------------------------------------------
// Baseline
// ---------------------------------------------------------------------------

/// Cell sizes of the grid baseline.
inline constexpr double kBaselineFreqCellMhz = 50.0;
inline constexpr double kBaselineAoaCellDeg = 5.0;
inline constexpr double kBaselineLogPwCell = 0.2;

/// Grid clustering on (frequency, AoA, log10 pulse width): one cluster per
/// occupied cell, numbered in order of first occupancy.
std::vector<std::uint32_t> baseline_deinterleave(std::span<const Pdw> pulses);

}  // namespace pdwsim
