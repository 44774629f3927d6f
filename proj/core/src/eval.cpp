#include "pdwsim/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "pdwsim/errors.hpp"
#include "pdwsim/parallel.hpp"
#include "pdwsim/text.hpp"

namespace pdwsim {

Contingency contingency(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred) {
    if (truth.size() != pred.size()) {
        throw std::invalid_argument("contingency: " + std::to_string(truth.size()) + " true labels vs " +
                                    std::to_string(pred.size()) + " predicted labels");
    }
    Contingency t;
    std::unordered_map<std::uint32_t, std::size_t> cls_index, cluster_index;
    std::unordered_map<std::uint64_t, std::uint64_t> joint;

    auto dense = [](std::unordered_map<std::uint32_t, std::size_t>& index, std::vector<std::uint32_t>& labels,
                    std::vector<std::uint64_t>& totals, std::uint32_t label) {
        auto [it, inserted] = index.try_emplace(label, labels.size());
        if (inserted) {
            labels.push_back(label);
            totals.push_back(0);
        }
        ++totals[it->second];
        return it->second;
    };

    for (std::size_t n = 0; n < truth.size(); ++n) {
        const std::size_t i = dense(cls_index, t.class_labels, t.class_totals, truth[n]);
        const std::size_t k = dense(cluster_index, t.cluster_labels, t.cluster_totals, pred[n]);
        ++joint[(static_cast<std::uint64_t>(i) << 32) | k];
    }
    t.total = truth.size();
    t.cells.reserve(joint.size());
    for (const auto& [key, count] : joint) {
        t.cells.push_back({static_cast<std::size_t>(key >> 32), static_cast<std::size_t>(key & 0xFFFFFFFFu), count});
    }
    std::sort(t.cells.begin(), t.cells.end(), [](const auto& a, const auto& b) {
        return a.cls != b.cls ? a.cls < b.cls : a.cluster < b.cluster;
    });
    return t;
}

namespace {

double entropy(const std::vector<std::uint64_t>& totals, double n) {
    double h = 0.0;
    for (std::uint64_t a : totals) {
        if (a == 0) continue;
        const double p = static_cast<double>(a) / n;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

VScore v_measure(const Contingency& t) {
    if (t.total == 0) throw std::invalid_argument("v_measure: empty input");
    const double n = static_cast<double>(t.total);

    const double h_c = entropy(t.class_totals, n);
    const double h_k = entropy(t.cluster_totals, n);
    double h_c_given_k = 0.0;
    double h_k_given_c = 0.0;
    for (const auto& cell : t.cells) {
        const double joint = static_cast<double>(cell.count);
        const double w = joint / n;
        h_c_given_k -= w * std::log(joint / static_cast<double>(t.cluster_totals[cell.cluster]));
        h_k_given_c -= w * std::log(joint / static_cast<double>(t.class_totals[cell.cls]));
    }

    VScore s;
    s.homogeneity = h_c == 0.0 ? 1.0 : std::clamp(1.0 - h_c_given_k / h_c, 0.0, 1.0);
    s.completeness = h_k == 0.0 ? 1.0 : std::clamp(1.0 - h_k_given_c / h_k, 0.0, 1.0);
    const double sum = s.homogeneity + s.completeness;
    s.v = sum == 0.0 ? 0.0 : 2.0 * s.homogeneity * s.completeness / sum;
    return s;
}

VScore v_measure(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred) {
    if (truth.empty()) throw std::invalid_argument("v_measure: empty input");
    return v_measure(contingency(truth, pred));
}

std::optional<double> median(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

namespace {

std::vector<WindowScore> score_pair(const std::filesystem::path& truth_path,
                                    const std::filesystem::path& pred_path, const WindowPolicy& policy) {
    const LabeledPulseTrain truth = read_train(truth_path);
    const LabeledPulseTrain pred = read_train(pred_path);
    if (truth.labels.size() != truth.pulses.size()) {
        throw MismatchError(truth_path.string() + ": truth file carries no labels");
    }
    if (pred.labels.size() != pred.pulses.size()) {
        throw MismatchError(pred_path.string() + ": prediction file carries no labels");
    }
    if (truth.size() != pred.size()) {
        throw MismatchError("record count mismatch: " + truth_path.string() + " has " +
                            std::to_string(truth.size()) + ", " + pred_path.string() + " has " +
                            std::to_string(pred.size()));
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth.pulses[i].toa_us != pred.pulses[i].toa_us) {
            throw MismatchError("toa mismatch at record " + std::to_string(i) + ": " + truth_path.string() +
                                " has " + text::format(truth.pulses[i].toa_us) + ", " + pred_path.string() +
                                " has " + text::format(pred.pulses[i].toa_us));
        }
    }

    std::vector<WindowScore> out;
    const std::span<const std::uint32_t> t(truth.labels), p(pred.labels);
    for (const auto& [b, e] : window_bounds(truth.pulses, policy)) {
        WindowScore w;
        w.file = truth_path.string();
        w.window = out.size();
        w.pulses = e - b;
        w.score = v_measure(t.subspan(b, e - b), p.subspan(b, e - b));
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace

MetricReport score_files(std::span<const std::filesystem::path> truth,
                         std::span<const std::filesystem::path> pred, const WindowPolicy& policy,
                         Aggregation aggregation, unsigned threads) {
    if (truth.size() != pred.size()) {
        throw MismatchError(std::to_string(truth.size()) + " truth files vs " + std::to_string(pred.size()) +
                            " prediction files");
    }
    validate_policy(policy);

    std::vector<std::vector<WindowScore>> per_file(truth.size());
    parallel_for(truth.size(), threads, [&](std::size_t i) { per_file[i] = score_pair(truth[i], pred[i], policy); });

    MetricReport report;
    report.aggregation = aggregation;
    std::vector<double> pooled, train_medians;
    for (auto& file : per_file) {
        std::vector<double> vs;
        for (auto& w : file) {
            vs.push_back(w.score.v);
            report.windows.push_back(std::move(w));
        }
        pooled.insert(pooled.end(), vs.begin(), vs.end());
        if (auto m = median(std::move(vs))) train_medians.push_back(*m);
    }
    report.median_v = aggregation == Aggregation::pooled ? median(std::move(pooled)) : median(std::move(train_medians));
    return report;
}

std::vector<std::filesystem::path> list_train_files(const std::filesystem::path& root) {
    std::error_code ec;
    if (!std::filesystem::is_directory(root, ec)) throw IoError(root.string(), "not a directory");
    std::vector<std::filesystem::path> files;
    for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
         !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
        if (it->is_regular_file() && it->path().extension() == ".bin") {
            files.push_back(std::filesystem::relative(it->path(), root));
        }
    }
    if (ec) throw IoError(root.string(), "cannot list directory: " + ec.message());
    std::sort(files.begin(), files.end());
    return files;
}

MetricReport score_dataset(const std::filesystem::path& truth_root, const std::filesystem::path& pred_root,
                           const WindowPolicy& policy, Aggregation aggregation, unsigned threads) {
    const auto truth_rel = list_train_files(truth_root);
    const auto pred_rel = list_train_files(pred_root);
    if (truth_rel != pred_rel) {
        std::vector<std::filesystem::path> only_truth, only_pred;
        std::set_difference(truth_rel.begin(), truth_rel.end(), pred_rel.begin(), pred_rel.end(),
                            std::back_inserter(only_truth));
        std::set_difference(pred_rel.begin(), pred_rel.end(), truth_rel.begin(), truth_rel.end(),
                            std::back_inserter(only_pred));
        std::string msg = "truth and prediction trees differ:";
        for (const auto& f : only_truth) msg += "\n  missing prediction for " + f.string();
        for (const auto& f : only_pred) msg += "\n  prediction without truth: " + f.string();
        throw MismatchError(msg);
    }
    std::vector<std::filesystem::path> truth, pred;
    for (const auto& rel : truth_rel) {
        truth.push_back(truth_root / rel);
        pred.push_back(pred_root / rel);
    }
    return score_files(truth, pred, policy, aggregation, threads);
}

namespace {

// Always shows a decimal point so scores read as reals ("1.0", not "1").
std::string format_score(double v) {
    std::string s = text::format(v);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

std::string format_report(const MetricReport& report) {
    std::ostringstream out;
    out << "num_windows = " << report.windows.size() << '\n';
    out << "aggregation = " << (report.aggregation == Aggregation::pooled ? "pooled" : "per_train_median") << '\n';
    if (report.median_v) {
        out << "median_v = " << format_score(*report.median_v) << '\n';
    } else {
        out << "median_v = none (no non-empty windows)\n";
    }
    return out.str();
}

void write_report(const MetricReport& report, const std::filesystem::path& summary_path,
                  const std::filesystem::path& windows_csv_path) {
    std::ostringstream csv;
    csv << "file,window,pulses,homogeneity,completeness,v\n";
    for (const auto& w : report.windows) {
        csv << w.file << ',' << w.window << ',' << w.pulses << ',' << text::format(w.score.homogeneity) << ','
            << text::format(w.score.completeness) << ',' << text::format(w.score.v) << '\n';
    }
    text::write_file(windows_csv_path, csv.str());

    std::ostringstream kv;
    kv << "median_v = " << (report.median_v ? format_score(*report.median_v) : std::string("none")) << '\n';
    kv << "num_windows = " << report.windows.size() << '\n';
    kv << "aggregation = " << (report.aggregation == Aggregation::pooled ? "pooled" : "per_train_median") << '\n';
    kv << "windows_csv = " << windows_csv_path.string() << '\n';
    text::write_file(summary_path, kv.str());
}

std::vector<std::uint32_t> baseline_deinterleave(std::span<const Pdw> pulses) {
    struct CellKey {
        std::int64_t f, a, w;
        bool operator==(const CellKey&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const CellKey& k) const noexcept {
            std::uint64_t h = static_cast<std::uint64_t>(k.f) * 0x9E3779B97F4A7C15ULL;
            h ^= static_cast<std::uint64_t>(k.a) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
            h ^= static_cast<std::uint64_t>(k.w) + 0x85EBCA77C2B2AE63ULL + (h << 6) + (h >> 2);
            return static_cast<std::size_t>(h);
        }
    };

    std::unordered_map<CellKey, std::uint32_t, CellHash> cells;
    std::vector<std::uint32_t> labels;
    labels.reserve(pulses.size());
    for (const auto& p : pulses) {
        const CellKey key{static_cast<std::int64_t>(std::floor(p.freq_mhz / kBaselineFreqCellMhz)),
                          static_cast<std::int64_t>(std::floor(p.aoa_deg / kBaselineAoaCellDeg)),
                          static_cast<std::int64_t>(std::floor(std::log10(p.pw_us) / kBaselineLogPwCell))};
        auto [it, inserted] = cells.try_emplace(key, static_cast<std::uint32_t>(cells.size()));
        labels.push_back(it->second);
    }
    return labels;
}

}  // namespace pdwsim
