#include "pdwsim/receiver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "pdwsim/errors.hpp"
#include "pdwsim/parallel.hpp"

namespace pdwsim {

namespace {

bool valid_centre(double centre) {
    if (!(centre >= kFirstCentreMhz && centre <= kLastCentreMhz)) return false;
    return std::fmod(centre, kBandwidthMhz) == 0.0;
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw ConfigError("malformed number '" + std::string(text) + "' in dwell schedule");
    }
    return v;
}

// Tournament tree of losers over k sorted streams. Leaf slots beyond k and
// exhausted streams behave as +infinity.
class LoserTree {
public:
    explicit LoserTree(std::span<const std::vector<TaggedPulse>> streams)
        : streams_(streams), pos_(streams.size(), 0) {
        leaves_ = 1;
        while (leaves_ < streams.size()) leaves_ *= 2;
        tree_.assign(leaves_, kNone);
        tree_[0] = build(1);
    }

    bool empty() const { return tree_[0] == kNone || exhausted(tree_[0]); }
    const TaggedPulse& top() const { return head(tree_[0]); }

    void pop() {
        std::size_t winner = tree_[0];
        ++pos_[winner];
        for (std::size_t node = (winner + leaves_) / 2; node > 0; node /= 2) {
            if (beats(tree_[node], winner)) std::swap(tree_[node], winner);
        }
        tree_[0] = winner;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    bool exhausted(std::size_t s) const {
        return s == kNone || pos_[s] >= streams_[s].size();
    }
    const TaggedPulse& head(std::size_t s) const { return streams_[s][pos_[s]]; }

    bool beats(std::size_t a, std::size_t b) const {
        if (exhausted(a)) return false;
        if (exhausted(b)) return true;
        return merge_order(head(a), head(b));
    }

    // Returns the winner of the subtree rooted at `node` and stores losers.
    std::size_t build(std::size_t node) {
        if (node >= leaves_) {
            const std::size_t s = node - leaves_;
            return s < streams_.size() ? s : kNone;
        }
        std::size_t left = build(2 * node);
        std::size_t right = build(2 * node + 1);
        if (beats(right, left)) std::swap(left, right);
        tree_[node] = right;
        return left;
    }

    std::span<const std::vector<TaggedPulse>> streams_;
    std::vector<std::size_t> pos_;
    std::vector<std::size_t> tree_;
    std::size_t leaves_ = 1;
};

}  // namespace

DwellSchedule::DwellSchedule(std::vector<Dwell> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ConfigError("dwell schedule is empty");
    ends_.reserve(entries_.size());
    double t = 0.0;
    for (const auto& d : entries_) {
        if (!valid_centre(d.centre_mhz)) {
            throw ConfigError("dwell centre " + format_double(d.centre_mhz) +
                              " MHz is not a multiple of 500 in [500, 18000]");
        }
        if (!(d.dwell_us > 0.0) || !std::isfinite(d.dwell_us)) {
            throw ConfigError("dwell times must be positive");
        }
        t += d.dwell_us;
        ends_.push_back(t);
    }
}

double DwellSchedule::centre_at(double toa_us) const {
    const double t = std::fmod(std::max(toa_us, 0.0), cycle_us());
    auto it = std::upper_bound(ends_.begin(), ends_.end(), t);
    if (it == ends_.end()) --it;  // rounding guard; fmod result is < cycle
    return entries_[static_cast<std::size_t>(it - ends_.begin())].centre_mhz;
}

std::string DwellSchedule::serialize() const {
    std::string out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) out += ',';
        out += format_double(entries_[i].centre_mhz);
        out += ':';
        out += format_double(entries_[i].dwell_us);
    }
    return out;
}

DwellSchedule DwellSchedule::parse(std::string_view text) {
    std::vector<Dwell> entries;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw ConfigError("dwell schedule entry '" + std::string(item) + "' lacks ':'");
        }
        entries.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return DwellSchedule(std::move(entries));
}

DwellSchedule sample_dwell_schedule(Rng& rng) {
    std::vector<Dwell> entries(kNumBands);
    for (std::size_t i = 0; i < kNumBands; ++i) {
        entries[i].centre_mhz = kFirstCentreMhz + kBandwidthMhz * static_cast<double>(i);
    }
    // Fisher-Yates on our own generator keeps the permutation portable.
    for (std::size_t i = kNumBands - 1; i > 0; --i) {
        std::swap(entries[i], entries[rng.uniform_index(i + 1)]);
    }
    for (auto& d : entries) d.dwell_us = rng.log_uniform(5'000.0, 100'000.0);
    return DwellSchedule(std::move(entries));
}

bool in_band(double freq_mhz, double centre_mhz) {
    const double half = kBandwidthMhz / 2.0;
    return freq_mhz > centre_mhz - half && freq_mhz <= centre_mhz + half;
}

void DetectionCurve::validate() const {
    if (!(slope_db > 0.0) || !std::isfinite(slope_db)) {
        throw ConfigError("detection slope must be positive");
    }
    if (!std::isfinite(threshold_db)) throw ConfigError("detection threshold must be finite");
}

double detection_probability(double snr_db, const DetectionCurve& curve) {
    curve.validate();
    const double z = (snr_db - curve.threshold_db) / curve.slope_db;
    // Evaluated on the side that cannot overflow.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void ReceiverSpec::validate() const {
    if (!(collection_us > 0.0) || !std::isfinite(collection_us)) {
        throw ConfigError("collection time must be positive");
    }
    if (!std::isfinite(noise_floor_db)) throw ConfigError("noise floor must be finite");
    if (!(fov_deg > 0.0 && fov_deg <= 360.0)) throw ConfigError("field of view must lie in (0, 360]");
    if (mode == ReceiverMode::scan && !schedule) {
        throw ConfigError("scan receiver needs a dwell schedule");
    }
    detection.validate();
}

LabeledPulseTrain merge_streams(std::span<const std::vector<TaggedPulse>> streams) {
    std::size_t total = 0;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto& stream = streams[s];
        for (std::size_t i = 1; i < stream.size(); ++i) {
            if (merge_order(stream[i], stream[i - 1])) {
                throw ContractError("merge input stream " + std::to_string(s) +
                                    " is out of order at position " + std::to_string(i));
            }
        }
        total += stream.size();
    }

    LabeledPulseTrain out;
    out.pulses.reserve(total);
    out.labels.reserve(total);
    LoserTree tree(streams);
    while (!tree.empty()) {
        const auto& p = tree.top();
        out.pulses.push_back(p.pdw);
        out.labels.push_back(p.emitter_id);
        tree.pop();
    }
    return out;
}

std::vector<TaggedPulse> receive_emitter(std::span<const TxPulse> pulses, const EmitterSpec& spec,
                                         const ReceiverSpec& rx, const NoiseModel& noise,
                                         const Seed& seed) {
    Rng rng(derive_seed(seed, "receive", spec.emitter_id));
    const RxGeometry geometry = rx.geometry();
    const bool scan = rx.mode == ReceiverMode::scan;

    std::vector<TaggedPulse> kept;
    for (std::size_t j = 0; j < pulses.size(); ++j) {
        rng.seek(static_cast<std::uint64_t>(j) * kDrawsPerPulse);
        auto pdw = received_pdw(pulses[j], spec.position, geometry, noise, rng);
        const double u = rng.uniform();
        if (!pdw) continue;

        // Measurement limits of the receiver front end.
        pdw->toa_us = std::max(pdw->toa_us, 0.0);
        pdw->freq_mhz = std::clamp(pdw->freq_mhz, kMinFrequencyMhz, kMaxFrequencyMhz);
        pdw->pw_us = std::clamp(pdw->pw_us, kMinPulseWidthUs, kMaxPulseWidthUs);

        if (scan && !in_band(pdw->freq_mhz, rx.schedule->centre_at(pdw->toa_us))) continue;
        if (!rx.detection.always_detect &&
            u >= detection_probability(pdw->amp_db - rx.noise_floor_db, rx.detection)) {
            continue;
        }
        kept.push_back({*pdw, spec.emitter_id, static_cast<std::uint64_t>(j)});
    }
    // ToA noise can swap neighbours.
    if (!std::is_sorted(kept.begin(), kept.end(), merge_order)) {
        std::sort(kept.begin(), kept.end(), merge_order);
    }
    return kept;
}

LabeledPulseTrain receive(std::span<const std::vector<TxPulse>> streams,
                          std::span<const EmitterSpec> specs, const ReceiverSpec& rx,
                          const NoiseModel& noise, const Seed& seed, unsigned threads) {
    if (streams.size() != specs.size()) {
        throw ContractError("receive: " + std::to_string(streams.size()) + " pulse streams for " +
                            std::to_string(specs.size()) + " emitters");
    }
    rx.validate();
    noise.validate();

    std::vector<std::vector<TaggedPulse>> received(specs.size());
    parallel_for(specs.size(), threads, [&](std::size_t i) {
        received[i] = receive_emitter(streams[i], specs[i], rx, noise, seed);
    });

    LabeledPulseTrain train = merge_streams(received);
    train.meta.mode = rx.mode;
    train.meta.collection_us = rx.collection_us;
    train.meta.num_emitters = static_cast<std::uint32_t>(specs.size());
    if (rx.schedule) train.meta.schedule = rx.schedule->serialize();
    return train;
}

}  // namespace pdwsim
