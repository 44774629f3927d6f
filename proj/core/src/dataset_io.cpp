#include "pdwsim/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pdwsim/errors.hpp"
#include "pdwsim/parallel.hpp"
#include "pdwsim/receiver.hpp"
#include "pdwsim/text.hpp"

namespace pdwsim {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'R', 'D'};
constexpr std::size_t kWriteBufferRecords = 8192;

template <typename U>
void put_le(unsigned char* dst, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        dst[i] = static_cast<unsigned char>(v >> (8 * i));
    }
}

template <typename U>
U get_le(const unsigned char* src) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(src[i]) << (8 * i);
    return v;
}

void put_f64(unsigned char* dst, double v) { put_le(dst, std::bit_cast<std::uint64_t>(v)); }
double get_f64(const unsigned char* src) { return std::bit_cast<double>(get_le<std::uint64_t>(src)); }

void encode_record(unsigned char* dst, const Pdw& p, bool labels, EmitterId label) {
    put_f64(dst + 0, p.toa_us);
    put_f64(dst + 8, p.freq_mhz);
    put_f64(dst + 16, p.pw_us);
    put_f64(dst + 24, p.aoa_deg);
    put_f64(dst + 32, p.amp_db);
    if (labels) put_le<std::uint32_t>(dst + 40, label);
}

std::array<unsigned char, kHeaderBytes> encode_header(bool labels, std::uint64_t count) {
    std::array<unsigned char, kHeaderBytes> h{};
    std::memcpy(h.data(), kMagic, 4);
    put_le<std::uint16_t>(h.data() + 4, kFormatVersion);
    put_le<std::uint16_t>(h.data() + 6, labels ? kFlagLabels : 0);
    put_le<std::uint64_t>(h.data() + 8, count);
    return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// TrainWriter
// ---------------------------------------------------------------------------

TrainWriter::TrainWriter(const std::filesystem::path& path, bool labels)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), labels_(labels) {
    if (!out_) throw IoError(path.string(), "cannot open for writing");
    const auto header = encode_header(labels_, 0);
    out_.write(reinterpret_cast<const char*>(header.data()), header.size());
    buffer_.reserve(kWriteBufferRecords * record_bytes(labels_));
}

TrainWriter::~TrainWriter() {
    if (!finished_) {
        try {
            finish();
        } catch (...) {
        }
    }
}

void TrainWriter::append(const Pdw& pdw, EmitterId label) {
    if (count_ > 0 && pdw.toa_us < last_toa_) {
        throw ContractError(path_.string() + ": record " + std::to_string(count_) +
                            " goes back in time");
    }
    const std::size_t rec = record_bytes(labels_);
    const std::size_t at = buffer_.size();
    buffer_.resize(at + rec);
    encode_record(buffer_.data() + at, pdw, labels_, label);
    last_toa_ = pdw.toa_us;
    ++count_;
    if (buffer_.size() >= kWriteBufferRecords * rec) flush_buffer();
}

void TrainWriter::flush_buffer() {
    out_.write(reinterpret_cast<const char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
    buffer_.clear();
    if (!out_) throw IoError(path_.string(), "write failed");
}

std::uint64_t TrainWriter::finish() {
    if (finished_) return kHeaderBytes + count_ * record_bytes(labels_);
    finished_ = true;
    flush_buffer();
    const auto header = encode_header(labels_, count_);
    out_.seekp(0);
    out_.write(reinterpret_cast<const char*>(header.data()), header.size());
    out_.close();
    if (!out_) throw IoError(path_.string(), "write failed");
    return kHeaderBytes + count_ * record_bytes(labels_);
}

// ---------------------------------------------------------------------------
// TrainReader
// ---------------------------------------------------------------------------

TrainReader::TrainReader(const std::filesystem::path& path)
    : path_(path.string()), in_(path, std::ios::binary) {
    if (!in_) throw IoError(path_, "cannot open for reading");
    std::error_code ec;
    const std::uint64_t size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError(path_, "cannot stat: " + ec.message());

    std::array<unsigned char, kHeaderBytes> h{};
    in_.read(reinterpret_cast<char*>(h.data()), static_cast<std::streamsize>(std::min<std::uint64_t>(size, kHeaderBytes)));
    if (size < 4 || std::memcmp(h.data(), kMagic, 4) != 0) {
        throw FormatError(path_, 0, "bad magic (expected \"TSRD\")");
    }
    if (size < kHeaderBytes) throw FormatError(path_, size, "truncated header");

    const auto version = get_le<std::uint16_t>(h.data() + 4);
    if (version != kFormatVersion) {
        throw FormatError(path_, 4, "unsupported format version " + std::to_string(version));
    }
    const auto flags = get_le<std::uint16_t>(h.data() + 6);
    if (flags & ~kFlagLabels) {
        throw FormatError(path_, 6, "unknown flag bits " + std::to_string(flags));
    }
    labels_ = (flags & kFlagLabels) != 0;
    count_ = get_le<std::uint64_t>(h.data() + 8);

    const std::uint64_t rec = record_bytes(labels_);
    const std::uint64_t available = (size - kHeaderBytes) / rec;
    if (count_ > available) {
        throw FormatError(path_, kHeaderBytes + available * rec,
                          "truncated: header declares " + std::to_string(count_) + " records, file holds " +
                              std::to_string(available));
    }
    const std::uint64_t expected = kHeaderBytes + count_ * rec;
    if (size != expected) {
        throw FormatError(path_, expected, std::to_string(size - expected) + " trailing bytes");
    }
}

std::size_t TrainReader::next_chunk(std::vector<Pdw>& pulses, std::vector<EmitterId>& labels,
                                    std::size_t max_records) {
    pulses.clear();
    labels.clear();
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining(), max_records));
    if (n == 0) return 0;

    const std::size_t rec = record_bytes(labels_);
    buffer_.resize(n * rec);
    in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
    if (!in_) throw FormatError(path_, kHeaderBytes + read_ * rec, "short read");

    pulses.reserve(n);
    if (labels_) labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* r = buffer_.data() + i * rec;
        Pdw p{get_f64(r), get_f64(r + 8), get_f64(r + 16), get_f64(r + 24), get_f64(r + 32)};
        if (read_ + i > 0 && p.toa_us < last_toa_) {
            throw FormatError(path_, kHeaderBytes + (read_ + i) * rec, "records not sorted by toa");
        }
        last_toa_ = p.toa_us;
        pulses.push_back(p);
        if (labels_) labels.push_back(get_le<std::uint32_t>(r + 40));
    }
    read_ += n;
    return n;
}

// ---------------------------------------------------------------------------
// Whole-file helpers
// ---------------------------------------------------------------------------

std::uint64_t write_train(const LabeledPulseTrain& train, const std::filesystem::path& path) {
    if (train.labels.size() != train.pulses.size()) {
        throw ContractError("write_train: pulses and labels differ in length");
    }
    TrainWriter writer(path, true);
    for (std::size_t i = 0; i < train.pulses.size(); ++i) writer.append(train.pulses[i], train.labels[i]);
    return writer.finish();
}

std::uint64_t write_pdws(std::span<const Pdw> pulses, const std::filesystem::path& path) {
    TrainWriter writer(path, false);
    for (const auto& p : pulses) writer.append(p);
    return writer.finish();
}

LabeledPulseTrain read_train(const std::filesystem::path& path) {
    TrainReader reader(path);
    LabeledPulseTrain train;
    train.pulses.reserve(reader.count());
    if (reader.has_labels()) train.labels.reserve(reader.count());
    std::vector<Pdw> pulses;
    std::vector<EmitterId> labels;
    while (reader.next_chunk(pulses, labels)) {
        train.pulses.insert(train.pulses.end(), pulses.begin(), pulses.end());
        train.labels.insert(train.labels.end(), labels.begin(), labels.end());
    }
    return train;
}

std::filesystem::path metadata_path(const std::filesystem::path& train_path) {
    auto p = train_path;
    return p.replace_extension(".meta");
}

void write_metadata(const TrainMeta& meta, const std::filesystem::path& path) {
    std::string out;
    out += "seed = " + text::format(meta.seed) + '\n';
    out += "mode = " + std::string(to_string(meta.mode)) + '\n';
    out += "collection_us = " + text::format(meta.collection_us) + '\n';
    out += "num_emitters = " + text::format(meta.num_emitters) + '\n';
    if (meta.mode == ReceiverMode::scan) out += "schedule = " + meta.schedule + '\n';
    text::write_file(path, out);
}

TrainMeta read_metadata(const std::filesystem::path& path) {
    TrainMeta meta;
    try {
        for (const auto& [key, value, line] : text::parse_key_values(text::read_file(path))) {
            if (key == "seed") meta.seed = text::parse<std::uint64_t>(value);
            else if (key == "mode") meta.mode = parse_receiver_mode(value);
            else if (key == "collection_us") meta.collection_us = text::parse<double>(value);
            else if (key == "num_emitters") meta.num_emitters = text::parse<std::uint32_t>(value);
            else if (key == "schedule") meta.schedule = DwellSchedule::parse(value).serialize();
            else throw ConfigError("line " + std::to_string(line) + ": unknown metadata key '" + key + "'");
        }
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return meta;
}

void write_csv(const LabeledPulseTrain& train, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << "toa_us,freq_mhz,pw_us,aoa_deg,amp_db,emitter_id\n";
    const bool labels = train.labels.size() == train.pulses.size();
    for (std::size_t i = 0; i < train.pulses.size(); ++i) {
        const auto& p = train.pulses[i];
        out << text::format(p.toa_us) << ',' << text::format(p.freq_mhz) << ',' << text::format(p.pw_us)
            << ',' << text::format(p.aoa_deg) << ',' << text::format(p.amp_db) << ',';
        if (labels) out << train.labels[i];
        out << '\n';
    }
    if (!out) throw IoError(path.string(), "write failed");
}

// ---------------------------------------------------------------------------
// Windowing
// ---------------------------------------------------------------------------

void validate_policy(const WindowPolicy& policy) {
    if (const auto* c = std::get_if<FixedCount>(&policy)) {
        if (c->n == 0) throw std::invalid_argument("window count must be at least 1");
    } else {
        const double span = std::get<FixedDuration>(policy).span_us;
        if (!(span > 0.0) || !std::isfinite(span)) {
            throw std::invalid_argument("window duration must be positive");
        }
    }
}

std::vector<std::pair<std::size_t, std::size_t>> window_bounds(std::span<const Pdw> pulses,
                                                               const WindowPolicy& policy) {
    validate_policy(policy);
    std::vector<std::pair<std::size_t, std::size_t>> bounds;
    const std::size_t n = pulses.size();

    if (const auto* c = std::get_if<FixedCount>(&policy)) {
        for (std::size_t b = 0; b < n; b += c->n) bounds.emplace_back(b, std::min(n, b + c->n));
        return bounds;
    }

    const double span = std::get<FixedDuration>(policy).span_us;
    std::size_t b = 0;
    while (b < n) {
        const double bin = std::floor(pulses[b].toa_us / span);
        std::size_t e = b + 1;
        while (e < n && std::floor(pulses[e].toa_us / span) == bin) ++e;
        bounds.emplace_back(b, e);
        b = e;
    }
    return bounds;
}

std::vector<TrainWindow> window(const LabeledPulseTrain& train, const WindowPolicy& policy) {
    const bool labels = train.labels.size() == train.pulses.size();
    std::vector<TrainWindow> out;
    for (const auto& [b, e] : window_bounds(train.pulses, policy)) {
        TrainWindow w;
        w.index = out.size();
        w.train.meta = train.meta;
        w.train.pulses.assign(train.pulses.begin() + static_cast<std::ptrdiff_t>(b),
                              train.pulses.begin() + static_cast<std::ptrdiff_t>(e));
        if (labels) {
            w.train.labels.assign(train.labels.begin() + static_cast<std::ptrdiff_t>(b),
                                  train.labels.begin() + static_cast<std::ptrdiff_t>(e));
        }
        out.push_back(std::move(w));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

void RunningStats::add(double x) noexcept {
    if (n_ == 0) {
        min_ = max_ = x;
    } else {
        min_ = std::min(min_, x);
        max_ = std::max(max_, x);
    }
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) noexcept {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double delta = o.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += o.m2_ + delta * delta * na * nb / n;
    n_ += o.n_;
    min_ = std::min(min_, o.min_);
    max_ = std::max(max_, o.max_);
}

double RunningStats::stddev() const noexcept {
    return n_ == 0 ? 0.0 : std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_)));
}

Histogram::Histogram(double lo_, double hi_, std::size_t bins, bool log)
    : lo(lo_), hi(hi_), log_scale(log), counts(bins, 0) {}

void Histogram::add(double x) {
    if (counts.empty() || std::isnan(x)) return;
    double a = lo, b = hi;
    if (log_scale) {
        x = std::log10(std::max(x, lo));
        a = std::log10(lo);
        b = std::log10(hi);
    }
    const double f = (x - a) / (b - a) * static_cast<double>(counts.size());
    const auto last = static_cast<double>(counts.size() - 1);
    ++counts[static_cast<std::size_t>(std::clamp(std::floor(f), 0.0, last))];
}

void Histogram::merge(const Histogram& other) {
    if (counts.size() != other.counts.size()) return;
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

double Histogram::bin_lower(std::size_t i) const {
    const double f = static_cast<double>(i) / static_cast<double>(counts.size());
    if (!log_scale) return lo + f * (hi - lo);
    return std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo)));
}

SplitStats::SplitStats()
    : field_histograms{Histogram(0.0, 5e7, 100), Histogram(500.0, 18000.0, 70),
                       Histogram(kMinPulseWidthUs, kMaxPulseWidthUs, 60, true),
                       Histogram(-180.0, 180.0, 72), Histogram(-220.0, 100.0, 64)},
      emitter_count_histogram(0.0, 121.0, 121),
      emitter_pulse_histogram(1.0, 1e8, 40, true) {}

void SplitStats::merge(const SplitStats& o) {
    trains += o.trains;
    pulse_total += o.pulse_total;
    pulses_per_train.merge(o.pulses_per_train);
    emitters_per_train.merge(o.emitters_per_train);
    scenario_emitters.merge(o.scenario_emitters);
    for (std::size_t f = 0; f < kNumFields; ++f) {
        fields[f].merge(o.fields[f]);
        field_histograms[f].merge(o.field_histograms[f]);
    }
    dominant_share.merge(o.dominant_share);
    pulses_per_emitter.merge(o.pulses_per_emitter);
    emitter_shares.insert(emitter_shares.end(), o.emitter_shares.begin(), o.emitter_shares.end());
    emitter_count_histogram.merge(o.emitter_count_histogram);
    emitter_pulse_histogram.merge(o.emitter_pulse_histogram);
}

double SplitStats::median_emitter_share() const {
    if (emitter_shares.empty()) return 0.0;
    std::vector<double> v = emitter_shares;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

SplitStats train_stats(const std::filesystem::path& path, std::uint32_t scenario_emitters) {
    SplitStats s;
    TrainReader reader(path);
    std::vector<Pdw> pulses;
    std::vector<EmitterId> labels;
    std::vector<std::uint64_t> per_emitter;
    while (reader.next_chunk(pulses, labels)) {
        for (const auto& p : pulses) {
            const std::array<double, kNumFields> v = {p.toa_us, p.freq_mhz, p.pw_us, p.aoa_deg, p.amp_db};
            for (std::size_t f = 0; f < kNumFields; ++f) {
                s.fields[f].add(v[f]);
                s.field_histograms[f].add(v[f]);
            }
        }
        for (EmitterId id : labels) {
            if (id >= per_emitter.size()) per_emitter.resize(id + 1, 0);
            ++per_emitter[id];
        }
    }

    const std::uint64_t total = reader.count();
    s.trains = 1;
    s.pulse_total = total;
    s.pulses_per_train.add(static_cast<double>(total));
    s.scenario_emitters.add(scenario_emitters);
    s.emitter_count_histogram.add(scenario_emitters);
    if (reader.has_labels()) {
        std::uint64_t present = 0, dominant = 0;
        for (std::uint64_t c : per_emitter) {
            if (c == 0) continue;
            ++present;
            dominant = std::max(dominant, c);
            s.pulses_per_emitter.add(static_cast<double>(c));
            s.emitter_pulse_histogram.add(static_cast<double>(c));
            s.emitter_shares.push_back(static_cast<double>(c) / static_cast<double>(total));
        }
        s.emitters_per_train.add(static_cast<double>(present));
        if (total > 0) s.dominant_share.add(static_cast<double>(dominant) / static_cast<double>(total));
    }
    return s;
}

StatsReport compute_stats(const std::filesystem::path& root, unsigned threads) {
    const Manifest manifest = read_manifest(root / kManifestName);
    StatsReport report;
    std::vector<std::string> failures;

    // Fixed-size batches merged in manifest order: bounded memory, and the
    // floating-point reduction order does not depend on the thread count.
    const std::size_t batch = std::max<std::size_t>(1, threads) * 4;
    for (std::size_t start = 0; start < manifest.entries.size(); start += batch) {
        const std::size_t end = std::min(manifest.entries.size(), start + batch);
        std::vector<SplitStats> partial(end - start);
        std::vector<std::string> errors(end - start);
        parallel_for(end - start, threads, [&](std::size_t i) {
            const auto& entry = manifest.entries[start + i];
            try {
                partial[i] = train_stats(root / entry.file, entry.num_emitters);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < partial.size(); ++i) {
            if (!errors[i].empty()) {
                failures.push_back(errors[i]);
                continue;
            }
            report.splits[manifest.entries[start + i].split].merge(partial[i]);
            report.overall.merge(partial[i]);
        }
    }
    if (!failures.empty()) {
        std::string msg = std::to_string(failures.size()) + " train file(s) could not be read:";
        for (const auto& f : failures) msg += "\n  " + f;
        throw IoError(root.string(), msg);
    }
    return report;
}

namespace {

void format_split(std::ostringstream& out, const std::string& name, const SplitStats& s) {
    out << "[" << name << "]\n";
    out << "  trains                 " << s.trains << '\n';
    if (s.trains == 0) return;
    out << std::fixed << std::setprecision(3);
    out << "  total pulses           " << s.total_pulses() << '\n';
    out << "  pulses per train       min " << s.pulses_per_train.min() << "  max " << s.pulses_per_train.max()
        << "  mean " << s.pulses_per_train.mean() << '\n';
    out << "  emitters per train     min " << s.emitters_per_train.min() << "  max "
        << s.emitters_per_train.max() << "  mean " << s.emitters_per_train.mean() << '\n';
    out << "  scenario emitters      min " << s.scenario_emitters.min() << "  max " << s.scenario_emitters.max()
        << "  mean " << s.scenario_emitters.mean() << '\n';
    out << "  field                  mean            std             min             max\n";
    for (std::size_t f = 0; f < kNumFields; ++f) {
        const auto& r = s.fields[f];
        out << "  " << std::left << std::setw(22) << kFieldNames[f] << std::right << std::setw(15)
            << r.mean() << ' ' << std::setw(15) << r.stddev() << ' ' << std::setw(15) << r.min() << ' '
            << std::setw(15) << r.max() << '\n';
    }
    out << std::setprecision(4);
    out << "  max dominant share     " << s.dominant_share.max() << '\n';
    out << "  median emitter share   " << s.median_emitter_share() << '\n';
    const double mean = s.pulses_per_emitter.mean();
    const double dispersion = mean > 0 ? s.pulses_per_emitter.stddev() * s.pulses_per_emitter.stddev() / mean : 0.0;
    out << "  pulses per emitter     mean " << mean << "  variance/mean " << dispersion << '\n';
    out << std::defaultfloat;
}

}  // namespace

std::string format_stats(const StatsReport& report) {
    std::ostringstream out;
    for (const auto& [split, stats] : report.splits) format_split(out, std::string(to_string(split)), stats);
    format_split(out, "all", report.overall);
    return out.str();
}

void write_histograms_csv(const StatsReport& report, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "split,quantity,bin_lower,bin_upper,count\n";
    auto emit = [&](const std::string& split, const std::string& quantity, const Histogram& h) {
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            const double upper = i + 1 < h.counts.size() ? h.bin_lower(i + 1) : h.hi;
            out << split << ',' << quantity << ',' << text::format(h.bin_lower(i)) << ','
                << text::format(upper) << ',' << h.counts[i] << '\n';
        }
    };
    auto emit_split = [&](const std::string& name, const SplitStats& s) {
        emit(name, "emitters_per_train", s.emitter_count_histogram);
        emit(name, "pulses_per_emitter", s.emitter_pulse_histogram);
        for (std::size_t f = 0; f < kNumFields; ++f) emit(name, kFieldNames[f], s.field_histograms[f]);
    };
    for (const auto& [split, stats] : report.splits) emit_split(std::string(to_string(split)), stats);
    emit_split("all", report.overall);
    text::write_file(path, out.str());
}

}  // namespace pdwsim
