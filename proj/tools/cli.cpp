#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "pdwsim/dataset_io.hpp"
#include "pdwsim/emitters.hpp"
#include "pdwsim/errors.hpp"
#include "pdwsim/eval.hpp"
#include "pdwsim/parallel.hpp"
#include "pdwsim/scenario.hpp"
#include "pdwsim/text.hpp"

namespace pdwsim::cli {

namespace {

struct GenerateArgs {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string mode;
    std::optional<std::uint32_t> trains;
    std::vector<std::uint32_t> splits;
};

struct WindowArgs {
    std::size_t count = 0;
    double duration = 0.0;
};

WindowPolicy policy_from(const CLI::Option* count_opt, const WindowArgs& w) {
    if (count_opt->count() > 0) return FixedCount{w.count};
    return FixedDuration{w.duration};
}

// Splits `total` trains in proportion to `weights` (largest remainder).
SplitCounts distribute(std::uint32_t total, const SplitCounts& weights) {
    const std::array<std::uint32_t, 3> w = {weights.train, weights.validation, weights.test};
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    std::array<std::uint32_t, 3> n{};
    if (sum == 0.0) {
        n[0] = total;
    } else {
        std::array<double, 3> rem{};
        std::uint32_t assigned = 0;
        for (int i = 0; i < 3; ++i) {
            const double exact = total * (w[i] / sum);
            n[i] = static_cast<std::uint32_t>(std::floor(exact));
            rem[i] = exact - n[i];
            assigned += n[i];
        }
        while (assigned < total) {
            const auto i = static_cast<std::size_t>(std::max_element(rem.begin(), rem.end()) - rem.begin());
            ++n[i];
            rem[i] = -1.0;
            ++assigned;
        }
    }
    return {n[0], n[1], n[2]};
}

void print_kv(std::ostream& out, const std::string& key, const std::string& value) {
    out << key << " = " << value << '\n';
}

int cmd_generate(const GenerateArgs& a, unsigned threads, std::ostream& out) {
    ScenarioConfig config = load_config(a.config);
    if (!a.mode.empty()) config.mode = parse_receiver_mode(a.mode);
    if (!a.splits.empty()) {
        if (a.splits.size() != 3) throw ConfigError("--splits expects three counts: train,validation,test");
        const SplitCounts s{a.splits[0], a.splits[1], a.splits[2]};
        if (a.trains && *a.trains != s.total()) {
            throw ConfigError("--trains " + std::to_string(*a.trains) + " disagrees with --splits total " +
                              std::to_string(s.total()));
        }
        config.splits = s;
    } else if (a.trains) {
        config.splits = distribute(*a.trains, config.splits);
    }
    config.validate();

    print_kv(out, "master_seed", std::to_string(a.seed));
    print_kv(out, "out", a.out);
    print_kv(out, "threads", std::to_string(threads));
    out << to_config_text(config);

    const Manifest manifest = generate_dataset(config, a.seed, a.out, threads);
    std::uint64_t pulses = 0;
    for (const auto& e : manifest.entries) pulses += e.num_pulses;
    print_kv(out, "trains_written", std::to_string(manifest.entries.size()));
    print_kv(out, "pulses_written", std::to_string(pulses));
    return kExitOk;
}

int cmd_stats(const std::string& in, const std::string& csv, unsigned threads, std::ostream& out) {
    print_kv(out, "in", in);
    if (!csv.empty()) print_kv(out, "csv", csv);
    const StatsReport report = compute_stats(in, threads);
    out << format_stats(report);
    if (!csv.empty()) write_histograms_csv(report, csv);
    return kExitOk;
}

int cmd_window(const std::string& in, const WindowPolicy& policy, const std::string& out_dir, std::ostream& out) {
    validate_policy(policy);
    print_kv(out, "in", in);
    if (const auto* c = std::get_if<FixedCount>(&policy)) print_kv(out, "count", std::to_string(c->n));
    else print_kv(out, "duration_us", text::format(std::get<FixedDuration>(policy).span_us));
    print_kv(out, "out", out_dir);

    const LabeledPulseTrain train = read_train(in);
    const bool labels = train.labels.size() == train.pulses.size();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError(out_dir, "cannot create directory: " + ec.message());

    std::size_t written = 0;
    for (const auto& w : window(train, policy)) {
        char name[32];
        std::snprintf(name, sizeof name, "window_%05zu.bin", w.index);
        const auto path = std::filesystem::path(out_dir) / name;
        if (labels) write_train(w.train, path);
        else write_pdws(w.train.pulses, path);
        ++written;
    }
    print_kv(out, "windows_written", std::to_string(written));
    return kExitOk;
}

int cmd_evaluate(const std::string& truth, const std::string& pred, const WindowPolicy& policy,
                 bool per_train, const std::string& report_dir, unsigned threads, std::ostream& out) {
    print_kv(out, "truth", truth);
    print_kv(out, "pred", pred);
    if (const auto* c = std::get_if<FixedCount>(&policy)) print_kv(out, "count", std::to_string(c->n));
    else print_kv(out, "duration_us", text::format(std::get<FixedDuration>(policy).span_us));

    const MetricReport report =
        score_dataset(truth, pred, policy, per_train ? Aggregation::per_train_median : Aggregation::pooled, threads);
    out << format_report(report);
    if (!report_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(report_dir, ec);
        if (ec) throw IoError(report_dir, "cannot create directory: " + ec.message());
        const std::filesystem::path dir(report_dir);
        write_report(report, dir / "score.txt", dir / "windows.csv");
    }
    return kExitOk;
}

int cmd_baseline(const std::string& in, const std::string& out_path, std::ostream& out) {
    print_kv(out, "in", in);
    print_kv(out, "out", out_path);
    LabeledPulseTrain train = read_train(in);
    train.labels = baseline_deinterleave(train.pulses);
    write_train(train, out_path);
    std::uint32_t clusters = 0;
    for (auto l : train.labels) clusters = std::max(clusters, l + 1);
    print_kv(out, "clusters", std::to_string(clusters));
    return kExitOk;
}

nlohmann::json catalogue_json(const std::vector<TransmitterType>& catalogue, std::uint64_t seed) {
    nlohmann::json types = nlohmann::json::array();
    for (const auto& t : catalogue) {
        nlohmann::json modes = nlohmann::json::array();
        for (auto [kind, name] : {std::pair{ModeKind::constant, "constant_pri"},
                                  std::pair{ModeKind::staggered, "staggered_pri"},
                                  std::pair{ModeKind::jittered, "jittered_pri"},
                                  std::pair{ModeKind::hopping, "frequency_hopping"}}) {
            if (t.allows(kind)) modes.push_back(name);
        }
        nlohmann::json j = {
            {"type_id", t.type_id},
            {"freq_min_mhz", t.freq_min_mhz},
            {"freq_max_mhz", t.freq_max_mhz},
            {"pw_min_us", t.pw_min_us},
            {"pw_max_us", t.pw_max_us},
            {"pri_min_us", t.pri_min_us},
            {"pri_max_us", t.pri_max_us},
            {"tx_power_dbm", t.tx_power_dbm},
            {"modes", modes},
        };
        if (t.scan) {
            j["antenna_scan"] = {{"period_s", t.scan->period_s},
                                 {"beamwidth_deg", t.scan->beamwidth_deg},
                                 {"sidelobe_db", t.scan->sidelobe_db}};
        } else {
            j["antenna_scan"] = nullptr;
        }
        types.push_back(std::move(j));
    }
    return {{"catalogue_seed", seed}, {"transmitter_types", std::move(types)}};
}

int cmd_catalogue(std::uint64_t seed, const std::string& out_path, std::ostream& out) {
    print_kv(out, "master_seed", std::to_string(seed));
    print_kv(out, "out", out_path);
    const auto catalogue = sample_catalogue(Seed(seed));
    text::write_file(out_path, catalogue_json(catalogue, seed).dump(2) + "\n");
    print_kv(out, "types", std::to_string(catalogue.size()));
    return kExitOk;
}

void add_window_options(CLI::App* cmd, WindowArgs& w, CLI::Option*& count_opt) {
    count_opt = cmd->add_option("--count", w.count, "Fixed number of pulses per window")
                    ->check(CLI::PositiveNumber);
    auto* duration = cmd->add_option("--duration", w.duration, "Window span in microseconds")
                         ->check(CLI::PositiveNumber);
    count_opt->excludes(duration);
    duration->excludes(count_opt);
    cmd->callback([count_opt, duration] {
        if (count_opt->count() == 0 && duration->count() == 0) {
            throw CLI::RequiredError("--count or --duration");
        }
    });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulate interleaved radar pulse trains and score deinterleavers", "pdwsim"};
    app.require_subcommand(1);

    unsigned threads = default_thread_count();

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a labelled dataset");
    generate->add_option("--config", gen.config, "Scenario config file (key = value)")->required()->check(CLI::ExistingFile);
    generate->add_option("--seed", gen.seed, "Master seed")->required();
    generate->add_option("--out", gen.out, "Output directory")->required();
    generate->add_option("--mode", gen.mode, "Receiver mode")->check(CLI::IsMember({"stare", "scan"}));
    generate->add_option("--trains", gen.trains, "Total number of trains, split in config proportions");
    generate->add_option("--splits", gen.splits, "Train,validation,test counts")->delimiter(',')->expected(3);
    generate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string stats_in, stats_csv;
    auto* stats = app.add_subcommand("stats", "Summarize a generated dataset");
    stats->add_option("--in", stats_in, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    stats->add_option("--csv", stats_csv, "Write histograms as CSV");
    stats->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string window_in, window_out;
    WindowArgs window_args;
    CLI::Option* window_count = nullptr;
    auto* win = app.add_subcommand("window", "Cut one train file into windows");
    win->add_option("--in", window_in, "Train file")->required()->check(CLI::ExistingFile);
    win->add_option("--out", window_out, "Output directory")->required();
    add_window_options(win, window_args, window_count);

    std::string truth_dir, pred_dir, report_dir;
    bool per_train = false;
    WindowArgs eval_args;
    CLI::Option* eval_count = nullptr;
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions with the median V-measure");
    evaluate->add_option("--truth", truth_dir, "Ground-truth dataset directory")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--pred", pred_dir, "Prediction directory")->required()->check(CLI::ExistingDirectory);
    evaluate->add_flag("--per-train-median", per_train, "Median of per-train medians instead of pooled windows");
    evaluate->add_option("--report", report_dir, "Write score.txt and windows.csv here");
    evaluate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    add_window_options(evaluate, eval_args, eval_count);

    std::string base_in, base_out;
    auto* baseline = app.add_subcommand("baseline", "Run the grid-clustering baseline on one train");
    baseline->add_option("--in", base_in, "Train file")->required()->check(CLI::ExistingFile);
    baseline->add_option("--out", base_out, "Prediction file")->required();

    std::uint64_t cat_seed = 0;
    std::string cat_out;
    auto* catalogue = app.add_subcommand("catalogue", "Export the transmitter catalogue as JSON");
    catalogue->add_option("--seed", cat_seed, "Catalogue seed")->required();
    catalogue->add_option("--out", cat_out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(gen, threads, out);
        if (*stats) return cmd_stats(stats_in, stats_csv, threads, out);
        if (*win) return cmd_window(window_in, policy_from(window_count, window_args), window_out, out);
        if (*evaluate) {
            return cmd_evaluate(truth_dir, pred_dir, policy_from(eval_count, eval_args), per_train, report_dir,
                                threads, out);
        }
        if (*baseline) return cmd_baseline(base_in, base_out, out);
        if (*catalogue) return cmd_catalogue(cat_seed, cat_out, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace pdwsim::cli
