// peakload: fit power-law tails to peak-load series from the command line.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "peakload/altdists.hpp"
#include "peakload/bootstrap.hpp"
#include "peakload/ccdf.hpp"
#include "peakload/csv.hpp"
#include "peakload/error.hpp"
#include "peakload/gof.hpp"
#include "peakload/ingest.hpp"
#include "peakload/powerlaw.hpp"
#include "peakload/report.hpp"
#include "peakload/rng.hpp"
#include "peakload/tailscan.hpp"

using namespace peakload;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitRejected = 2;
constexpr int kExitDomain = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Settings {
    // shared
    std::string input;
    std::string output = "-";
    std::string format = "json";
    std::uint64_t seed = 0;
    std::size_t replicates = 2500;
    double significance = 0.10;
    double ci_level = 0.95;
    unsigned threads = 1;

    // series loading
    std::string frame = "raw";
    std::string timestamp_col = "timestamp";
    std::string value_col;
    std::string meter_col;
    bool epoch = false;
    std::string delimiter = ",";
    double coverage = 0.9;
    std::string meter_mode = "sum";
    int window_days = 0;
    std::string rejects_path;

    // fit
    std::size_t min_tail = 10;
    std::string candidates = "all_unique";
    std::size_t grid_size = 512;
    bool gof = false;
    bool ci = false;
    std::string band_grid;
    std::string profile_path;
    std::string band_path;
    std::string replicate_ds_path;

    // exceed
    std::string fit_path;
    double x = 0.0;

    // simulate
    double x_min = 1.0;
    double alpha = 2.5;
    std::size_t count = 100;
    double body_fraction = 0.0;
    double body_low = 0.0;

    // compare
    std::string families = "exponential,lognormal,gamma";
};

std::string read_file(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cli", "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), {}};
}

void emit(const Settings& s, const std::string& text) {
    if (s.output == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(s.output, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cli", "cannot write '" + s.output + "'");
    out << text;
}

void write_side_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cli", "cannot write '" + path + "'");
    out << text;
}

struct LoadedSeries {
    PeakSeries series;
    std::string hash;
};

LoadedSeries load_series(const Settings& s) {
    if (s.input.empty()) throw UsageError("--input is required");
    const std::string bytes = read_file(s.input);
    const std::string hash = content_hash(bytes);
    std::istringstream in(bytes);
    const Frame frame = frame_from_string(s.frame);
    if (frame == Frame::raw) {
        const auto column = s.value_col.empty() ? std::nullopt : std::optional<std::string>(s.value_col);
        return {PeakSeries(read_values_csv(in, column)), hash};
    }

    if (s.delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    CsvSchema schema;
    schema.timestamp_column = s.timestamp_col;
    schema.value_column = s.value_col.empty() ? "value" : s.value_col;
    if (!s.meter_col.empty()) schema.meter_column = s.meter_col;
    schema.timestamp_format = s.epoch ? TimestampFormat::epoch_seconds : TimestampFormat::iso8601;
    schema.delimiter = s.delimiter[0];
    auto save_rejects = [&](const std::vector<RejectedRow>& rejects) {
        if (s.rejects_path.empty()) return;
        std::ostringstream rej;
        write_rejects_csv(rej, rejects);
        write_side_file(s.rejects_path, rej.str());
    };
    ParseResult parsed;
    try {
        parsed = parse_csv(in, schema);
    } catch (const QualityError& e) {
        save_rejects(e.rejects());
        throw;
    }
    save_rejects(parsed.rejects);
    if (!parsed.rejects.empty()) std::cerr << parsed.rejects.size() << " row(s) rejected\n";

    AggregateOptions agg;
    agg.frame = frame;
    agg.sum_meters = s.meter_mode == "sum";
    agg.min_coverage = s.coverage;
    auto result = aggregate_peaks(parsed.records, agg);
    if (!result.skipped.empty()) std::cerr << result.skipped.size() << " incomplete bucket(s) skipped\n";
    if (s.window_days > 0) {
        return {apply_window(result.series, WindowSpec{.length = std::chrono::days{s.window_days}, .anchor = std::nullopt}), hash};
    }
    return {std::move(result.series), hash};
}

ScanOptions scan_options(const Settings& s) {
    return {.min_tail = s.min_tail,
            .rule = candidate_rule_from_string(s.candidates),
            .grid_size = s.grid_size,
            .keep_profile = true};
}

ordered_json tool_json() { return {{"name", "peakload"}, {"version", std::string(version())}}; }

ordered_json input_json(const Settings& s, const LoadedSeries& loaded) {
    return {{"path", s.input}, {"content_hash", loaded.hash}, {"observations", loaded.series.size()}};
}

ordered_json series_config(const Settings& s) {
    ordered_json j{{"input", s.input}, {"frame", s.frame}};
    if (s.frame != "raw") {
        j["timestamp_col"] = s.timestamp_col;
        j["meter_col"] = s.meter_col;
        j["epoch"] = s.epoch;
        j["delimiter"] = s.delimiter;
        j["coverage"] = s.coverage;
        j["meter_mode"] = s.meter_mode;
        j["window_days"] = s.window_days;
    }
    j["value_col"] = s.value_col;
    return j;
}

std::vector<double> default_band_grid(std::span<const double> values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    std::vector<double> grid;
    const int points = 50;
    if (*lo == *hi) return {*lo};
    for (int i = 0; i < points; ++i) {
        grid.push_back(*lo * std::pow(*hi / *lo, static_cast<double>(i) / (points - 1)));
    }
    grid.back() = *hi;
    return grid;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    for (const auto& field : split_csv_line(text)) {
        const auto item = trim(field);
        if (!item.empty()) items.emplace_back(item);
    }
    return items;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    for (const auto& item : split_list(text)) {
        const auto v = parse_double(item);
        if (!v) throw UsageError("--band-grid: '" + item + "' is not a number");
        grid.push_back(*v);
    }
    return grid;
}

std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

int cmd_fit(const Settings& s) {
    const auto loaded = load_series(s);
    const auto scan = scan_xmin(loaded.series, scan_options(s));
    const PowerLawFit& fit = scan.best;

    ordered_json config = series_config(s);
    config["min_tail"] = s.min_tail;
    config["candidates"] = s.candidates;
    config["grid_size"] = s.grid_size;
    config["gof"] = s.gof;
    config["ci"] = s.ci;
    config["replicates"] = s.replicates;
    config["significance"] = s.significance;
    config["ci_level"] = s.ci_level;
    config["seed"] = s.seed;

    ordered_json report{{"tool", tool_json()}, {"command", "fit"}, {"config", config}, {"seed", s.seed}};
    report["input"] = input_json(s, loaded);
    report["fit"] = to_json(fit);

    if (!s.profile_path.empty()) {
        std::ostringstream p;
        write_profile_csv(p, scan.profile);
        write_side_file(s.profile_path, p.str());
        report["profile_path"] = s.profile_path;
    }

    std::optional<GofResult> gof;
    if (s.gof) {
        gof = gof_pvalue(loaded.series, fit,
                         {.replicates = s.replicates,
                          .seed = s.seed,
                          .significance = s.significance,
                          .threads = s.threads,
                          .scan = {.min_tail = s.min_tail, .rule = scan_options(s).rule, .grid_size = s.grid_size}});
        report["gof"] = to_json(*gof);
        if (!s.replicate_ds_path.empty()) {
            std::ostringstream r;
            write_replicate_ds_csv(r, gof->replicate_ds);
            write_side_file(s.replicate_ds_path, r.str());
            report["replicate_ds_path"] = s.replicate_ds_path;
        }
    }

    std::optional<CiReport> ci;
    if (s.ci) {
        BootstrapOptions b{.replicates = s.replicates,
                           .level = s.ci_level,
                           .band_grid = s.band_grid.empty() ? default_band_grid(loaded.series.values()) : parse_grid(s.band_grid),
                           .seed = s.seed,
                           .threads = s.threads,
                           .scan = {.min_tail = s.min_tail, .rule = scan_options(s).rule, .grid_size = s.grid_size}};
        ci = bootstrap_ci(loaded.series, b);
        report["ci"] = to_json(*ci);
        if (!s.band_path.empty()) {
            std::ostringstream r;
            write_band_csv(r, ci->band);
            write_side_file(s.band_path, r.str());
            report["band_path"] = s.band_path;
        }
    }

    if (s.format == "json") {
        emit(s, report.dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << "parameter,value,ci_low,ci_high,p_value\n";
        const std::string p = gof ? format_double(gof->p_value) : std::string();
        out << "x_min," << format_double(fit.x_min) << ','
            << (ci ? format_double(ci->xmin_interval.first) + ',' + format_double(ci->xmin_interval.second) : ",")
            << ',' << p << '\n';
        out << "alpha," << format_double(fit.alpha) << ','
            << (ci ? format_double(ci->alpha_interval.first) + ',' + format_double(ci->alpha_interval.second) : ",")
            << ',' << p << '\n';
        out << "w," << format_double(fit.w) << ",,," << p << '\n';
        emit(s, out.str());
    }
    return gof && gof->reject ? kExitRejected : kExitOk;
}

int cmd_exceed(const Settings& s) {
    if (s.fit_path.empty()) throw UsageError("--fit is required");
    const std::string bytes = read_file(s.fit_path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(bytes);
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorCode::SchemaError, "cli", std::string("fit file is not JSON: ") + e.what());
    }
    const ordered_json& fit_json = doc.contains("fit") ? doc["fit"] : doc;
    const PowerLawFit fit = power_law_fit_from_json(fit_json);
    std::optional<CiReport> ci;
    if (doc.contains("ci")) ci = ci_report_from_json(doc["ci"]);

    const auto result = exceedance_query(fit, s.x, ci ? &*ci : nullptr);

    if (s.format == "json") {
        ordered_json report{{"tool", tool_json()},
                            {"command", "exceed"},
                            {"config", {{"fit", s.fit_path}, {"x", s.x}}},
                            {"fit_hash", content_hash(bytes)},
                            {"fit", to_json(fit)},
                            {"x", s.x},
                            {"probability", result.probability}};
        if (result.interval) {
            report["interval"] = {result.interval->first, result.interval->second};
            report["ci_level"] = ci->level;
        } else {
            report["interval"] = nullptr;
        }
        emit(s, report.dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << "x,probability,low,high\n"
            << format_double(s.x) << ',' << format_double(result.probability) << ','
            << csv_field(result.interval ? std::optional(result.interval->first) : std::nullopt) << ','
            << csv_field(result.interval ? std::optional(result.interval->second) : std::nullopt) << '\n';
        emit(s, out.str());
    }
    return kExitOk;
}

int cmd_ccdf(const Settings& s) {
    const auto loaded = load_series(s);
    const auto ccdf = build_empirical_ccdf(loaded.series);
    if (s.format == "csv") {
        std::ostringstream out;
        write_ccdf_csv(out, ccdf);
        emit(s, out.str());
    } else {
        ordered_json points = ordered_json::array();
        for (const auto& p : ccdf.points()) {
            points.push_back({{"value", p.value}, {"frequency", p.frequency}, {"survival", p.survival}});
        }
        ordered_json report{{"tool", tool_json()},
                            {"command", "ccdf"},
                            {"config", series_config(s)},
                            {"input", input_json(s, loaded)},
                            {"points", points}};
        emit(s, report.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_aggregate(const Settings& s) {
    if (s.frame == "raw") throw UsageError("aggregate needs a calendar --frame");
    const auto loaded = load_series(s);
    if (s.format == "csv") {
        std::ostringstream out;
        write_peak_csv(out, loaded.series);
        emit(s, out.str());
    } else {
        ordered_json peaks = ordered_json::array();
        const auto& ts = *loaded.series.timestamps();
        for (std::size_t i = 0; i < loaded.series.size(); ++i) {
            peaks.push_back({{"bucket_start", format_timestamp(ts[i])}, {"peak", loaded.series.values()[i]}});
        }
        ordered_json report{{"tool", tool_json()},
                            {"command", "aggregate"},
                            {"config", series_config(s)},
                            {"input", input_json(s, loaded)},
                            {"peaks", peaks}};
        emit(s, report.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_simulate(const Settings& s) {
    if (s.count == 0) throw UsageError("-n must be positive");
    if (s.body_fraction < 0.0 || s.body_fraction >= 1.0) throw UsageError("--body-fraction must lie in [0, 1)");
    const double body_low = s.body_low > 0.0 ? s.body_low : 0.5 * s.x_min;
    if (s.body_fraction > 0.0 && !(body_low < s.x_min)) throw UsageError("--body-low must be below --x-min");

    Rng rng(s.seed);
    std::vector<double> values;
    if (s.body_fraction == 0.0) {
        values = sample_tail(s.x_min, s.alpha, s.count, rng);
    } else {
        if (!(s.alpha > 1.0) || !std::isfinite(s.alpha)) {
            throw Error(ErrorCode::InvalidAlpha, "powerlaw", "alpha must be finite and > 1");
        }
        values.reserve(s.count);
        for (std::size_t i = 0; i < s.count; ++i) {
            const bool body = rng.bernoulli(s.body_fraction);
            const double u = rng.uniform();
            values.push_back(body ? body_low + (s.x_min - body_low) * u : tail_quantile(s.x_min, s.alpha, u));
        }
    }

    if (s.format == "csv") {
        std::ostringstream out;
        write_values_csv(out, values);
        emit(s, out.str());
    } else {
        ordered_json config{{"x_min", s.x_min}, {"alpha", s.alpha}, {"n", s.count}, {"body_fraction", s.body_fraction},
                            {"body_low", body_low}, {"seed", s.seed}};
        ordered_json report{{"tool", tool_json()}, {"command", "simulate"}, {"config", config},
                            {"seed", s.seed},      {"values", values}};
        emit(s, report.dump(2) + "\n");
    }
    return kExitOk;
}

std::string params_text(const ordered_json& params) {
    std::string text;
    for (const auto& [k, v] : params.items()) {
        if (!text.empty()) text += ';';
        text += k + '=' + format_double(v.get<double>());
    }
    return text;
}

int cmd_compare(const Settings& s) {
    const auto names = split_list(s.families);
    if (names.empty()) throw UsageError("--families needs at least one family");
    std::vector<Family> families;
    for (const auto& name : names) {
        try {
            families.push_back(family_from_string(name));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    const auto loaded = load_series(s);
    const auto scan = scan_xmin(loaded.series, scan_options(s));
    const PowerLawFit& fit = scan.best;
    const GofOptions options{.replicates = s.replicates,
                             .seed = s.seed,
                             .significance = s.significance,
                             .threads = s.threads,
                             .scan = {.min_tail = s.min_tail, .rule = scan_options(s).rule, .grid_size = s.grid_size}};
    const auto pl_gof = gof_pvalue(loaded.series, fit, options);

    ordered_json config = series_config(s);
    config["families"] = names;
    config["min_tail"] = s.min_tail;
    config["candidates"] = s.candidates;
    config["replicates"] = s.replicates;
    config["significance"] = s.significance;
    config["seed"] = s.seed;

    ordered_json rows = ordered_json::array();
    ordered_json pl_params{{"alpha", fit.alpha}};
    rows.push_back({{"family", "power_law"},
                    {"params", pl_params},
                    {"x_min", fit.x_min},
                    {"ks_distance", fit.ks_distance},
                    {"p_value", pl_gof.p_value},
                    {"reject", pl_gof.reject}});
    for (Family f : families) {
        const auto alt = fit_alt_series(loaded.series, fit.x_min, f);
        const auto g = gof_alt(loaded.series, alt, options);
        const auto j = to_json(alt);
        rows.push_back({{"family", j["family"]},
                        {"params", j["params"]},
                        {"x_min", alt.x_min},
                        {"ks_distance", alt.ks_distance},
                        {"p_value", g.p_value},
                        {"reject", g.reject},
                        {"log_likelihood", alt.log_likelihood}});
    }

    if (s.format == "json") {
        ordered_json report{{"tool", tool_json()}, {"command", "compare"}, {"config", config}, {"seed", s.seed}};
        report["input"] = input_json(s, loaded);
        report["fit"] = to_json(fit);
        report["table"] = rows;
        emit(s, report.dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << "family,params,x_min,ks_distance,p_value,reject\n";
        for (const auto& r : rows) {
            out << r["family"].get<std::string>() << ',' << params_text(r["params"]) << ','
                << format_double(r["x_min"].get<double>()) << ',' << format_double(r["ks_distance"].get<double>())
                << ',' << format_double(r["p_value"].get<double>()) << ',' << (r["reject"].get<bool>() ? 1 : 0)
                << '\n';
        }
        emit(s, out.str());
    }
    return kExitOk;
}

// Key=value lines; '#' starts a comment. Keys use the long flag names.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> entries;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string trimmed(trim(line));
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(number) + ": expected key = value");
        }
        std::string key(trim(std::string_view(trimmed).substr(0, eq)));
        std::replace(key.begin(), key.end(), '_', '-');
        entries[key] = std::string(trim(std::string_view(trimmed).substr(eq + 1)));
    }
    return entries;
}

std::string env_name(std::string key) {
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::toupper(c));
    });
    return "PEAKLOAD_" + key;
}

void add_series_options(CLI::App* cmd, Settings& s) {
    cmd->add_option("-i,--input", s.input, "Input CSV path ('-' for stdin)");
    cmd->add_option("--frame", s.frame, "raw (value list) or hourly|daily|weekly|monthly|yearly")
        ->check(CLI::IsMember({"raw", "hourly", "daily", "weekly", "monthly", "yearly"}));
    cmd->add_option("--timestamp-col", s.timestamp_col, "Timestamp column of interval data");
    cmd->add_option("--value-col", s.value_col, "Value column");
    cmd->add_option("--meter-col", s.meter_col, "Meter id column");
    cmd->add_flag("--epoch", s.epoch, "Timestamps are epoch seconds");
    cmd->add_option("--delimiter", s.delimiter, "Field delimiter");
    cmd->add_option("--coverage", s.coverage, "Minimum fraction of expected readings per bucket")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--meter-mode", s.meter_mode, "Combine meters by coincident sum or max")
        ->check(CLI::IsMember({"sum", "max"}));
    cmd->add_option("--window-days", s.window_days, "Keep only the trailing window (0 keeps all)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--rejects", s.rejects_path, "Write rejected rows CSV here");
}

void add_output_options(CLI::App* cmd, Settings& s) {
    cmd->add_option("-o,--output", s.output, "Output path ('-' for stdout)");
    cmd->add_option("--format", s.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void add_scan_options(CLI::App* cmd, Settings& s) {
    cmd->add_option("--min-tail", s.min_tail, "Smallest admissible tail size")->check(CLI::Range(10, 1 << 30));
    cmd->add_option("--candidates", s.candidates, "x_min candidate rule")
        ->check(CLI::IsMember({"all_unique", "quantile_grid"}));
    cmd->add_option("--grid-size", s.grid_size, "Candidates for quantile_grid")->check(CLI::PositiveNumber);
}

void add_mc_options(CLI::App* cmd, Settings& s) {
    cmd->add_option("--seed", s.seed, "Master seed");
    cmd->add_option("--replicates", s.replicates, "Monte-Carlo / bootstrap replicates (>= 100)")
        ->check(CLI::Range(std::size_t{100}, std::size_t{100000000}));
    cmd->add_option("--significance", s.significance, "Rejection level")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--threads", s.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    Settings s;
    CLI::App app{"Power-law tail analysis of peak-load series", "peakload"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;
    app.add_option("--config", config_path, "key = value file with default settings");

    auto* fit = app.add_subcommand("fit", "Select x_min, estimate alpha, optionally test and bootstrap");
    add_series_options(fit, s);
    add_output_options(fit, s);
    add_scan_options(fit, s);
    add_mc_options(fit, s);
    fit->add_flag("--gof", s.gof, "Monte-Carlo goodness-of-fit test");
    fit->add_flag("--ci", s.ci, "Bootstrap confidence intervals and CCDF band");
    fit->add_option("--ci-level", s.ci_level, "Confidence level")->check(CLI::Range(0.5, 1.0));
    fit->add_option("--band-grid", s.band_grid, "Comma-separated x values for the band");
    fit->add_option("--profile", s.profile_path, "Write the x_min scan profile CSV here");
    fit->add_option("--band", s.band_path, "Write the CCDF band CSV here");
    fit->add_option("--replicate-ds", s.replicate_ds_path, "Write replicate KS distances CSV here");

    auto* exceed = app.add_subcommand("exceed", "Probability that a peak meets or exceeds x");
    exceed->add_option("--fit", s.fit_path, "Fit report JSON")->required();
    exceed->add_option("-x,--x", s.x, "Load level")->required();
    add_output_options(exceed, s);

    auto* ccdf = app.add_subcommand("ccdf", "Empirical CCDF of a series");
    add_series_options(ccdf, s);
    add_output_options(ccdf, s);

    auto* aggregate = app.add_subcommand("aggregate", "Peak per calendar bucket of interval readings");
    add_series_options(aggregate, s);
    add_output_options(aggregate, s);

    auto* simulate = app.add_subcommand("simulate", "Draw a synthetic series with a power-law tail");
    simulate->add_option("--x-min", s.x_min, "Tail threshold")->check(CLI::PositiveNumber);
    simulate->add_option("--alpha", s.alpha, "Scaling exponent");
    simulate->add_option("-n,--count", s.count, "Number of values");
    simulate->add_option("--body-fraction", s.body_fraction, "Fraction drawn uniformly below x_min");
    simulate->add_option("--body-low", s.body_low, "Lower end of the uniform body (default x_min/2)");
    simulate->add_option("--seed", s.seed, "Seed");
    add_output_options(simulate, s);

    auto* compare = app.add_subcommand("compare", "Power law against alternative tail families");
    add_series_options(compare, s);
    add_output_options(compare, s);
    add_scan_options(compare, s);
    add_mc_options(compare, s);
    compare->add_option("--families", s.families, "Comma-separated families");

    // Settings precedence: command line > PEAKLOAD_* environment > config file.
    // Sources are concatenated lowest first; TakeLast keeps the winner.
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> merged;
    try {
        CLI::App* chosen = nullptr;
        std::size_t sub_pos = args.size();
        for (std::size_t i = 0; i < args.size(); ++i) {
            for (auto* sub : app.get_subcommands({})) {
                if (args[i] == sub->get_name()) {
                    chosen = sub;
                    sub_pos = i;
                    break;
                }
            }
            if (chosen) break;
        }
        for (std::size_t i = 0; i < sub_pos; ++i) {
            if (args[i] == "--config" && i + 1 < sub_pos) config_path = args[i + 1];
            if (args[i].starts_with("--config=")) config_path = args[i].substr(9);
        }
        if (config_path.empty()) {
            if (const char* env = std::getenv("PEAKLOAD_CONFIG")) config_path = env;
        }
        std::vector<std::string> defaults;
        if (chosen) {
            std::map<std::string, std::string> layered;
            if (!config_path.empty()) layered = read_config_file(config_path);
            for (const CLI::Option* opt : chosen->get_options()) {
                const std::string name = opt->get_single_name();
                if (name.empty() || name == "help") continue;
                if (const char* env = std::getenv(env_name(name).c_str())) layered[name] = env;
            }
            for (const auto& [key, value] : layered) {
                const std::string flag = (key.size() == 1 ? "-" : "--") + key;
                const CLI::Option* opt = chosen->get_option_no_throw(flag);
                if (!opt) continue;
                if (opt->get_expected_min() == 0) {
                    if (value == "1" || value == "true" || value == "yes" || value == "on") defaults.push_back(flag);
                } else {
                    defaults.push_back(flag);
                    defaults.push_back(value);
                }
            }
            merged.assign(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
            merged.insert(merged.end(), defaults.begin(), defaults.end());
            merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
        } else {
            merged = args;
        }
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (fit->parsed()) return cmd_fit(s);
        if (exceed->parsed()) return cmd_exceed(s);
        if (ccdf->parsed()) return cmd_ccdf(s);
        if (aggregate->parsed()) return cmd_aggregate(s);
        if (simulate->parsed()) return cmd_simulate(s);
        if (compare->parsed()) return cmd_compare(s);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == ErrorCode::BelowTail) return kExitDomain;
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
