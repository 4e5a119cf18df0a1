#include "peakload/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "peakload/csv.hpp"

namespace peakload {
namespace {

using namespace std::chrono;

constexpr std::string_view kModule = "ingest";

std::optional<int> parse_int(std::string_view text) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<std::size_t> column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
}

std::string missing_column_message(const std::string& name) {
    return "header has no column named '" + name + "'";
}

}  // namespace

std::string_view to_string(RejectReason reason) noexcept {
    switch (reason) {
        case RejectReason::MissingField: return "MissingField";
        case RejectReason::BadTimestamp: return "BadTimestamp";
        case RejectReason::BadValue: return "BadValue";
        case RejectReason::NonFinite: return "NonFinite";
        case RejectReason::Negative: return "Negative";
    }
    return "Unknown";
}

QualityError::QualityError(std::size_t accepted, std::size_t rejected, std::vector<RejectedRow> rejects)
    : Error(ErrorCode::QualityError, kModule,
            std::to_string(rejected) + " of " + std::to_string(accepted + rejected) + " rows rejected"),
      accepted_(accepted),
      rejected_(rejected),
      rejects_(std::move(rejects)) {}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    text = trim(text);
    if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    const auto y = parse_int(text.substr(0, 4));
    const auto mo = parse_int(text.substr(5, 2));
    const auto d = parse_int(text.substr(8, 2));
    if (!y || !mo || !d) return std::nullopt;
    const year_month_day date{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;

    int hh = 0, mm = 0, ss = 0;
    if (text.size() > 10) {
        if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
        const auto time = text.substr(11);
        if (time.size() != 5 && time.size() != 8) return std::nullopt;
        if (time[2] != ':' || (time.size() == 8 && time[5] != ':')) return std::nullopt;
        const auto h = parse_int(time.substr(0, 2));
        const auto m = parse_int(time.substr(3, 2));
        const auto s = time.size() == 8 ? parse_int(time.substr(6, 2)) : std::optional<int>(0);
        if (!h || !m || !s || *h < 0 || *h > 23 || *m < 0 || *m > 59 || *s < 0 || *s > 59) return std::nullopt;
        hh = *h;
        mm = *m;
        ss = *s;
    }
    return Timestamp{sys_days{date}.time_since_epoch() + hours{hh} + minutes{mm} + seconds{ss}};
}

std::string format_timestamp(Timestamp ts) {
    const auto day_start = floor<days>(ts);
    const year_month_day date{day_start};
    const hh_mm_ss<seconds> time{ts - day_start};
    char buf[64];
    if (time.seconds().count() == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld", static_cast<int>(date.year()),
                      static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                      static_cast<long>(time.hours().count()), static_cast<long>(time.minutes().count()));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld", static_cast<int>(date.year()),
                      static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                      static_cast<long>(time.hours().count()), static_cast<long>(time.minutes().count()),
                      static_cast<long>(time.seconds().count()));
    }
    return buf;
}

ParseResult parse_csv(std::istream& source, const CsvSchema& schema) {
    std::string line;
    std::size_t line_number = 0;
    std::vector<std::string> header;
    while (std::getline(source, line)) {
        ++line_number;
        if (!trim(line).empty()) {
            header = split_csv_line(line, schema.delimiter);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::SchemaError, kModule, "input has no header row");
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

    const auto ts_col = column_index(header, schema.timestamp_column);
    if (!ts_col) throw Error(ErrorCode::SchemaError, kModule, missing_column_message(schema.timestamp_column));
    const auto value_col = column_index(header, schema.value_column);
    if (!value_col) throw Error(ErrorCode::SchemaError, kModule, missing_column_message(schema.value_column));
    std::optional<std::size_t> meter_col;
    if (schema.meter_column) {
        meter_col = column_index(header, *schema.meter_column);
        if (!meter_col) throw Error(ErrorCode::SchemaError, kModule, missing_column_message(*schema.meter_column));
    }
    const std::size_t needed = std::max({*ts_col, *value_col, meter_col.value_or(0)}) + 1;

    ParseResult result;
    while (std::getline(source, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line, schema.delimiter);
        auto reject = [&](RejectReason r) { result.rejects.push_back({line_number, r}); };

        if (fields.size() < needed || fields[*ts_col].empty() || fields[*value_col].empty() ||
            (meter_col && fields[*meter_col].empty())) {
            reject(RejectReason::MissingField);
            continue;
        }

        std::optional<Timestamp> ts;
        if (schema.timestamp_format == TimestampFormat::iso8601) {
            ts = parse_iso8601(fields[*ts_col]);
        } else if (const auto epoch = parse_double(fields[*ts_col]); epoch && std::isfinite(*epoch)) {
            ts = Timestamp{seconds{static_cast<long long>(std::floor(*epoch))}};
        }
        if (!ts) {
            reject(RejectReason::BadTimestamp);
            continue;
        }

        const auto value = parse_double(fields[*value_col]);
        if (!value) {
            reject(RejectReason::BadValue);
            continue;
        }
        if (!std::isfinite(*value)) {
            reject(RejectReason::NonFinite);
            continue;
        }
        if (*value < 0.0) {
            reject(RejectReason::Negative);
            continue;
        }

        IntervalRecord rec{*ts, *value, std::nullopt};
        if (meter_col) rec.meter_id = fields[*meter_col];
        result.records.push_back(std::move(rec));
    }

    const std::size_t total = result.records.size() + result.rejects.size();
    if (total > 0 && static_cast<double>(result.rejects.size()) >
                         schema.max_reject_fraction * static_cast<double>(total)) {
        throw QualityError(result.records.size(), result.rejects.size(), result.rejects);
    }
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const IntervalRecord& a, const IntervalRecord& b) { return a.timestamp < b.timestamp; });
    return result;
}

Timestamp bucket_start(Timestamp ts, Frame frame) {
    switch (frame) {
        case Frame::hourly: return floor<hours>(ts);
        case Frame::daily: return floor<days>(ts);
        case Frame::weekly: {
            const sys_days day = floor<days>(ts);
            // Monday is the first day of the week.
            const auto since_monday = (weekday{day} - Monday).count();
            return Timestamp{sys_days{day - days{since_monday}}};
        }
        case Frame::monthly: {
            const year_month_day ymd{floor<days>(ts)};
            return Timestamp{sys_days{ymd.year() / ymd.month() / 1}};
        }
        case Frame::yearly: {
            const year_month_day ymd{floor<days>(ts)};
            return Timestamp{sys_days{ymd.year() / January / 1}};
        }
        case Frame::raw: return ts;
    }
    return ts;
}

Timestamp next_bucket_start(Timestamp start, Frame frame) {
    switch (frame) {
        case Frame::hourly: return start + hours{1};
        case Frame::daily: return start + days{1};
        case Frame::weekly: return start + days{7};
        case Frame::monthly: {
            const year_month_day ymd{floor<days>(start)};
            return Timestamp{sys_days{(ymd.year() / ymd.month() / 1) + months{1}}};
        }
        case Frame::yearly: {
            const year_month_day ymd{floor<days>(start)};
            return Timestamp{sys_days{(ymd.year() + years{1}) / January / 1}};
        }
        case Frame::raw: return start + seconds{1};
    }
    return start;
}

AggregationResult aggregate_peaks(const std::vector<IntervalRecord>& records, const AggregateOptions& options) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, kModule, "no interval records");
    if (options.frame == Frame::raw) {
        throw Error(ErrorCode::InvalidArgument, kModule, "aggregation needs a calendar frame");
    }
    if (!(options.min_coverage >= 0.0 && options.min_coverage <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, kModule, "min_coverage must lie in [0, 1]");
    }

    // Per instant and meter keep the largest reading, then combine meters.
    std::map<Timestamp, std::map<std::string, double>> by_instant;
    for (const auto& r : records) {
        auto& slot = by_instant[r.timestamp];
        const std::string meter = r.meter_id.value_or(std::string{});
        const auto [it, inserted] = slot.emplace(meter, r.value);
        if (!inserted) it->second = std::max(it->second, r.value);
    }
    std::vector<std::pair<Timestamp, double>> load;
    load.reserve(by_instant.size());
    for (const auto& [ts, meters] : by_instant) {
        double v = 0.0;
        for (const auto& [meter, reading] : meters) v = options.sum_meters ? v + reading : std::max(v, reading);
        load.emplace_back(ts, v);
    }

    seconds interval{0};
    if (options.interval) {
        interval = *options.interval;
    } else if (load.size() > 1) {
        std::vector<seconds> gaps;
        for (std::size_t i = 1; i < load.size(); ++i) gaps.push_back(load[i].first - load[i - 1].first);
        std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
        interval = gaps[gaps.size() / 2];
    }

    std::vector<double> peaks;
    std::vector<Timestamp> starts;
    std::vector<SkippedBucket> skipped;
    for (std::size_t i = 0; i < load.size();) {
        const Timestamp start = bucket_start(load[i].first, options.frame);
        const Timestamp end = next_bucket_start(start, options.frame);
        double peak = load[i].second;
        std::size_t count = 0;
        while (i < load.size() && load[i].first < end) {
            peak = std::max(peak, load[i].second);
            ++count;
            ++i;
        }
        const double expected = interval.count() > 0
                                    ? static_cast<double>((end - start).count()) / static_cast<double>(interval.count())
                                    : 1.0;
        if (static_cast<double>(count) + 1e-9 < options.min_coverage * expected || !(peak > 0.0)) {
            skipped.push_back({start, count, expected});
            continue;
        }
        peaks.push_back(peak);
        starts.push_back(start);
    }
    if (peaks.empty()) {
        throw Error(ErrorCode::NoCompleteBuckets, kModule,
                    "all " + std::to_string(skipped.size()) + " buckets fall below the coverage threshold");
    }
    return {PeakSeries(std::move(peaks), std::move(starts), options.frame), std::move(skipped)};
}

PeakSeries apply_window(const PeakSeries& series, const WindowSpec& window) {
    if (!series.has_timestamps()) {
        throw Error(ErrorCode::NoTimestamps, kModule, "windowing needs a timestamped series");
    }
    if (window.length.count() <= 0) throw Error(ErrorCode::InvalidArgument, kModule, "window length must be > 0");

    const auto& ts = *series.timestamps();
    const Timestamp anchor =
        window.anchor.value_or(series.frame() == Frame::raw ? ts.back() : next_bucket_start(ts.back(), series.frame()));
    const Timestamp earliest = anchor - window.length;

    std::vector<double> values;
    std::vector<Timestamp> kept;
    const auto v = series.values();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] >= earliest && ts[i] <= anchor) {
            values.push_back(v[i]);
            kept.push_back(ts[i]);
        }
    }
    if (values.empty()) throw Error(ErrorCode::EmptyInput, kModule, "window contains no observations");
    return PeakSeries(std::move(values), std::move(kept), series.frame());
}

void write_peak_csv(std::ostream& out, const PeakSeries& series) {
    out << "bucket_start,peak\n";
    const auto v = series.values();
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        out << (series.has_timestamps() ? format_timestamp((*series.timestamps())[i]) : std::to_string(i)) << ','
            << buf << '\n';
    }
}

void write_rejects_csv(std::ostream& out, const std::vector<RejectedRow>& rejects) {
    out << "row_number,reason\n";
    for (const auto& r : rejects) out << r.row_number << ',' << to_string(r.reason) << '\n';
}

}  // namespace peakload
