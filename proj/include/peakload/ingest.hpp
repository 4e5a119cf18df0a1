#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peakload/ccdf.hpp"
#include "peakload/error.hpp"

namespace peakload {

struct IntervalRecord {
    Timestamp timestamp;
    double value = 0.0;
    std::optional<std::string> meter_id;
};

enum class TimestampFormat { iso8601, epoch_seconds };

struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::string value_column = "value";
    std::optional<std::string> meter_column;
    TimestampFormat timestamp_format = TimestampFormat::iso8601;
    char delimiter = ',';
    double max_reject_fraction = 0.10;
};

enum class RejectReason { MissingField, BadTimestamp, BadValue, NonFinite, Negative };

std::string_view to_string(RejectReason reason) noexcept;

struct RejectedRow {
    std::size_t row_number;  ///< 1-based line number in the source, header is line 1
    RejectReason reason;
};

struct ParseResult {
    std::vector<IntervalRecord> records;  ///< sorted by timestamp, stable for ties
    std::vector<RejectedRow> rejects;
};

/// Raised when the share of rejected rows exceeds the schema's limit.
class QualityError : public Error {
public:
    QualityError(std::size_t accepted, std::size_t rejected, std::vector<RejectedRow> rejects);
    std::size_t accepted() const noexcept { return accepted_; }
    std::size_t rejected() const noexcept { return rejected_; }
    const std::vector<RejectedRow>& rejects() const noexcept { return rejects_; }

private:
    std::size_t accepted_;
    std::size_t rejected_;
    std::vector<RejectedRow> rejects_;
};

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM" or "YYYY-MM-DDTHH:MM:SS" (a space
/// may replace the T, a trailing Z is ignored).
std::optional<Timestamp> parse_iso8601(std::string_view text);
std::string format_timestamp(Timestamp ts);

ParseResult parse_csv(std::istream& source, const CsvSchema& schema);

struct AggregateOptions {
    Frame frame = Frame::daily;
    bool sum_meters = true;
    double min_coverage = 0.9;
    /// Sampling interval of the meters. Inferred as the median spacing of
    /// distinct timestamps when absent.
    std::optional<std::chrono::seconds> interval;
};

struct SkippedBucket {
    Timestamp bucket_start;
    std::size_t readings;
    double expected;
};

struct AggregationResult {
    PeakSeries series;
    std::vector<SkippedBucket> skipped;
};

Timestamp bucket_start(Timestamp ts, Frame frame);
Timestamp next_bucket_start(Timestamp start, Frame frame);

/// Calendar-bucket peaks. With sum_meters the readings of different meters at
/// the same instant are summed before the bucket maximum is taken (coincident
/// peak); otherwise the bucket peak is the largest single reading. Repeated
/// readings of one meter at one instant (a repeated DST hour) collapse to
/// their maximum. Buckets with fewer than min_coverage x expected readings are
/// left out and listed in `skipped`.
AggregationResult aggregate_peaks(const std::vector<IntervalRecord>& records, const AggregateOptions& options);

struct WindowSpec {
    std::chrono::seconds length = std::chrono::days(730);
    /// Defaults to the end of the data: the end of the latest observation's
    /// bucket for calendar frames, the latest timestamp for raw series.
    std::optional<Timestamp> anchor;
};

/// Keeps observations with anchor - length <= t <= anchor.
PeakSeries apply_window(const PeakSeries& series, const WindowSpec& window);

void write_peak_csv(std::ostream& out, const PeakSeries& series);
void write_rejects_csv(std::ostream& out, const std::vector<RejectedRow>& rejects);

}  // namespace peakload
