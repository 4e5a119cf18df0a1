#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace peakload {

/// Civil (wall-clock) instant at second resolution. No time zone is attached;
/// calendar bucketing treats it as local time.
using Timestamp = std::chrono::sys_seconds;

enum class Frame { hourly, daily, weekly, monthly, yearly, raw };

std::string_view to_string(Frame frame) noexcept;
Frame frame_from_string(std::string_view name);

/// Peak observations for one feeder and one aggregation frame.
///
/// Values are strictly positive and finite. When timestamps are present they
/// are strictly increasing and aligned 1:1 with the values.
class PeakSeries {
public:
    explicit PeakSeries(std::vector<double> values, Frame frame = Frame::raw);
    PeakSeries(std::vector<double> values, std::vector<Timestamp> timestamps, Frame frame);

    std::span<const double> values() const noexcept { return values_; }
    const std::optional<std::vector<Timestamp>>& timestamps() const noexcept { return timestamps_; }
    bool has_timestamps() const noexcept { return timestamps_.has_value(); }
    Frame frame() const noexcept { return frame_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<double> values_;
    std::optional<std::vector<Timestamp>> timestamps_;
    Frame frame_;
};

struct CcdfPoint {
    double value;
    double survival;
    std::size_t frequency;
};

/// Empirical survival function S(x) = #{x_i >= x} / N over distinct values.
/// Points are stored with the largest value first.
class EmpiricalCcdf {
public:
    std::span<const CcdfPoint> points() const noexcept { return points_; }
    std::size_t total() const noexcept { return total_; }

    /// Step evaluation of #{x_i >= x} / N for any finite x.
    double survival_at(double x) const;

private:
    friend EmpiricalCcdf build_empirical_ccdf(std::span<const double> values);

    std::vector<CcdfPoint> points_;
    std::size_t total_ = 0;
};

EmpiricalCcdf build_empirical_ccdf(std::span<const double> values);
EmpiricalCcdf build_empirical_ccdf(const PeakSeries& series);

inline double survival_at(const EmpiricalCcdf& ccdf, double x) { return ccdf.survival_at(x); }

}  // namespace peakload
