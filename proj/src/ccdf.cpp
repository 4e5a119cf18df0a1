#include "peakload/ccdf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peakload/error.hpp"

namespace peakload {
namespace {

constexpr std::string_view kModule = "ccdf";

void validate_values(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, kModule, "series is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] <= 0.0) {
            throw Error(ErrorCode::InvalidValue, kModule,
                        "value at index " + std::to_string(i) + " is not positive and finite");
        }
    }
}

}  // namespace

std::string_view to_string(Frame frame) noexcept {
    switch (frame) {
        case Frame::hourly: return "hourly";
        case Frame::daily: return "daily";
        case Frame::weekly: return "weekly";
        case Frame::monthly: return "monthly";
        case Frame::yearly: return "yearly";
        case Frame::raw: return "raw";
    }
    return "raw";
}

Frame frame_from_string(std::string_view name) {
    for (Frame f : {Frame::hourly, Frame::daily, Frame::weekly, Frame::monthly, Frame::yearly, Frame::raw}) {
        if (to_string(f) == name) return f;
    }
    throw Error(ErrorCode::InvalidArgument, kModule, "unknown frame '" + std::string(name) + "'");
}

PeakSeries::PeakSeries(std::vector<double> values, Frame frame) : values_(std::move(values)), frame_(frame) {
    validate_values(values_);
}

PeakSeries::PeakSeries(std::vector<double> values, std::vector<Timestamp> timestamps, Frame frame)
    : values_(std::move(values)), timestamps_(std::move(timestamps)), frame_(frame) {
    validate_values(values_);
    if (timestamps_->size() != values_.size()) {
        throw Error(ErrorCode::InvalidArgument, kModule, "timestamps and values differ in length");
    }
    for (std::size_t i = 1; i < timestamps_->size(); ++i) {
        if ((*timestamps_)[i] <= (*timestamps_)[i - 1]) {
            throw Error(ErrorCode::InvalidArgument, kModule,
                        "timestamps not strictly increasing at index " + std::to_string(i));
        }
    }
}

EmpiricalCcdf build_empirical_ccdf(std::span<const double> values) {
    validate_values(values);

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    EmpiricalCcdf ccdf;
    ccdf.total_ = sorted.size();
    const auto n = static_cast<double>(sorted.size());
    std::size_t cumulative = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        cumulative += j - i;
        ccdf.points_.push_back({sorted[i], static_cast<double>(cumulative) / n, j - i});
        i = j;
    }
    // cumulative == N here, so the smallest value maps to exactly 1.
    return ccdf;
}

EmpiricalCcdf build_empirical_ccdf(const PeakSeries& series) { return build_empirical_ccdf(series.values()); }

double EmpiricalCcdf::survival_at(double x) const {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidValue, kModule, "query point is not finite");
    // points_ is sorted descending; find the last point with value >= x.
    auto it = std::partition_point(points_.begin(), points_.end(),
                                   [x](const CcdfPoint& p) { return p.value >= x; });
    if (it == points_.begin()) return 0.0;
    return std::prev(it)->survival;
}

}  // namespace peakload
