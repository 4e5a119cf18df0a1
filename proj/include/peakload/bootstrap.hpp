#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "peakload/ccdf.hpp"
#include "peakload/error.hpp"
#include "peakload/powerlaw.hpp"
#include "peakload/tailscan.hpp"

namespace peakload {

using Interval = std::pair<double, double>;

struct BandPoint {
    double x;
    double low;
    double high;
    std::optional<double> point;  ///< tail model at x; empty below the fitted x_min
};

struct ReplicateFit {
    double x_min;
    double alpha;
    double w;
};

struct CiReport {
    double level = 0.95;
    Interval xmin_interval{0.0, 0.0};
    Interval alpha_interval{0.0, 0.0};
    std::vector<BandPoint> band;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<ReplicateFit> replicate_fits;  ///< successful replicates only
    std::size_t degenerate_replicates = 0;

    /// Band at x: the stored grid point when x is on the grid, otherwise the
    /// percentile pair of the replicate curves when every replicate's x_min is
    /// at or below x. Empty when neither applies.
    std::optional<Interval> band_at(double x, double point_estimate) const;
};

struct BootstrapOptions {
    std::size_t replicates = 2500;
    double level = 0.95;
    std::vector<double> band_grid;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    ScanOptions scan{};
};

/// Raised when more than 20% of resamples cannot be fitted. Carries the report
/// assembled from the replicates that did succeed.
class UnstableBootstrapError : public Error {
public:
    UnstableBootstrapError(const std::string& message, CiReport partial);
    const CiReport& partial() const noexcept { return partial_; }

private:
    CiReport partial_;
};

/// Nearest-rank percentile interval: the ceil(R(1-level)/2)-th and
/// ceil(R(1+level)/2)-th order statistics (1-based).
Interval percentile_interval(std::vector<double> values, double level);

/// Nonparametric bootstrap of the scan_xmin fit. Every replicate resamples N
/// values with replacement and refits. Band curves use the replicate's tail
/// model where x >= its x_min and the replicate's empirical survival below.
CiReport bootstrap_ci(const PeakSeries& series, const BootstrapOptions& options);

}  // namespace peakload
