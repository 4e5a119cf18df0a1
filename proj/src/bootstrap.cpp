#include "peakload/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peakload/parallel.hpp"
#include "peakload/rng.hpp"

namespace peakload {
namespace {

constexpr std::string_view kModule = "bootstrap";

std::size_t nearest_rank(double p, std::size_t count) {
    // The epsilon keeps products like 0.05 * 100 = 5.000000000000001 on rank 5.
    const double r = std::ceil(p * static_cast<double>(count) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, count);
}

double curve_value(const ReplicateFit& f, double x) { return f.w * std::pow(x / f.x_min, 1.0 - f.alpha); }

Interval widen_to_contain(Interval band, std::optional<double> point) {
    if (point) {
        band.first = std::min(band.first, *point);
        band.second = std::max(band.second, *point);
    }
    return band;
}

struct ReplicateOutcome {
    std::optional<ReplicateFit> fit;
    std::vector<double> curve;  ///< one value per band grid point
};

}  // namespace

UnstableBootstrapError::UnstableBootstrapError(const std::string& message, CiReport partial)
    : Error(ErrorCode::UnstableBootstrap, kModule, message), partial_(std::move(partial)) {}

Interval percentile_interval(std::vector<double> values, double level) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, kModule, "no values to take percentiles of");
    std::sort(values.begin(), values.end());
    const std::size_t lo = nearest_rank((1.0 - level) / 2.0, values.size());
    const std::size_t hi = nearest_rank((1.0 + level) / 2.0, values.size());
    return {values[lo - 1], values[hi - 1]};
}

std::optional<Interval> CiReport::band_at(double x, double point_estimate) const {
    for (const auto& b : band) {
        if (b.x == x) return Interval{b.low, b.high};
    }
    if (replicate_fits.empty()) return std::nullopt;
    std::vector<double> curves;
    curves.reserve(replicate_fits.size());
    for (const auto& f : replicate_fits) {
        if (x < f.x_min) return std::nullopt;
        curves.push_back(curve_value(f, x));
    }
    return widen_to_contain(percentile_interval(std::move(curves), level), point_estimate);
}

CiReport bootstrap_ci(const PeakSeries& series, const BootstrapOptions& options) {
    if (options.replicates < 100) {
        throw Error(ErrorCode::TooFewReplicates, kModule,
                    "at least 100 replicates are required, got " + std::to_string(options.replicates));
    }
    if (!(options.level > 0.5 && options.level < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, kModule, "level must lie in (0.5, 1)");
    }
    for (double x : options.band_grid) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw Error(ErrorCode::InvalidValue, kModule, "band grid points must be positive and finite");
        }
    }

    const auto values = series.values();
    const std::size_t n = values.size();
    const PowerLawFit point_fit = scan_xmin(values, options.scan).best;

    ScanOptions scan = options.scan;
    scan.keep_profile = false;
    const auto& grid = options.band_grid;

    const auto outcomes = run_indexed<ReplicateOutcome>(options.replicates, options.threads, [&](std::size_t i) {
        Rng rng(derive_seed(options.seed, i));
        std::vector<double> resample(n);
        for (double& x : resample) x = values[rng.below(n)];

        ReplicateOutcome out;
        try {
            const PowerLawFit f = scan_xmin(resample, scan).best;
            out.fit = ReplicateFit{f.x_min, f.alpha, f.w};
        } catch (const Error&) {
            return out;
        }
        std::sort(resample.begin(), resample.end());
        out.curve.reserve(grid.size());
        for (double x : grid) {
            if (x >= out.fit->x_min) {
                out.curve.push_back(curve_value(*out.fit, x));
            } else {
                const auto below = std::lower_bound(resample.begin(), resample.end(), x) - resample.begin();
                out.curve.push_back(static_cast<double>(n - static_cast<std::size_t>(below)) /
                                    static_cast<double>(n));
            }
        }
        return out;
    });

    CiReport report;
    report.level = options.level;
    report.replicates = options.replicates;
    report.seed = options.seed;

    std::vector<double> xmins, alphas;
    for (const auto& o : outcomes) {
        if (!o.fit) {
            ++report.degenerate_replicates;
            continue;
        }
        report.replicate_fits.push_back(*o.fit);
        xmins.push_back(o.fit->x_min);
        alphas.push_back(o.fit->alpha);
    }

    if (!xmins.empty()) {
        report.xmin_interval = percentile_interval(xmins, options.level);
        report.alpha_interval = percentile_interval(alphas, options.level);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::vector<double> column;
            column.reserve(xmins.size());
            for (const auto& o : outcomes) {
                if (o.fit) column.push_back(o.curve[g]);
            }
            std::optional<double> point;
            if (grid[g] >= point_fit.x_min) point = tail_ccdf(point_fit, grid[g]);
            const Interval band = widen_to_contain(percentile_interval(std::move(column), options.level), point);
            report.band.push_back({grid[g], band.first, band.second, point});
        }
    }

    if (static_cast<double>(report.degenerate_replicates) > 0.2 * static_cast<double>(options.replicates)) {
        throw UnstableBootstrapError(std::to_string(report.degenerate_replicates) + " of " +
                                         std::to_string(options.replicates) + " resamples could not be fitted",
                                     std::move(report));
    }
    return report;
}

}  // namespace peakload
