#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "peakload/ccdf.hpp"
#include "peakload/gof.hpp"
#include "peakload/rng.hpp"

namespace peakload {

enum class Family { exponential, lognormal, gamma };

std::string_view to_string(Family family) noexcept;
Family family_from_string(std::string_view name);

/// Left-truncated competitor model. Parameters are in load units:
///   exponential: {rate}
///   lognormal:   {log_mean, log_sd}
///   gamma:       {shape, scale}
/// The model survival is S(x) = w * S_family(x) / S_family(x_min) for x >= x_min.
struct AltFit {
    Family family = Family::exponential;
    std::vector<double> params;
    double x_min = 1.0;
    double w = 1.0;
    double ks_distance = 0.0;
    std::size_t n_tail = 0;
    std::size_t n_total = 0;
    double log_likelihood = 0.0;
};

/// log S_family(x) for the untruncated family.
double family_log_survival(Family family, std::span<const double> params, double x);

/// Survival of the truncated model (includes w). Throws BelowTail for x < x_min.
double alt_tail_ccdf(const AltFit& fit, double x);

/// Log-likelihood of `tail_values` under the family left-truncated at x_min.
double truncated_log_likelihood(Family family, std::span<const double> params, std::span<const double> tail_values,
                                double x_min);

/// Maximum-likelihood fit of the truncated family to values >= x_min. The
/// exponential has a closed form; lognormal and gamma are maximized by a
/// box-constrained quasi-Newton search on log-scale parameters with several
/// moment-based starts. The KS distance uses the same edge-exact rule as the
/// power-law scan. w is 1 and n_total equals the tail size; use
/// fit_alt_series to attach the series-level W.
AltFit fit_alt(std::span<const double> tail_values, double x_min, Family family);

/// Fits the family to the part of `series` at or above x_min and sets
/// w = n_tail / N.
AltFit fit_alt_series(const PeakSeries& series, double x_min, Family family);

/// One variate from the truncated family, by inverse transform.
double sample_truncated(Family family, std::span<const double> params, double x_min, Rng& rng);

/// Monte-Carlo goodness-of-fit for a competitor family at fixed x_min. Each
/// replicate builds a semi-parametric sample like gof_pvalue, refits the
/// family parameters on its tail and records the KS distance.
GofResult gof_alt(const PeakSeries& series, const AltFit& fit, const GofOptions& options);

}  // namespace peakload
