#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "peakload/rng.hpp"

namespace peakload {

struct CiReport;

/// Fitted tail model S(x) = w * (x / x_min)^-(alpha - 1) for x >= x_min.
struct PowerLawFit {
    double x_min = 1.0;
    double alpha = 2.0;
    double w = 1.0;  ///< empirical survival at x_min, n_tail / n_total
    std::size_t n_tail = 0;
    double ks_distance = 0.0;
    std::size_t n_total = 0;

    /// Fit with given parameters and W supplied directly (n_tail/n_total left at 0).
    static PowerLawFit from_parameters(double x_min, double alpha, double w);

    /// Throws InvalidAlpha / InvalidValue if an invariant is broken.
    void validate() const;
};

/// Continuous power-law maximum-likelihood exponent for values >= x_min:
/// alpha = 1 + n / sum(ln(x_i / x_min)).
double mle_alpha(std::span<const double> tail_values, double x_min);

/// Model survival at x. Throws BelowTail when x < x_min.
double tail_ccdf(const PowerLawFit& fit, double x);

/// Model density at x. Throws BelowTail when x < x_min.
double tail_pdf(const PowerLawFit& fit, double x);

/// Inverse transform: x_min * (1 - u)^(-1 / (alpha - 1)) for u in [0, 1).
double tail_quantile(double x_min, double alpha, double u);

std::vector<double> sample_tail(double x_min, double alpha, std::size_t count, Rng& rng);

struct Exceedance {
    double probability;
    std::optional<std::pair<double, double>> interval;
};

/// P(peak >= x) from the tail model, plus the pointwise band at x when `ci`
/// carries one. Sub-threshold queries throw BelowTail; those must go through
/// the empirical CCDF instead.
Exceedance exceedance_query(const PowerLawFit& fit, double x, const CiReport* ci = nullptr);

}  // namespace peakload
