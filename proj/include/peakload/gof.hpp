#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "peakload/ccdf.hpp"
#include "peakload/powerlaw.hpp"
#include "peakload/rng.hpp"
#include "peakload/tailscan.hpp"

namespace peakload {

struct GofResult {
    double p_value = 0.0;
    std::size_t replicates = 0;
    double observed_d = 0.0;
    std::vector<double> replicate_ds;  ///< in replicate-index order
    double significance = 0.10;
    bool reject = false;
    std::uint64_t seed = 0;
    std::size_t failed_replicates = 0;  ///< replicates whose refit failed; scored as D = 1
};

struct GofOptions {
    std::size_t replicates = 2500;
    std::uint64_t seed = 0;
    double significance = 0.10;
    unsigned threads = 1;
    ScanOptions scan{};  ///< refit settings; keep_profile is ignored
};

/// Outcome of one Monte-Carlo replicate.
struct ReplicateDistance {
    double d = 1.0;
    bool failed = false;
};

/// Shared Monte-Carlo machinery: runs `replicate(rng)` once per replicate with
/// a derived per-replicate seed and converts the distances into a p-value
/// p = #{D_sim >= D_obs} / R. Rejection uses the strict rule p < significance.
GofResult monte_carlo_gof(double observed_d, const GofOptions& options,
                          const std::function<ReplicateDistance(Rng&)>& replicate);

/// Monte-Carlo goodness-of-fit test of a power-law tail fit. Each replicate
/// draws N points: with probability n_tail / N a fresh power-law variate,
/// otherwise a uniform pick among the observed values below x_min. The
/// replicate is refit with scan_xmin and its KS distance recorded.
GofResult gof_pvalue(const PeakSeries& series, const PowerLawFit& fit, const GofOptions& options);

/// Draws one semi-parametric synthetic sample. `body` holds the observed
/// values below x_min; `tail_draw` produces one tail variate.
std::vector<double> semiparametric_sample(std::size_t n, double tail_probability, std::span<const double> body,
                                          const std::function<double(Rng&)>& tail_draw, Rng& rng);

}  // namespace peakload
