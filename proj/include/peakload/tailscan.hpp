#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "peakload/ccdf.hpp"
#include "peakload/powerlaw.hpp"

namespace peakload {

enum class CandidateRule { all_unique, quantile_grid };

std::string_view to_string(CandidateRule rule) noexcept;
CandidateRule candidate_rule_from_string(std::string_view name);

struct ProfileEntry {
    double x_min;
    double alpha;
    double ks_distance;
    std::size_t n_tail;
};

struct ScanOptions {
    std::size_t min_tail = 10;
    CandidateRule rule = CandidateRule::all_unique;
    std::size_t grid_size = 512;  ///< candidate count for quantile_grid
    /// When false the per-candidate profile is not recorded, which lets the KS
    /// evaluation of a candidate stop as soon as it can no longer win. The
    /// selected fit is identical either way.
    bool keep_profile = true;
};

struct ScanResult {
    PowerLawFit best;
    std::vector<ProfileEntry> profile;  ///< ascending in x_min
    std::size_t min_tail = 10;
};

/// Exact sup-norm distance between the empirical CCDF of `tail_values` and the
/// unit-mass power law (W = 1) above x_min. Both sides of every step are
/// evaluated, so the result is the true supremum over x >= x_min.
double ks_distance(std::span<const double> tail_values, double x_min, double alpha);

/// Same edge-exact KS rule against an arbitrary model survival function.
/// `sorted_tail` must be ascending; `survival` maps x to the model's unit-mass
/// survival probability.
double ks_distance_sorted(std::span<const double> sorted_tail, const std::function<double(double)>& survival);

/// Chooses x_min by minimizing the KS distance over candidate thresholds. Each
/// candidate truncates the data, fits alpha by maximum likelihood and scores
/// the truncated sample. Ties go to the smallest x_min.
ScanResult scan_xmin(std::span<const double> values, const ScanOptions& options = {});
ScanResult scan_xmin(const PeakSeries& series, const ScanOptions& options = {});

}  // namespace peakload
