#include "peakload/tailscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "peakload/error.hpp"

namespace peakload {
namespace {

constexpr std::string_view kModule = "tailscan";

/// Sorted sample split into distinct values. first[j] is the index of the first
/// occurrence of distinct value j in the ascending sort; first.back() == n.
struct DistinctSample {
    std::vector<double> value;
    std::vector<double> log_value;
    std::vector<std::size_t> first;
    std::vector<double> suffix_log;  ///< sum of ln x_i over sorted indices >= first[j]
    std::size_t n = 0;

    std::size_t distinct() const noexcept { return value.size(); }
    std::size_t tail_size(std::size_t j) const noexcept { return n - first[j]; }
};

DistinctSample prepare(std::vector<double> sorted) {
    DistinctSample s;
    s.n = sorted.size();
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t k = i;
        while (k < sorted.size() && sorted[k] == sorted[i]) ++k;
        s.value.push_back(sorted[i]);
        s.log_value.push_back(std::log(sorted[i]));
        s.first.push_back(i);
        i = k;
    }
    s.first.push_back(s.n);

    // Neumaier-compensated suffix sums keep the alpha denominators accurate
    // for short tails far from the origin.
    s.suffix_log.assign(s.distinct() + 1, 0.0);
    double sum = 0.0, comp = 0.0;
    for (std::size_t j = s.distinct(); j-- > 0;) {
        const double term = static_cast<double>(s.first[j + 1] - s.first[j]) * s.log_value[j];
        const double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        s.suffix_log[j] = sum + comp;
    }
    return s;
}

/// Log-sum of x_i / x_min over the tail starting at distinct index j.
double tail_log_ratio_sum(const DistinctSample& s, std::size_t j) {
    return s.suffix_log[j] - static_cast<double>(s.tail_size(j)) * s.log_value[j];
}

/// KS distance for the tail starting at distinct index `start`. Stops early
/// once the running maximum reaches `bound`.
double tail_ks(const DistinctSample& s, std::size_t start, double alpha, double bound) {
    const double m = static_cast<double>(s.tail_size(start));
    const double exponent = 1.0 - alpha;
    const double base = s.log_value[start];
    double d = 0.0;
    for (std::size_t j = start; j < s.distinct(); ++j) {
        const double model = std::exp(exponent * (s.log_value[j] - base));
        const double at_or_above = static_cast<double>(s.n - s.first[j]) / m;
        const double above = static_cast<double>(s.n - s.first[j + 1]) / m;
        d = std::max({d, std::abs(model - at_or_above), std::abs(model - above)});
        if (d >= bound) break;
    }
    return d;
}

std::vector<std::size_t> candidate_indices(const DistinctSample& s, const ScanOptions& options) {
    std::vector<std::size_t> admissible;
    for (std::size_t j = 0; j < s.distinct(); ++j) {
        if (s.tail_size(j) >= options.min_tail) admissible.push_back(j);
    }
    if (options.rule == CandidateRule::all_unique || admissible.size() <= options.grid_size) {
        return admissible;
    }
    const std::size_t g = std::max<std::size_t>(options.grid_size, 2);
    std::vector<std::size_t> grid;
    grid.reserve(g);
    const double step = static_cast<double>(admissible.size() - 1) / static_cast<double>(g - 1);
    for (std::size_t i = 0; i < g; ++i) {
        const auto pos = static_cast<std::size_t>(std::llround(step * static_cast<double>(i)));
        const std::size_t j = admissible[std::min(pos, admissible.size() - 1)];
        if (grid.empty() || grid.back() != j) grid.push_back(j);
    }
    return grid;
}

}  // namespace

std::string_view to_string(CandidateRule rule) noexcept {
    return rule == CandidateRule::all_unique ? "all_unique" : "quantile_grid";
}

CandidateRule candidate_rule_from_string(std::string_view name) {
    if (name == "all_unique") return CandidateRule::all_unique;
    if (name == "quantile_grid") return CandidateRule::quantile_grid;
    throw Error(ErrorCode::InvalidArgument, kModule, "unknown candidate rule '" + std::string(name) + "'");
}

double ks_distance(std::span<const double> tail_values, double x_min, double alpha) {
    if (tail_values.empty()) throw Error(ErrorCode::InsufficientTail, kModule, "tail is empty");
    if (!(alpha > 1.0)) throw Error(ErrorCode::InvalidAlpha, kModule, "alpha must be > 1");
    std::vector<double> sorted(tail_values.begin(), tail_values.end());
    std::sort(sorted.begin(), sorted.end());
    if (!(sorted.front() >= x_min)) {
        throw Error(ErrorCode::InvalidValue, kModule, "tail value below x_min");
    }
    const double m = static_cast<double>(sorted.size());
    const double exponent = 1.0 - alpha;
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t k = i;
        while (k < sorted.size() && sorted[k] == sorted[i]) ++k;
        const double model = std::pow(sorted[i] / x_min, exponent);
        const double at_or_above = static_cast<double>(sorted.size() - i) / m;
        const double above = static_cast<double>(sorted.size() - k) / m;
        d = std::max({d, std::abs(model - at_or_above), std::abs(model - above)});
        i = k;
    }
    return d;
}

double ks_distance_sorted(std::span<const double> sorted_tail, const std::function<double(double)>& survival) {
    if (sorted_tail.empty()) throw Error(ErrorCode::InsufficientTail, kModule, "tail is empty");
    const double m = static_cast<double>(sorted_tail.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_tail.size();) {
        std::size_t k = i;
        while (k < sorted_tail.size() && sorted_tail[k] == sorted_tail[i]) ++k;
        const double model = survival(sorted_tail[i]);
        const double at_or_above = static_cast<double>(sorted_tail.size() - i) / m;
        const double above = static_cast<double>(sorted_tail.size() - k) / m;
        d = std::max({d, std::abs(model - at_or_above), std::abs(model - above)});
        i = k;
    }
    return d;
}

ScanResult scan_xmin(std::span<const double> values, const ScanOptions& options) {
    if (options.min_tail < 10) {
        throw Error(ErrorCode::InvalidArgument, kModule, "min_tail must be at least 10");
    }
    if (values.size() < options.min_tail) {
        throw Error(ErrorCode::InsufficientData, kModule,
                    "series has " + std::to_string(values.size()) + " observations, fewer than min_tail = " +
                        std::to_string(options.min_tail));
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const DistinctSample s = prepare(std::move(sorted));

    ScanResult result;
    result.min_tail = options.min_tail;
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_j = s.distinct();
    double best_alpha = 0.0;

    for (std::size_t j : candidate_indices(s, options)) {
        const double log_sum = tail_log_ratio_sum(s, j);
        if (!(log_sum > 0.0)) continue;  // every tail value equals the candidate
        const double alpha = 1.0 + static_cast<double>(s.tail_size(j)) / log_sum;
        const double bound = options.keep_profile ? std::numeric_limits<double>::infinity() : best_d;
        const double d = tail_ks(s, j, alpha, bound);
        if (options.keep_profile) result.profile.push_back({s.value[j], alpha, d, s.tail_size(j)});
        if (d < best_d) {
            best_d = d;
            best_j = j;
            best_alpha = alpha;
        }
    }
    if (best_j == s.distinct()) {
        throw Error(ErrorCode::NoValidCandidate, kModule, "no candidate threshold yields a non-degenerate tail");
    }

    PowerLawFit& fit = result.best;
    fit.x_min = s.value[best_j];
    fit.alpha = best_alpha;
    fit.n_tail = s.tail_size(best_j);
    fit.n_total = s.n;
    fit.w = static_cast<double>(fit.n_tail) / static_cast<double>(fit.n_total);
    fit.ks_distance = best_d;
    return result;
}

ScanResult scan_xmin(const PeakSeries& series, const ScanOptions& options) {
    return scan_xmin(series.values(), options);
}

}  // namespace peakload
