#include "peakload/gof.hpp"

#include <algorithm>
#include <string>

#include "peakload/error.hpp"
#include "peakload/parallel.hpp"

namespace peakload {
namespace {

constexpr std::string_view kModule = "gof";

}  // namespace

GofResult monte_carlo_gof(double observed_d, const GofOptions& options,
                          const std::function<ReplicateDistance(Rng&)>& replicate) {
    if (options.replicates < 100) {
        throw Error(ErrorCode::TooFewReplicates, kModule,
                    "at least 100 replicates are required, got " + std::to_string(options.replicates));
    }
    if (!(options.significance > 0.0 && options.significance < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, kModule, "significance must lie in (0, 1)");
    }

    const auto outcomes = run_indexed<ReplicateDistance>(options.replicates, options.threads, [&](std::size_t i) {
        Rng rng(derive_seed(options.seed, i));
        return replicate(rng);
    });

    GofResult result;
    result.replicates = options.replicates;
    result.observed_d = observed_d;
    result.significance = options.significance;
    result.seed = options.seed;
    result.replicate_ds.reserve(outcomes.size());
    std::size_t extreme = 0;
    for (const auto& o : outcomes) {
        result.replicate_ds.push_back(o.d);
        if (o.failed) ++result.failed_replicates;
        if (o.d >= observed_d) ++extreme;
    }
    result.p_value = static_cast<double>(extreme) / static_cast<double>(options.replicates);
    result.reject = result.p_value < options.significance;
    return result;
}

std::vector<double> semiparametric_sample(std::size_t n, double tail_probability, std::span<const double> body,
                                          const std::function<double(Rng&)>& tail_draw, Rng& rng) {
    std::vector<double> sample(n);
    for (double& x : sample) {
        if (body.empty() || rng.uniform() < tail_probability) {
            x = tail_draw(rng);
        } else {
            x = body[rng.below(body.size())];
        }
    }
    return sample;
}

GofResult gof_pvalue(const PeakSeries& series, const PowerLawFit& fit, const GofOptions& options) {
    if (fit.n_total != series.size()) {
        throw Error(ErrorCode::FitMismatch, kModule,
                    "fit was made on " + std::to_string(fit.n_total) + " observations but the series has " +
                        std::to_string(series.size()));
    }
    fit.validate();

    std::vector<double> body;
    for (double x : series.values()) {
        if (x < fit.x_min) body.push_back(x);
    }
    std::sort(body.begin(), body.end());

    ScanOptions scan = options.scan;
    scan.keep_profile = false;
    const double tail_probability = static_cast<double>(fit.n_tail) / static_cast<double>(fit.n_total);
    const std::size_t n = series.size();

    return monte_carlo_gof(fit.ks_distance, options, [&](Rng& rng) {
        const auto sample = semiparametric_sample(
            n, tail_probability, body, [&](Rng& r) { return tail_quantile(fit.x_min, fit.alpha, r.uniform()); },
            rng);
        try {
            return ReplicateDistance{scan_xmin(sample, scan).best.ks_distance, false};
        } catch (const Error&) {
            return ReplicateDistance{1.0, true};
        }
    });
}

}  // namespace peakload
