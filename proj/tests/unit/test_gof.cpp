#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "peakload/error.hpp"
#include "peakload/gof.hpp"
#include "peakload/rng.hpp"
#include "peakload/tailscan.hpp"

using namespace peakload;

namespace {

PeakSeries power_law_series(std::uint64_t seed, std::size_t n, double alpha = 2.5) {
    Rng rng(seed);
    return PeakSeries(sample_tail(1.0, alpha, n, rng));
}

}  // namespace

TEST_CASE("argument validation") {
    const auto series = power_law_series(1, 200);
    const auto fit = scan_xmin(series).best;
    CHECK_THROWS_AS(gof_pvalue(series, fit, {.replicates = 99}), Error);
    try {
        gof_pvalue(series, fit, {.replicates = 99});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewReplicates);
    }

    const auto other = power_law_series(2, 150);
    try {
        gof_pvalue(other, fit, {.replicates = 100});
        FAIL("expected FitMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FitMismatch);
    }
}

TEST_CASE("result invariants and reproducibility") {
    const auto series = power_law_series(3, 300);
    const auto fit = scan_xmin(series).best;
    const GofOptions options{.replicates = 120, .seed = 17};
    const auto a = gof_pvalue(series, fit, options);

    CHECK(a.replicates == 120);
    CHECK(a.replicate_ds.size() == 120);
    CHECK(a.observed_d == fit.ks_distance);
    CHECK(a.seed == 17);
    const auto extreme = std::count_if(a.replicate_ds.begin(), a.replicate_ds.end(),
                                       [&](double d) { return d >= a.observed_d; });
    CHECK(a.p_value == static_cast<double>(extreme) / 120.0);
    CHECK(a.p_value * 120.0 == std::round(a.p_value * 120.0));
    CHECK(a.reject == (a.p_value < 0.10));
    for (double d : a.replicate_ds) {
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }

    const auto b = gof_pvalue(series, fit, options);
    CHECK(a.replicate_ds == b.replicate_ds);
    CHECK(a.p_value == b.p_value);

    GofOptions parallel = options;
    parallel.threads = 4;
    const auto c = gof_pvalue(series, fit, parallel);
    CHECK(a.replicate_ds == c.replicate_ds);
    CHECK(a.p_value == c.p_value);

    GofOptions reseeded = options;
    reseeded.seed = 18;
    CHECK(gof_pvalue(series, fit, reseeded).replicate_ds != a.replicate_ds);
}

TEST_CASE("rejection uses a strict inequality") {
    // Exactly 10 of 100 replicates reach the observed distance: p = 0.10.
    int calls = 0;
    const auto result = monte_carlo_gof(0.5, {.replicates = 100, .significance = 0.10}, [&](Rng&) {
        return ReplicateDistance{calls++ < 10 ? 0.5 : 0.1, false};
    });
    CHECK(result.p_value == doctest::Approx(0.10).epsilon(1e-15));
    CHECK_FALSE(result.reject);

    calls = 0;
    const auto lower = monte_carlo_gof(0.5, {.replicates = 100, .significance = 0.10}, [&](Rng&) {
        return ReplicateDistance{calls++ < 9 ? 0.7 : 0.1, calls > 95};
    });
    CHECK(lower.p_value == doctest::Approx(0.09));
    CHECK(lower.reject);
    CHECK(lower.failed_replicates == 5);
}

TEST_CASE("semi-parametric sample composition") {
    Rng rng(8);
    const std::vector<double> body{0.2, 0.4, 0.6};
    const auto sample = semiparametric_sample(
        20000, 0.25, body, [](Rng& r) { return 10.0 + r.uniform(); }, rng);
    std::size_t tail = 0;
    for (double x : sample) {
        if (x >= 10.0) {
            ++tail;
        } else {
            CHECK(std::find(body.begin(), body.end(), x) != body.end());
        }
    }
    // Binomial(20000, 0.25): sd ~ 61.
    CHECK(std::abs(static_cast<double>(tail) - 5000.0) < 300.0);
}

TEST_CASE("p-value refines consistently with more replicates") {
    int consistent = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const auto series = power_law_series(derive_seed(900, t), 150);
        const auto fit = scan_xmin(series).best;
        const auto coarse = gof_pvalue(series, fit, {.replicates = 100, .seed = 5});
        const auto fine = gof_pvalue(series, fit, {.replicates = 400, .seed = 5});
        const double p = fine.p_value;
        const bool ok = std::abs(coarse.p_value - fine.p_value) <= 3.0 * std::sqrt(p * (1.0 - p) / 100.0);
        consistent += ok;
    }
    CHECK(consistent >= 99);
}
