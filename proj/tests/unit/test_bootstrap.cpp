#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "peakload/bootstrap.hpp"
#include "peakload/rng.hpp"

using namespace peakload;

namespace {

PeakSeries mixed_series(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform() < 0.6 ? 1.0 + 4.0 * rng.uniform() : tail_quantile(5.0, 3.0, rng.uniform());
    return PeakSeries(std::move(v));
}

}  // namespace

TEST_CASE("nearest-rank percentile interval") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = static_cast<double>((i * 37) % 100 + 1);
    const auto iv = percentile_interval(v, 0.95);
    CHECK(iv.first == 3.0);
    CHECK(iv.second == 98.0);
    const auto iv90 = percentile_interval(v, 0.90);
    CHECK(iv90.first == 5.0);
    CHECK(iv90.second == 95.0);
    CHECK_THROWS_AS(percentile_interval({}, 0.9), Error);

    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> w(1 + rng.below(300));
        for (auto& x : w) x = rng.uniform();
        const double level = 0.6 + 0.39 * rng.uniform();
        const auto got = percentile_interval(w, level);
        CHECK(got.first == oracle::nearest_rank(w, (1.0 - level) / 2.0));
        CHECK(got.second == oracle::nearest_rank(w, (1.0 + level) / 2.0));
    }
}

TEST_CASE("bootstrap report invariants") {
    const auto series = mixed_series(10, 400);
    const std::vector<double> grid{1.5, 3.0, 5.0, 6.0, 8.0, 12.0, 20.0};
    const BootstrapOptions options{.replicates = 150, .level = 0.95, .band_grid = grid, .seed = 77};
    const auto ci = bootstrap_ci(series, options);
    const auto fit = scan_xmin(series).best;

    CHECK(ci.replicates == 150);
    CHECK(ci.seed == 77);
    CHECK(ci.replicate_fits.size() + ci.degenerate_replicates == 150);
    CHECK(ci.xmin_interval.first <= ci.xmin_interval.second);
    CHECK(ci.alpha_interval.first <= ci.alpha_interval.second);

    std::vector<double> xmins, alphas;
    for (const auto& f : ci.replicate_fits) {
        xmins.push_back(f.x_min);
        alphas.push_back(f.alpha);
    }
    CHECK(ci.xmin_interval.first == oracle::nearest_rank(xmins, 0.025));
    CHECK(ci.xmin_interval.second == oracle::nearest_rank(xmins, 0.975));
    CHECK(ci.alpha_interval.first == oracle::nearest_rank(alphas, 0.025));
    CHECK(ci.alpha_interval.second == oracle::nearest_rank(alphas, 0.975));

    REQUIRE(ci.band.size() == grid.size());
    for (const auto& b : ci.band) {
        CHECK(b.low <= b.high);
        CHECK(b.low >= 0.0);
        CHECK(b.high <= 1.0);
        if (b.x >= fit.x_min) {
            REQUIRE(b.point.has_value());
            CHECK(*b.point == tail_ccdf(fit, b.x));
            CHECK(b.low <= *b.point);
            CHECK(*b.point <= b.high);
        } else {
            CHECK_FALSE(b.point.has_value());
        }
    }

    const auto again = bootstrap_ci(series, options);
    CHECK(again.xmin_interval == ci.xmin_interval);
    CHECK(again.alpha_interval == ci.alpha_interval);
    for (std::size_t i = 0; i < ci.band.size(); ++i) {
        CHECK(again.band[i].low == ci.band[i].low);
        CHECK(again.band[i].high == ci.band[i].high);
    }

    BootstrapOptions parallel = options;
    parallel.threads = 3;
    const auto threaded = bootstrap_ci(series, parallel);
    REQUIRE(threaded.replicate_fits.size() == ci.replicate_fits.size());
    for (std::size_t i = 0; i < ci.replicate_fits.size(); ++i) {
        CHECK(threaded.replicate_fits[i].x_min == ci.replicate_fits[i].x_min);
        CHECK(threaded.replicate_fits[i].alpha == ci.replicate_fits[i].alpha);
    }

    BootstrapOptions narrower = options;
    narrower.level = 0.90;
    const auto ci90 = bootstrap_ci(series, narrower);
    CHECK(ci90.alpha_interval.first >= ci.alpha_interval.first);
    CHECK(ci90.alpha_interval.second <= ci.alpha_interval.second);
    CHECK(ci90.xmin_interval.first >= ci.xmin_interval.first);
    CHECK(ci90.xmin_interval.second <= ci.xmin_interval.second);
}

TEST_CASE("band below a replicate threshold uses the resample survival") {
    // Far below every threshold the resample survival is 1 for all replicates.
    const auto series = mixed_series(12, 300);
    const auto ci = bootstrap_ci(series, {.replicates = 100, .band_grid = {0.5}, .seed = 1});
    REQUIRE(ci.band.size() == 1);
    CHECK(ci.band[0].low == 1.0);
    CHECK(ci.band[0].high == 1.0);
}

TEST_CASE("band lookup off the grid") {
    CiReport ci;
    ci.level = 0.9;
    for (int i = 0; i < 100; ++i) ci.replicate_fits.push_back({1.0 + 0.001 * i, 2.0 + 0.01 * i, 0.2});
    const auto at = ci.band_at(10.0, 0.2 * std::pow(10.0, -1.5));
    REQUIRE(at.has_value());
    CHECK(at->first <= at->second);
    CHECK_FALSE(ci.band_at(1.05, 0.1).has_value());
}

TEST_CASE("argument validation") {
    const auto series = mixed_series(1, 100);
    CHECK_THROWS_AS(bootstrap_ci(series, {.replicates = 50}), Error);
    CHECK_THROWS_AS(bootstrap_ci(series, {.replicates = 100, .level = 0.4}), Error);
    CHECK_THROWS_AS(bootstrap_ci(series, {.replicates = 100, .level = 1.0}), Error);
    CHECK_THROWS_AS(bootstrap_ci(series, {.replicates = 100, .band_grid = {-1.0}}), Error);
}

TEST_CASE("mostly degenerate resamples raise UnstableBootstrap") {
    std::vector<double> v(11, 1.0);
    v.push_back(2.0);
    const PeakSeries series(v);
    try {
        bootstrap_ci(series, {.replicates = 200, .seed = 4});
        FAIL("expected UnstableBootstrap");
    } catch (const UnstableBootstrapError& e) {
        CHECK(e.code() == ErrorCode::UnstableBootstrap);
        CHECK(e.partial().degenerate_replicates > 40);
        CHECK(e.partial().replicate_fits.size() + e.partial().degenerate_replicates == 200);
    }
}
