#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "../oracles.hpp"
#include "peakload/altdists.hpp"
#include "peakload/error.hpp"
#include "peakload/rng.hpp"
#include "peakload/tailscan.hpp"

using namespace peakload;

namespace {

std::vector<double> truncated_exponential(Rng& rng, double rate, double x_min, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = x_min - std::log1p(-rng.uniform()) / rate;
    return v;
}

// Untruncated survival functions written out independently of the library.
double gamma_sf(double shape, double scale, double x) { return boost::math::gamma_q(shape, x / scale); }
double lognormal_sf(double mu, double sigma, double x) {
    return 0.5 * std::erfc((std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

}  // namespace

TEST_CASE("exponential closed form") {
    Rng rng(1);
    std::vector<double> v(200);
    for (auto& x : v) x = 0.5 + 3.0 * rng.uniform();
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 200.0;
    const auto fit = fit_alt(v, 1e-12, Family::exponential);
    CHECK(fit.params[0] == doctest::Approx(1.0 / mean).epsilon(1e-9));

    const auto big = truncated_exponential(rng, 2.0, 1.0, 5000);
    CHECK(std::abs(fit_alt(big, 1.0, Family::exponential).params[0] - 2.0) <= 0.1);
}

TEST_CASE("truncation consistency for every family") {
    Rng rng(2);
    const auto tail = truncated_exponential(rng, 0.8, 3.0, 300);
    std::vector<double> body(200, 1.0);
    std::vector<double> all(tail);
    all.insert(all.end(), body.begin(), body.end());
    const PeakSeries series(all);
    for (Family f : {Family::exponential, Family::lognormal, Family::gamma}) {
        const auto fit = fit_alt_series(series, 3.0, f);
        CHECK(fit.w == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(alt_tail_ccdf(fit, 3.0) == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(alt_tail_ccdf(fit, 5.0) < 0.6);
        CHECK_THROWS_AS(alt_tail_ccdf(fit, 2.0), Error);
        CHECK(fit.ks_distance >= 0.0);
        CHECK(fit.ks_distance <= 1.0);
    }
}

TEST_CASE("fitted parameters are local likelihood maxima") {
    Rng rng(3);
    struct Case {
        Family family;
        std::vector<double> params;
    };
    const std::vector<Case> cases{{Family::gamma, {2.5, 1.2}}, {Family::lognormal, {0.8, 0.6}},
                                  {Family::exponential, {1.7}}};
    for (const auto& c : cases) {
        const double x_min = 2.0;
        std::vector<double> tail(800);
        for (auto& x : tail) x = sample_truncated(c.family, c.params, x_min, rng);
        const auto fit = fit_alt(tail, x_min, c.family);
        const double best = truncated_log_likelihood(c.family, fit.params, tail, x_min);
        CHECK(best == doctest::Approx(fit.log_likelihood).epsilon(1e-12));
        for (int k = 0; k < 64; ++k) {
            std::vector<double> p = fit.params;
            for (auto& q : p) q *= 1.0 + 0.1 * (rng.uniform() - 0.5);
            INFO(to_string(c.family));
            CHECK(truncated_log_likelihood(c.family, p, tail, x_min) <= best);
        }
    }
}

TEST_CASE("parameter recovery for the two-parameter families") {
    Rng rng(4);
    std::vector<double> tail(20000);
    for (auto& x : tail) x = sample_truncated(Family::gamma, std::vector<double>{3.0, 2.0}, 4.0, rng);
    const auto g = fit_alt(tail, 4.0, Family::gamma);
    CHECK(g.params[0] == doctest::Approx(3.0).epsilon(0.15));
    CHECK(g.params[1] == doctest::Approx(2.0).epsilon(0.15));

    for (auto& x : tail) x = sample_truncated(Family::lognormal, std::vector<double>{1.0, 0.5}, 2.0, rng);
    const auto l = fit_alt(tail, 2.0, Family::lognormal);
    CHECK(l.params[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(l.params[1] == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("samplers match their truncated survival functions") {
    struct Case {
        Family family;
        std::vector<double> params;
        double x_min;
        std::function<double(double)> sf;
    };
    const std::vector<Case> cases{
        {Family::exponential, {0.5}, 2.0, [](double x) { return std::exp(-0.5 * x); }},
        {Family::lognormal, {0.3, 0.7}, 2.5, [](double x) { return lognormal_sf(0.3, 0.7, x); }},
        {Family::gamma, {2.0, 1.5}, 4.0, [](double x) { return gamma_sf(2.0, 1.5, x); }},
        // Deep truncation: the threshold sits far in the upper tail.
        {Family::gamma, {0.4, 0.05}, 3.0, [](double x) { return gamma_sf(0.4, 0.05, x); }},
        {Family::lognormal, {-3.0, 0.3}, 1.0, [](double x) { return lognormal_sf(-3.0, 0.3, x); }},
    };
    for (const auto& c : cases) {
        int passes = 0;
        const int trials = 40;
        const double s_min = c.sf(c.x_min);
        for (int t = 0; t < trials; ++t) {
            Rng rng(derive_seed(600 + static_cast<int>(c.family), t));
            std::vector<double> v(10000);
            for (auto& x : v) x = sample_truncated(c.family, c.params, c.x_min, rng);
            const double d = oracle::ks_one_sample(v, [&](double x) { return 1.0 - c.sf(x) / s_min; });
            passes += d < oracle::ks_critical_1pct(v.size());
        }
        INFO(to_string(c.family) << " x_min=" << c.x_min);
        CHECK(passes >= 38);
    }
}

TEST_CASE("gamma fits a power-law tail worse than the power law") {
    int worse = 0;
    for (int t = 0; t < 50; ++t) {
        Rng rng(derive_seed(808, t));
        const auto tail = sample_tail(1.0, 2.5, 2000, rng);
        const double pl_d = ks_distance(tail, 1.0, mle_alpha(tail, 1.0));
        const double gamma_d = fit_alt(tail, 1.0, Family::gamma).ks_distance;
        worse += gamma_d > pl_d;
    }
    CHECK(worse >= 45);
}

TEST_CASE("fit errors") {
    auto code = [](const std::vector<double>& v, double x_min, Family f) {
        try {
            fit_alt(v, x_min, f);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::EmptyInput;
    };
    CHECK(code(std::vector<double>(9, 2.0), 1.0, Family::gamma) == ErrorCode::InsufficientTail);
    CHECK(code(std::vector<double>(20, 1.0), 1.0, Family::exponential) == ErrorCode::FitDiverged);
    CHECK(code(std::vector<double>(20, 1.5), 1.0, Family::lognormal) == ErrorCode::FitDiverged);
    CHECK(code(std::vector<double>(20, 1.5), 1.0, Family::gamma) == ErrorCode::FitDiverged);
    CHECK(code(std::vector<double>(20, 0.5), 1.0, Family::gamma) == ErrorCode::InvalidValue);
    CHECK(family_from_string("lognormal") == Family::lognormal);
    CHECK_THROWS_AS(family_from_string("weibull"), Error);
}

TEST_CASE("gof_alt contract") {
    Rng rng(5);
    std::vector<double> v = truncated_exponential(rng, 1.0, 2.0, 150);
    for (int i = 0; i < 100; ++i) v.push_back(0.5 + rng.uniform());
    const PeakSeries series(v);
    const auto fit = fit_alt_series(series, 2.0, Family::exponential);

    const auto a = gof_alt(series, fit, {.replicates = 100, .seed = 3});
    const auto b = gof_alt(series, fit, {.replicates = 100, .seed = 3, .threads = 4});
    CHECK(a.replicate_ds == b.replicate_ds);
    CHECK(a.p_value == b.p_value);
    CHECK(a.observed_d == fit.ks_distance);
    CHECK(a.replicate_ds.size() == 100);

    CHECK_THROWS_AS(gof_alt(series, fit, {.replicates = 10}), Error);
    AltFit mismatched = fit;
    mismatched.n_total = 10;
    CHECK_THROWS_AS(gof_alt(series, mismatched, {.replicates = 100}), Error);
}

TEST_CASE("gamma p-values are calibrated on gamma data") {
    int rejected = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(4040, t));
        std::vector<double> v(200);
        for (auto& x : v) x = sample_truncated(Family::gamma, std::vector<double>{2.0, 1.0}, 1.0, rng);
        const PeakSeries series(v);
        const auto fit = fit_alt_series(series, 1.0, Family::gamma);
        rejected += gof_alt(series, fit, {.replicates = 100, .seed = static_cast<std::uint64_t>(t)}).reject;
    }
    // Binomial(40, 0.1) stays below 10 with probability > 0.99.
    CHECK(rejected <= 10);
}
