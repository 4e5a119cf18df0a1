#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "peakload/bootstrap.hpp"
#include "peakload/error.hpp"
#include "peakload/powerlaw.hpp"
#include "peakload/rng.hpp"

using namespace peakload;

namespace {

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("mle_alpha closed form") {
    const double e = std::exp(1.0);
    CHECK(mle_alpha(std::vector<double>{e, e, e, e}, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(code_of([] { mle_alpha(std::vector<double>{1, 1, 1}, 1.0); }) == ErrorCode::DegenerateTail);
    CHECK(code_of([] { mle_alpha(std::vector<double>{2.0}, 1.0); }) == ErrorCode::InsufficientTail);
    CHECK(code_of([] { mle_alpha(std::vector<double>{0.5, 2.0}, 1.0); }) == ErrorCode::InvalidValue);
}

TEST_CASE("mle_alpha recovers the exponent of a large sample") {
    Rng rng(7);
    const auto sample = sample_tail(1.0, 2.5, 100000, rng);
    CHECK(std::abs(mle_alpha(sample, 1.0) - 2.5) <= 0.015);
}

TEST_CASE("mle_alpha is scale equivariant") {
    Rng rng(11);
    const auto sample = sample_tail(3.0, 3.2, 500, rng);
    const double base = mle_alpha(sample, 3.0);
    for (double c : {1e-3, 0.7, 42.0, 1e5}) {
        std::vector<double> scaled(sample);
        for (auto& x : scaled) x *= c;
        CHECK(mle_alpha(scaled, 3.0 * c) == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("tail_ccdf values") {
    const auto table = PowerLawFit::from_parameters(3085.0, 22.28, 0.1356);
    CHECK(std::abs(tail_ccdf(table, 3400.0) - 0.0172) <= 0.0005);
    CHECK(tail_ccdf(table, 3085.0) == 0.1356);
    CHECK(tail_ccdf(PowerLawFit::from_parameters(1.0, 2.0, 1.0), 4.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(code_of([&] { tail_ccdf(table, 3000.0); }) == ErrorCode::BelowTail);
}

TEST_CASE("tail_pdf values") {
    const auto unit = PowerLawFit::from_parameters(1.0, 2.0, 1.0);
    const auto half = PowerLawFit::from_parameters(1.0, 2.0, 0.5);
    CHECK(tail_pdf(unit, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tail_pdf(unit, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
    for (double x : {1.0, 1.5, 10.0, 1e3}) CHECK(tail_pdf(half, x) == doctest::Approx(0.5 * tail_pdf(unit, x)));
    CHECK(code_of([&] { tail_pdf(unit, 0.5); }) == ErrorCode::BelowTail);
}

TEST_CASE("density integrates to W over the tail") {
    for (double alpha : {1.5, 2.0, 3.0, 22.3}) {
        const auto fit = PowerLawFit::from_parameters(2.0, alpha, 0.3);
        // Integrate to x_min * e^60: the omitted mass is at most e^-30 of W.
        const double integral = oracle::integrate_log_simpson([&](double x) { return tail_pdf(fit, x); }, 2.0,
                                                              2.0 * std::exp(60.0), 200000);
        CHECK(std::abs(integral - 0.3) / 0.3 <= 1e-6);
    }
}

TEST_CASE("density matches minus the CCDF derivative") {
    for (double alpha : {1.5, 3.0, 22.3}) {
        const auto fit = PowerLawFit::from_parameters(1.0, alpha, 0.8);
        for (double x : {1.01, 1.1, 1.5, 3.0, 10.0}) {
            const double h = 1e-5 * x;
            const double derivative = -(tail_ccdf(fit, x + h) - tail_ccdf(fit, x - h)) / (2.0 * h);
            CHECK(std::abs(derivative - tail_pdf(fit, x)) / tail_pdf(fit, x) <= 1e-4);
        }
    }
}

TEST_CASE("inverse transform spot values") {
    CHECK(tail_quantile(3.5, 2.7, 0.0) == 3.5);
    CHECK(tail_quantile(1.0, 2.0, 0.75) == doctest::Approx(4.0).epsilon(1e-15));
    Rng rng(1);
    CHECK(code_of([&] { sample_tail(1.0, 1.0, 5, rng); }) == ErrorCode::InvalidAlpha);
    CHECK(code_of([&] { sample_tail(1.0, 0.5, 5, rng); }) == ErrorCode::InvalidAlpha);
}

TEST_CASE("sampler reproduces the model survival") {
    Rng rng(99);
    const auto sample = sample_tail(1.0, 2.0, 100000, rng);
    CHECK(std::abs(oracle::survival_count(sample, 2.0) - 0.5) <= 0.01);
    for (double x : sample) REQUIRE(x >= 1.0);

    Rng a(5), b(5);
    CHECK(sample_tail(1.0, 2.0, 10, a) == sample_tail(1.0, 2.0, 10, b));
}

TEST_CASE("sampler passes a KS check in most seeded trials") {
    int passes = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(314, t));
        const auto sample = sample_tail(1.0, 2.5, 10000, rng);
        const double d =
            oracle::ks_one_sample(sample, [](double x) { return 1.0 - std::pow(x, -1.5); });
        passes += d < oracle::ks_critical_1pct(10000) ? 1 : 0;
    }
    CHECK(passes >= 95);
}

TEST_CASE("estimator recovery across sizes and exponents") {
    for (double alpha : {1.5, 2.5, 3.5, 22.3}) {
        for (std::size_t n : {1000u, 10000u, 100000u}) {
            int within = 0;
            for (int t = 0; t < 100; ++t) {
                Rng rng(derive_seed(static_cast<std::uint64_t>(alpha * 1000) + n, t));
                const auto sample = sample_tail(1.0, alpha, n, rng);
                within += std::abs(mle_alpha(sample, 1.0) - alpha) <= 4.0 * (alpha - 1.0) / std::sqrt(double(n));
            }
            INFO("alpha=" << alpha << " n=" << n);
            CHECK(within >= 99);
        }
    }
}

TEST_CASE("exceedance query") {
    const auto fit = PowerLawFit::from_parameters(3085.0, 22.28, 0.1356);
    CHECK(std::abs(exceedance_query(fit, 3400.0).probability - 0.0172) <= 0.0005);
    CHECK_FALSE(exceedance_query(fit, 3400.0).interval.has_value());
    CHECK(exceedance_query(fit, 3085.0).probability == 0.1356);

    double previous = 1.0;
    for (double x = 3085.0; x < 1e6; x *= 1.5) {
        const double p = exceedance_query(fit, x).probability;
        CHECK(p <= previous);
        previous = p;
    }
    CHECK(previous < 1e-40);

    try {
        exceedance_query(fit, 3000.0);
        FAIL("expected BelowTail");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BelowTail);
        CHECK(std::string(e.what()).find("empirical CCDF") != std::string::npos);
    }

    CiReport ci;
    ci.band.push_back({3085.0, 0.12, 0.15, 0.1356});
    const auto at_min = exceedance_query(fit, 3085.0, &ci);
    REQUIRE(at_min.interval.has_value());
    CHECK(at_min.interval->first <= 0.1356);
    CHECK(at_min.interval->second >= 0.1356);
}

TEST_CASE("fit validation") {
    CHECK(code_of([] { PowerLawFit::from_parameters(1.0, 1.0, 0.5); }) == ErrorCode::InvalidAlpha);
    CHECK(code_of([] { PowerLawFit::from_parameters(1.0, 2.0, 0.0); }) == ErrorCode::InvalidValue);
    CHECK(code_of([] { PowerLawFit::from_parameters(-1.0, 2.0, 0.5); }) == ErrorCode::InvalidValue);
}
