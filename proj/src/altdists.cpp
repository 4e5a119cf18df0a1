#include "peakload/altdists.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "peakload/error.hpp"
#include "peakload/tailscan.hpp"

namespace peakload {
namespace {

constexpr std::string_view kModule = "altdists";
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr std::size_t kMinTail = 10;

// Special functions in log space. Long double extends the range before the
// asymptotic expansions take over.

double log_normal_sf(double z) {
    if (z < 100.0) {
        const long double q = 0.5L * std::erfc(static_cast<long double>(z) / std::sqrt(2.0L));
        if (q > 0.0L) return static_cast<double>(std::log(q));
    }
    const double z2 = z * z;
    return -0.5 * z2 - std::log(z) - kLogSqrt2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double log_normal_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double log_gamma_q(double k, double t) {
    if (t <= 0.0) return 0.0;
    const long double q = boost::math::gamma_q(static_cast<long double>(k), static_cast<long double>(t));
    if (q > 0.0L) return static_cast<double>(std::log(q));
    // Gamma(k, t) ~ t^(k-1) e^-t (1 + (k-1)/t + (k-1)(k-2)/t^2 + ...)
    double series = 1.0, term = 1.0;
    for (int j = 1; j < 30; ++j) {
        term *= (k - j) / t;
        series += term;
        if (std::abs(term) < 1e-17) break;
    }
    return (k - 1.0) * std::log(t) - t - std::lgamma(k) + std::log(series);
}

double log_gamma_pdf(double k, double t) { return (k - 1.0) * std::log(t) - t - std::lgamma(k); }

/// Family parameters rescaled to y = x / x_min, so x_min maps to 1.
std::vector<double> to_unit(Family family, std::span<const double> params, double x_min) {
    switch (family) {
        case Family::exponential: return {params[0] * x_min};
        case Family::lognormal: return {params[0] - std::log(x_min), params[1]};
        case Family::gamma: return {params[0], params[1] / x_min};
    }
    return {};
}

std::vector<double> from_unit(Family family, std::span<const double> unit, double x_min) {
    switch (family) {
        case Family::exponential: return {unit[0] / x_min};
        case Family::lognormal: return {unit[0] + std::log(x_min), unit[1]};
        case Family::gamma: return {unit[0], unit[1] * x_min};
    }
    return {};
}

double unit_log_sf(Family family, std::span<const double> p, double y) {
    switch (family) {
        case Family::exponential: return -p[0] * y;
        case Family::lognormal: return log_normal_sf((std::log(y) - p[0]) / p[1]);
        case Family::gamma: return log_gamma_q(p[0], y / p[1]);
    }
    return 0.0;
}

double unit_log_pdf(Family family, std::span<const double> p, double y) {
    switch (family) {
        case Family::exponential: return std::log(p[0]) - p[0] * y;
        case Family::lognormal: {
            const double z = (std::log(y) - p[0]) / p[1];
            return log_normal_pdf(z) - std::log(y) - std::log(p[1]);
        }
        case Family::gamma: return log_gamma_pdf(p[0], y / p[1]) - std::log(p[1]);
    }
    return 0.0;
}

double unit_log_likelihood(Family family, std::span<const double> p, std::span<const double> ys) {
    double ll = 0.0;
    for (double y : ys) ll += unit_log_pdf(family, p, y);
    return ll - static_cast<double>(ys.size()) * unit_log_sf(family, p, 1.0);
}

void check_params(Family family, std::span<const double> params) {
    const std::size_t expected = family == Family::exponential ? 1 : 2;
    bool ok = params.size() == expected;
    for (std::size_t i = 0; ok && i < params.size(); ++i) ok = std::isfinite(params[i]);
    if (ok) {
        if (family == Family::exponential) ok = params[0] > 0.0;
        if (family == Family::lognormal) ok = params[1] > 0.0;
        if (family == Family::gamma) ok = params[0] > 0.0 && params[1] > 0.0;
    }
    if (!ok) {
        throw Error(ErrorCode::InvalidArgument, kModule,
                    "invalid parameters for the " + std::string(to_string(family)) + " family");
    }
}

// ---------------------------------------------------------------------------
// Box-constrained BFGS over two log-scale coordinates.

using Vec2 = std::array<double, 2>;

struct Box {
    Vec2 lo;
    Vec2 hi;
};

struct Minimum {
    Vec2 x{};
    double f = std::numeric_limits<double>::infinity();
    double projected_grad_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
};

constexpr double kGradTol = 1e-8;
// Gradients come from central differences, so a stalled line search with a
// gradient this small is accepted as the numerical optimum.
constexpr double kStallGradTol = 1e-6;

Vec2 clamp(const Vec2& x, const Box& box) {
    return {std::clamp(x[0], box.lo[0], box.hi[0]), std::clamp(x[1], box.lo[1], box.hi[1])};
}

Vec2 numeric_gradient(const std::function<double(const Vec2&)>& f, const Vec2& x) {
    Vec2 g{};
    for (int i = 0; i < 2; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
        Vec2 up = x, down = x;
        up[i] += h;
        down[i] -= h;
        g[i] = (f(up) - f(down)) / (2.0 * h);
    }
    return g;
}

Vec2 projected(const Vec2& g, const Vec2& x, const Box& box) {
    Vec2 pg = g;
    for (int i = 0; i < 2; ++i) {
        if ((x[i] <= box.lo[i] && g[i] > 0.0) || (x[i] >= box.hi[i] && g[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
}

double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

Minimum minimize_box(const std::function<double(const Vec2&)>& f, Vec2 x, const Box& box) {
    x = clamp(x, box);
    double fx = f(x);
    if (!std::isfinite(fx)) return {};

    using Mat2 = std::array<Vec2, 2>;
    const Mat2 identity{{{1.0, 0.0}, {0.0, 1.0}}};
    Mat2 h = identity;
    Vec2 g = numeric_gradient(f, x);

    Minimum out;
    for (int iter = 0; iter < 500; ++iter) {
        const Vec2 pg = projected(g, x, box);
        out = {x, fx, norm(pg), false};
        if (out.projected_grad_norm <= kGradTol) {
            out.converged = true;
            return out;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 2 && !stepped; ++attempt) {
            Vec2 d{-(h[0][0] * pg[0] + h[0][1] * pg[1]), -(h[1][0] * pg[0] + h[1][1] * pg[1])};
            for (int i = 0; i < 2; ++i) {
                if (pg[i] == 0.0 && g[i] != 0.0) d[i] = 0.0;  // active bound
            }
            if (d[0] * pg[0] + d[1] * pg[1] >= 0.0) {
                h = identity;
                d = {-pg[0], -pg[1]};
            }
            for (double t = 1.0; t > 1e-14; t *= 0.5) {
                const Vec2 xn = clamp({x[0] + t * d[0], x[1] + t * d[1]}, box);
                const double fn = f(xn);
                const double decrease = g[0] * (xn[0] - x[0]) + g[1] * (xn[1] - x[1]);
                if (std::isfinite(fn) && fn <= fx + 1e-4 * decrease && (xn[0] != x[0] || xn[1] != x[1])) {
                    const Vec2 gn = numeric_gradient(f, xn);
                    const Vec2 s{xn[0] - x[0], xn[1] - x[1]};
                    const Vec2 y{gn[0] - g[0], gn[1] - g[1]};
                    const double sy = s[0] * y[0] + s[1] * y[1];
                    if (sy > 1e-16) {
                        // Inverse-Hessian BFGS update.
                        const Vec2 hy{h[0][0] * y[0] + h[0][1] * y[1], h[1][0] * y[0] + h[1][1] * y[1]};
                        const double yhy = y[0] * hy[0] + y[1] * hy[1];
                        for (int i = 0; i < 2; ++i) {
                            for (int j = 0; j < 2; ++j) {
                                h[i][j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                            }
                        }
                    }
                    x = xn;
                    fx = fn;
                    g = gn;
                    stepped = true;
                    break;
                }
            }
            if (!stepped) h = identity;
        }
        if (!stepped) {
            out.converged = out.projected_grad_norm <= kStallGradTol;
            return out;
        }
    }
    const Vec2 pg = projected(g, x, box);
    out = {x, fx, norm(pg), norm(pg) <= kGradTol};
    return out;
}

struct Moments {
    double mean;
    double sd;
};

Moments moments(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

/// Unit-scale MLE for the two-parameter families. Returns unit parameters.
std::vector<double> fit_two_parameter(Family family, std::span<const double> ys) {
    Box box{};
    std::vector<Vec2> starts;
    std::function<std::vector<double>(const Vec2&)> decode;

    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    if (*lo == *hi) throw Error(ErrorCode::FitDiverged, kModule, std::string(to_string(family)) + ": tail has no spread");

    if (family == Family::lognormal) {
        std::vector<double> logs(ys.size());
        std::transform(ys.begin(), ys.end(), logs.begin(), [](double y) { return std::log(y); });
        const Moments m = moments(logs);
        box = {{-50.0, -12.0}, {50.0, 6.0}};
        decode = [](const Vec2& p) { return std::vector<double>{p[0], std::exp(p[1])}; };
        starts = {{m.mean, std::log(m.sd)}, {m.mean - m.sd, std::log(1.5 * m.sd)}, {-m.sd, std::log(2.0 * m.sd)}};
    } else {
        const Moments m = moments(ys);
        const double excess = m.mean - 1.0;
        box = {{-8.0, -16.0}, {12.0, 10.0}};
        decode = [](const Vec2& p) { return std::vector<double>{std::exp(p[0]), std::exp(p[1])}; };
        const double var = m.sd * m.sd;
        starts = {{std::log(m.mean * m.mean / var), std::log(var / m.mean)},
                  {0.0, std::log(excess)},
                  {std::log(0.5), std::log(excess)}};
    }

    const double inv_n = 1.0 / static_cast<double>(ys.size());
    auto objective = [&](const Vec2& p) {
        const double ll = unit_log_likelihood(family, decode(p), ys);
        return std::isfinite(ll) ? -ll * inv_n : std::numeric_limits<double>::infinity();
    };

    Minimum best;
    Minimum best_any;
    for (const Vec2& start : starts) {
        const Minimum m = minimize_box(objective, start, box);
        if (m.f < best_any.f) best_any = m;
        if (m.converged && m.f < best.f) best = m;
    }
    if (!best.converged) {
        std::ostringstream msg;
        const auto p = decode(best_any.x);
        msg.precision(10);
        msg << to_string(family) << ": optimizer did not converge (best objective " << best_any.f
            << ", projected gradient norm " << best_any.projected_grad_norm << ", unit parameters " << p[0] << ", "
            << p[1] << ")";
        throw Error(ErrorCode::FitDiverged, kModule, msg.str());
    }
    return decode(best.x);
}

/// Finds t >= lo with log_sf(t) = target for a decreasing log_sf. Newton steps
/// with a bisection safeguard; d/dt log_sf = -exp(log_pdf - log_sf).
double invert_log_sf(const std::function<double(double)>& log_sf, const std::function<double(double)>& log_pdf,
                     double lo, double target, double initial_step) {
    if (log_sf(lo) <= target) return lo;
    double step = initial_step;
    double hi = lo + step;
    while (log_sf(hi) > target) {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        if (!std::isfinite(hi)) return hi;
    }
    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = log_sf(t) - target;
        if (f > 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        if (hi - lo <= 1e-14 * std::max(1.0, std::abs(hi))) break;
        const double slope = -std::exp(log_pdf(t) - log_sf(t));
        double next = slope != 0.0 && std::isfinite(slope) ? t - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) {
            t = next;
            break;
        }
        t = next;
    }
    return t;
}

/// One unit-scale variate (y >= 1) from the truncated family.
double sample_unit(Family family, std::span<const double> p, Rng& rng) {
    const double u = rng.uniform();
    if (family == Family::exponential) return 1.0 - std::log1p(-u) / p[0];
    const double target = std::log1p(-u) + unit_log_sf(family, p, 1.0);
    if (family == Family::lognormal) {
        const double mu = p[0], sigma = p[1];
        const double z = invert_log_sf(log_normal_sf, log_normal_pdf, -mu / sigma, target, 1.0);
        return std::max(1.0, std::exp(mu + sigma * z));
    }
    const double k = p[0], theta = p[1];
    const double t = invert_log_sf([k](double v) { return log_gamma_q(k, v); },
                                   [k](double v) { return log_gamma_pdf(k, v); }, 1.0 / theta, target,
                                   std::max(1.0, std::sqrt(k)));
    return std::max(1.0, theta * t);
}

}  // namespace

std::string_view to_string(Family family) noexcept {
    switch (family) {
        case Family::exponential: return "exponential";
        case Family::lognormal: return "lognormal";
        case Family::gamma: return "gamma";
    }
    return "exponential";
}

Family family_from_string(std::string_view name) {
    for (Family f : {Family::exponential, Family::lognormal, Family::gamma}) {
        if (to_string(f) == name) return f;
    }
    throw Error(ErrorCode::InvalidArgument, kModule, "unknown family '" + std::string(name) + "'");
}

double family_log_survival(Family family, std::span<const double> params, double x) {
    check_params(family, params);
    if (!(x > 0.0)) return 0.0;
    switch (family) {
        case Family::exponential: return -params[0] * x;
        case Family::lognormal: return log_normal_sf((std::log(x) - params[0]) / params[1]);
        case Family::gamma: return log_gamma_q(params[0], x / params[1]);
    }
    return 0.0;
}

double alt_tail_ccdf(const AltFit& fit, double x) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidValue, kModule, "query point is not finite");
    if (x < fit.x_min) {
        throw Error(ErrorCode::BelowTail, kModule, "x lies below x_min; use the empirical CCDF");
    }
    const auto unit = to_unit(fit.family, fit.params, fit.x_min);
    return fit.w * std::exp(unit_log_sf(fit.family, unit, x / fit.x_min) - unit_log_sf(fit.family, unit, 1.0));
}

double truncated_log_likelihood(Family family, std::span<const double> params, std::span<const double> tail_values,
                                double x_min) {
    check_params(family, params);
    const auto unit = to_unit(family, params, x_min);
    std::vector<double> ys(tail_values.size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = tail_values[i] / x_min;
    return unit_log_likelihood(family, unit, ys) - static_cast<double>(ys.size()) * std::log(x_min);
}

AltFit fit_alt(std::span<const double> tail_values, double x_min, Family family) {
    if (!(x_min > 0.0) || !std::isfinite(x_min)) {
        throw Error(ErrorCode::InvalidValue, kModule, "x_min must be positive and finite");
    }
    if (tail_values.size() < kMinTail) {
        throw Error(ErrorCode::InsufficientTail, kModule,
                    "at least " + std::to_string(kMinTail) + " tail values are required");
    }
    std::vector<double> ys(tail_values.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(tail_values[i] >= x_min) || !std::isfinite(tail_values[i])) {
            throw Error(ErrorCode::InvalidValue, kModule, "tail value below x_min or not finite");
        }
        ys[i] = tail_values[i] / x_min;
    }
    std::sort(ys.begin(), ys.end());

    std::vector<double> unit;
    if (family == Family::exponential) {
        // Memorylessness: the truncated MLE is the reciprocal mean excess.
        double excess = 0.0;
        for (double y : ys) excess += y - 1.0;
        if (!(excess > 0.0)) throw Error(ErrorCode::FitDiverged, kModule, "exponential: tail has no spread");
        unit = {static_cast<double>(ys.size()) / excess};
    } else {
        unit = fit_two_parameter(family, ys);
    }

    AltFit fit;
    fit.family = family;
    fit.params = from_unit(family, unit, x_min);
    fit.x_min = x_min;
    fit.w = 1.0;
    fit.n_tail = ys.size();
    fit.n_total = ys.size();
    const double log_sf_min = unit_log_sf(family, unit, 1.0);
    fit.ks_distance = ks_distance_sorted(
        ys, [&](double y) { return std::exp(unit_log_sf(family, unit, y) - log_sf_min); });
    fit.log_likelihood =
        unit_log_likelihood(family, unit, ys) - static_cast<double>(ys.size()) * std::log(x_min);
    return fit;
}

AltFit fit_alt_series(const PeakSeries& series, double x_min, Family family) {
    std::vector<double> tail;
    for (double x : series.values()) {
        if (x >= x_min) tail.push_back(x);
    }
    AltFit fit = fit_alt(tail, x_min, family);
    fit.n_total = series.size();
    fit.w = static_cast<double>(fit.n_tail) / static_cast<double>(fit.n_total);
    return fit;
}

double sample_truncated(Family family, std::span<const double> params, double x_min, Rng& rng) {
    check_params(family, params);
    const auto unit = to_unit(family, params, x_min);
    return x_min * sample_unit(family, unit, rng);
}

GofResult gof_alt(const PeakSeries& series, const AltFit& fit, const GofOptions& options) {
    if (fit.n_total != series.size()) {
        throw Error(ErrorCode::FitMismatch, kModule,
                    "fit was made on " + std::to_string(fit.n_total) + " observations but the series has " +
                        std::to_string(series.size()));
    }
    check_params(fit.family, fit.params);

    std::vector<double> body;
    for (double x : series.values()) {
        if (x < fit.x_min) body.push_back(x);
    }
    std::sort(body.begin(), body.end());
    const auto unit = to_unit(fit.family, fit.params, fit.x_min);
    const double tail_probability = static_cast<double>(fit.n_tail) / static_cast<double>(fit.n_total);
    const std::size_t n = series.size();

    return monte_carlo_gof(fit.ks_distance, options, [&](Rng& rng) {
        const auto sample = semiparametric_sample(
            n, tail_probability, body, [&](Rng& r) { return fit.x_min * sample_unit(fit.family, unit, r); }, rng);
        std::vector<double> tail;
        for (double x : sample) {
            if (x >= fit.x_min) tail.push_back(x);
        }
        try {
            return ReplicateDistance{fit_alt(tail, fit.x_min, fit.family).ks_distance, false};
        } catch (const Error&) {
            return ReplicateDistance{1.0, true};
        }
    });
}

}  // namespace peakload
