#include "peakload/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "peakload/bootstrap.hpp"
#include "peakload/error.hpp"

namespace peakload {
namespace {

constexpr std::string_view kModule = "powerlaw";

void check_in_tail(const PowerLawFit& fit, double x) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidValue, kModule, "query point is not finite");
    if (x < fit.x_min) {
        std::ostringstream msg;
        msg << "x = " << x << " lies below x_min = " << fit.x_min
            << "; the tail model is undefined there, use the empirical CCDF (peakload ccdf) instead";
        throw Error(ErrorCode::BelowTail, kModule, msg.str());
    }
}

}  // namespace

PowerLawFit PowerLawFit::from_parameters(double x_min, double alpha, double w) {
    PowerLawFit fit;
    fit.x_min = x_min;
    fit.alpha = alpha;
    fit.w = w;
    fit.validate();
    return fit;
}

void PowerLawFit::validate() const {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidAlpha, kModule, "alpha must be finite and > 1");
    }
    if (!(x_min > 0.0) || !std::isfinite(x_min)) {
        throw Error(ErrorCode::InvalidValue, kModule, "x_min must be positive and finite");
    }
    if (!(w > 0.0 && w <= 1.0)) throw Error(ErrorCode::InvalidValue, kModule, "W must lie in (0, 1]");
    if (!(ks_distance >= 0.0 && ks_distance <= 1.0)) {
        throw Error(ErrorCode::InvalidValue, kModule, "KS distance must lie in [0, 1]");
    }
}

double mle_alpha(std::span<const double> tail_values, double x_min) {
    if (!(x_min > 0.0) || !std::isfinite(x_min)) {
        throw Error(ErrorCode::InvalidValue, kModule, "x_min must be positive and finite");
    }
    if (tail_values.size() < 2) {
        throw Error(ErrorCode::InsufficientTail, kModule, "at least two tail values are required");
    }
    double log_sum = 0.0;
    for (double x : tail_values) {
        if (!(x >= x_min) || !std::isfinite(x)) {
            throw Error(ErrorCode::InvalidValue, kModule, "tail value below x_min or not finite");
        }
        log_sum += std::log(x / x_min);
    }
    if (!(log_sum > 0.0)) {
        throw Error(ErrorCode::DegenerateTail, kModule, "all tail values equal x_min");
    }
    return 1.0 + static_cast<double>(tail_values.size()) / log_sum;
}

double tail_ccdf(const PowerLawFit& fit, double x) {
    check_in_tail(fit, x);
    return fit.w * std::pow(x / fit.x_min, 1.0 - fit.alpha);
}

double tail_pdf(const PowerLawFit& fit, double x) {
    check_in_tail(fit, x);
    return fit.w * (fit.alpha - 1.0) / fit.x_min * std::pow(x / fit.x_min, -fit.alpha);
}

double tail_quantile(double x_min, double alpha, double u) {
    return x_min * std::pow(1.0 - u, -1.0 / (alpha - 1.0));
}

std::vector<double> sample_tail(double x_min, double alpha, std::size_t count, Rng& rng) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidAlpha, kModule, "alpha must be finite and > 1");
    }
    if (!(x_min > 0.0) || !std::isfinite(x_min)) {
        throw Error(ErrorCode::InvalidValue, kModule, "x_min must be positive and finite");
    }
    if (count == 0) throw Error(ErrorCode::InvalidArgument, kModule, "count must be at least 1");
    std::vector<double> out(count);
    for (double& x : out) x = tail_quantile(x_min, alpha, rng.uniform());
    return out;
}

Exceedance exceedance_query(const PowerLawFit& fit, double x, const CiReport* ci) {
    Exceedance result{tail_ccdf(fit, x), std::nullopt};
    if (ci != nullptr) result.interval = ci->band_at(x, result.probability);
    return result;
}

}  // namespace peakload
