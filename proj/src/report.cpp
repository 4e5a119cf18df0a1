#include "peakload/report.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "peakload/csv.hpp"
#include "peakload/error.hpp"

namespace peakload {
namespace {

constexpr std::string_view kModule = "report";

ordered_json interval_json(const Interval& iv) { return ordered_json::array({iv.first, iv.second}); }

}  // namespace

std::string_view version() noexcept { return PEAKLOAD_VERSION; }

std::string content_hash(std::string_view bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    std::string hex;
    hex.reserve(2 * SHA256_DIGEST_LENGTH);
    constexpr char kDigits[] = "0123456789abcdef";
    for (unsigned char b : digest) {
        hex.push_back(kDigits[b >> 4]);
        hex.push_back(kDigits[b & 0xf]);
    }
    return hex;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

ordered_json to_json(const PowerLawFit& fit) {
    return ordered_json{{"x_min", fit.x_min},   {"alpha", fit.alpha},     {"w", fit.w},
                        {"n_tail", fit.n_tail}, {"n_total", fit.n_total}, {"ks_distance", fit.ks_distance}};
}

ordered_json to_json(const GofResult& gof, bool include_replicates) {
    ordered_json j{{"p_value", gof.p_value},
                   {"replicates", gof.replicates},
                   {"observed_d", gof.observed_d},
                   {"significance", gof.significance},
                   {"reject", gof.reject},
                   {"seed", gof.seed},
                   {"failed_replicates", gof.failed_replicates}};
    if (include_replicates) j["replicate_ds"] = gof.replicate_ds;
    return j;
}

ordered_json to_json(const CiReport& ci, bool include_replicates) {
    ordered_json band = ordered_json::array();
    for (const auto& b : ci.band) {
        band.push_back({{"x", b.x},
                        {"low", b.low},
                        {"point", b.point ? ordered_json(*b.point) : ordered_json(nullptr)},
                        {"high", b.high}});
    }
    ordered_json j{{"level", ci.level},
                   {"replicates", ci.replicates},
                   {"seed", ci.seed},
                   {"degenerate_replicates", ci.degenerate_replicates},
                   {"xmin_interval", interval_json(ci.xmin_interval)},
                   {"alpha_interval", interval_json(ci.alpha_interval)},
                   {"band", band}};
    if (include_replicates) {
        ordered_json fits = ordered_json::array();
        for (const auto& f : ci.replicate_fits) fits.push_back(ordered_json::array({f.x_min, f.alpha, f.w}));
        j["replicate_fits"] = fits;
    }
    return j;
}

ordered_json to_json(const AltFit& fit) {
    ordered_json params;
    switch (fit.family) {
        case Family::exponential: params = {{"rate", fit.params[0]}}; break;
        case Family::lognormal: params = {{"log_mean", fit.params[0]}, {"log_sd", fit.params[1]}}; break;
        case Family::gamma: params = {{"shape", fit.params[0]}, {"scale", fit.params[1]}}; break;
    }
    return ordered_json{{"family", to_string(fit.family)},
                        {"params", params},
                        {"x_min", fit.x_min},
                        {"w", fit.w},
                        {"n_tail", fit.n_tail},
                        {"n_total", fit.n_total},
                        {"ks_distance", fit.ks_distance},
                        {"log_likelihood", fit.log_likelihood}};
}

PowerLawFit power_law_fit_from_json(const ordered_json& j) {
    try {
        PowerLawFit fit;
        fit.x_min = j.at("x_min").get<double>();
        fit.alpha = j.at("alpha").get<double>();
        fit.w = j.at("w").get<double>();
        fit.n_tail = j.value("n_tail", std::size_t{0});
        fit.n_total = j.value("n_total", std::size_t{0});
        fit.ks_distance = j.value("ks_distance", 0.0);
        fit.validate();
        return fit;
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorCode::SchemaError, kModule, std::string("malformed fit object: ") + e.what());
    }
}

CiReport ci_report_from_json(const ordered_json& j) {
    try {
        CiReport ci;
        ci.level = j.at("level").get<double>();
        ci.replicates = j.at("replicates").get<std::size_t>();
        ci.seed = j.at("seed").get<std::uint64_t>();
        ci.degenerate_replicates = j.value("degenerate_replicates", std::size_t{0});
        const auto& xi = j.at("xmin_interval");
        ci.xmin_interval = {xi.at(0).get<double>(), xi.at(1).get<double>()};
        const auto& ai = j.at("alpha_interval");
        ci.alpha_interval = {ai.at(0).get<double>(), ai.at(1).get<double>()};
        for (const auto& b : j.at("band")) {
            BandPoint p{b.at("x").get<double>(), b.at("low").get<double>(), b.at("high").get<double>(), std::nullopt};
            if (!b.at("point").is_null()) p.point = b.at("point").get<double>();
            ci.band.push_back(p);
        }
        if (j.contains("replicate_fits")) {
            for (const auto& f : j.at("replicate_fits")) {
                ci.replicate_fits.push_back({f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>()});
            }
        }
        return ci;
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorCode::SchemaError, kModule, std::string("malformed ci object: ") + e.what());
    }
}

std::vector<double> read_values_csv(std::istream& in, const std::optional<std::string>& column) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::SchemaError, kModule, "input has no header row");

    auto find = [&](std::string_view name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    std::optional<std::size_t> value_col;
    if (column) {
        value_col = find(*column);
        if (!value_col) throw Error(ErrorCode::SchemaError, kModule, "header has no column named '" + *column + "'");
    } else {
        value_col = find("value");
        if (!value_col) value_col = find("peak");
        if (!value_col && header.size() == 1) value_col = 0;
        if (!value_col) {
            throw Error(ErrorCode::SchemaError, kModule,
                        "cannot tell which column holds the values; name it 'value' or pass --value-col");
        }
    }
    const auto freq_col = find("frequency");

    std::vector<double> values;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const auto v = *value_col < fields.size() ? parse_double(fields[*value_col]) : std::nullopt;
        if (!v || !std::isfinite(*v) || *v <= 0.0) {
            throw Error(ErrorCode::InvalidValue, kModule,
                        "line " + std::to_string(line_number) + ": value is not a positive finite number");
        }
        std::size_t repeat = 1;
        if (freq_col) {
            const auto f = *freq_col < fields.size() ? parse_double(fields[*freq_col]) : std::nullopt;
            if (!f || *f < 1.0 || std::floor(*f) != *f) {
                throw Error(ErrorCode::InvalidValue, kModule,
                            "line " + std::to_string(line_number) + ": frequency is not a positive integer");
            }
            repeat = static_cast<std::size_t>(*f);
        }
        values.insert(values.end(), repeat, *v);
    }
    if (values.empty()) throw Error(ErrorCode::EmptyInput, kModule, "input has no data rows");
    return values;
}

void write_ccdf_csv(std::ostream& out, const EmpiricalCcdf& ccdf) {
    out << "value,frequency,survival\n";
    for (const auto& p : ccdf.points()) {
        out << format_double(p.value) << ',' << p.frequency << ',' << format_double(p.survival) << '\n';
    }
}

void write_profile_csv(std::ostream& out, std::span<const ProfileEntry> profile) {
    out << "xmin_candidate,alpha,ks_distance,n_tail\n";
    for (const auto& p : profile) {
        out << format_double(p.x_min) << ',' << format_double(p.alpha) << ',' << format_double(p.ks_distance) << ','
            << p.n_tail << '\n';
    }
}

void write_band_csv(std::ostream& out, std::span<const BandPoint> band) {
    out << "x,low,point,high\n";
    for (const auto& b : band) {
        out << format_double(b.x) << ',' << format_double(b.low) << ','
            << (b.point ? format_double(*b.point) : std::string()) << ',' << format_double(b.high) << '\n';
    }
}

void write_replicate_ds_csv(std::ostream& out, std::span<const double> replicate_ds) {
    out << "replicate,ks_distance\n";
    for (std::size_t i = 0; i < replicate_ds.size(); ++i) out << i << ',' << format_double(replicate_ds[i]) << '\n';
}

void write_values_csv(std::ostream& out, std::span<const double> values) {
    out << "value\n";
    for (double v : values) out << format_double(v) << '\n';
}

}  // namespace peakload
