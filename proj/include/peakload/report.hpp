#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "peakload/altdists.hpp"
#include "peakload/bootstrap.hpp"
#include "peakload/ccdf.hpp"
#include "peakload/gof.hpp"
#include "peakload/powerlaw.hpp"
#include "peakload/tailscan.hpp"

namespace peakload {

using nlohmann::ordered_json;

std::string_view version() noexcept;

/// SHA-256 of the input bytes, as 64 lowercase hex digits.
std::string content_hash(std::string_view bytes);

ordered_json to_json(const PowerLawFit& fit);
ordered_json to_json(const GofResult& gof, bool include_replicates = false);
ordered_json to_json(const CiReport& ci, bool include_replicates = true);
ordered_json to_json(const AltFit& fit);

PowerLawFit power_law_fit_from_json(const ordered_json& j);
CiReport ci_report_from_json(const ordered_json& j);

/// Column "value" (or "peak", or the only column) of a CSV, each row
/// repeated "frequency" times when that column exists. Reading the output of
/// write_ccdf_csv therefore reproduces the original sample.
std::vector<double> read_values_csv(std::istream& in, const std::optional<std::string>& column = std::nullopt);

void write_ccdf_csv(std::ostream& out, const EmpiricalCcdf& ccdf);
void write_profile_csv(std::ostream& out, std::span<const ProfileEntry> profile);
void write_band_csv(std::ostream& out, std::span<const BandPoint> band);
void write_replicate_ds_csv(std::ostream& out, std::span<const double> replicate_ds);
void write_values_csv(std::ostream& out, std::span<const double> values);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace peakload
