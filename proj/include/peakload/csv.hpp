#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peakload {

/// Splits one CSV line. Fields may be double-quoted; "" inside quotes is a
/// literal quote. Surrounding whitespace of unquoted fields is trimmed.
std::vector<std::string> split_csv_line(std::string_view line, char delimiter = ',');

/// Strict decimal parse of the whole field (whitespace trimmed). Accepts
/// "nan" and "inf" spellings so callers can classify them.
std::optional<double> parse_double(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace peakload
