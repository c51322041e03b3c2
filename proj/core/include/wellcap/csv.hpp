#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wellcap::csv {

/// Splits one comma-separated line. Double-quoted fields may contain commas
/// and "" escapes. A trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

/// Parses the whole token as a double; nullopt on any leftover characters.
std::optional<double> parse_double(std::string_view token);

/// Shortest representation that round-trips, so written files are stable.
std::string format_double(double value);

/// Joins fields, quoting any that contain commas or quotes.
std::string join(const std::vector<std::string>& fields);

}  // namespace wellcap::csv
