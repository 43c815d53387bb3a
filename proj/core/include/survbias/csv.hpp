#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace survbias::csv {

/// Splits one CSV line into `out` (cleared first). Handles double-quoted
/// fields with "" escapes and strips a trailing CR.
void split_line(std::string_view line, std::vector<std::string>& out);

std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

/// Parses a decimal number, tolerating surrounding blanks and thousands
/// separators. Returns nullopt for empty, "-", "NA" and any trailing junk.
std::optional<double> parse_number(std::string_view text);

/// Shortest fixed-notation text that round-trips to the same double.
std::string format_number(double value);

std::string_view trim(std::string_view text);

}  // namespace survbias::csv
