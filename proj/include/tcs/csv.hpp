#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tcs::csv {

// Splits one CSV record. Handles double-quoted fields with "" escapes; no
// embedded newlines.
std::vector<std::string> split(std::string_view line);

// Shortest decimal text that parses back to the same double; "nan"/"inf" for
// non-finite values.
std::string format_double(double v);

// Strict parse of the whole field; false on empty or trailing garbage.
bool parse_double(std::string_view field, double &out);
bool parse_int(std::string_view field, long long &out);

std::string_view trim(std::string_view s);

} // namespace tcs::csv
