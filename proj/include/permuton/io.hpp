#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace permuton::io {

// Shortest representation that round-trips.
std::string format_real(double v);
// Fixed number of significant digits (general format).
std::string format_real(double v, int significant_digits);

// RFC 4180 quoting: fields containing a comma, quote or newline are quoted.
std::string csv_field(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::string> parse_csv_row(std::string_view line);

// Reads the next non-empty line; false at end of stream.
bool next_line(std::istream& in, std::string& line);

double parse_real(std::string_view text);
long long parse_integer(std::string_view text);

}  // namespace permuton::io
