#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lobtrend::csv {

// Splits one CSV line on commas. No quoting support; the formats handled here
// are purely numeric plus simple headers.
std::vector<std::string> split_line(const std::string& line);

// Strict numeric parse of a whole field. Throws FormatError on trailing junk
// or empty input; `context` names the offending location in the message.
double parse_number(const std::string& field, const std::string& context);
int64_t parse_integer(const std::string& field, const std::string& context);

// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

// Reads all non-empty lines of a text file. Throws DataError if unreadable.
std::vector<std::string> read_lines(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

} // namespace lobtrend::csv
