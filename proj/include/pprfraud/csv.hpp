#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pprfraud::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
// Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_record(std::string_view line);

// Reads the next non-empty line, stripping a trailing '\r'. Returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const std::vector<std::string>& fields);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int64(std::string_view text);

// Index of each requested column in a header row; throws std::runtime_error naming
// the first missing column.
std::vector<std::size_t> resolve_columns(const std::vector<std::string>& header,
                                         const std::vector<std::string>& wanted);

}  // namespace pprfraud::csv
