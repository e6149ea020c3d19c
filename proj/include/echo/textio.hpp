#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Small text formatting helpers shared by the writers: shortest-round-trip
// doubles and RFC 4180 CSV rows.

namespace echo::textio {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// Quotes a CSV field when it contains a comma, quote, CR or LF.
std::string csv_field(const std::string& raw);

/// Writes one CSV row with CRLF line ending, escaping each field.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace echo::textio
