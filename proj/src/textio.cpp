#include "echo/textio.hpp"

#include <charconv>
#include <ostream>
#include <system_error>

namespace echo::textio {

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

std::string csv_field(const std::string& raw) {
    const bool needs_quotes = raw.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return raw;
    std::string quoted = "\"";
    for (char c : raw) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += '"';
    return quoted;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        out << csv_field(fields[i]);
    }
    out << "\r\n";
}

}  // namespace echo::textio
