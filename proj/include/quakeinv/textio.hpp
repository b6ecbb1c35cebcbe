#pragma once

#include <string>
#include <vector>

namespace quakeinv::textio {

/// Splits a delimited line on commas, trimming surrounding whitespace.
std::vector<std::string> split_fields(const std::string& line);

std::string trim(const std::string& s);

/// True for blank lines and '#' comment lines.
bool is_skippable(const std::string& line);

/// Parse helpers that raise ConfigError carrying `context` (typically
/// "file:line") instead of std::invalid_argument.
double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

/// Shortest round-trippable decimal form of a double ("%.17g" then trimmed).
std::string format_double(double v);

/// Reads a whole text file; IoError if unreadable.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace quakeinv::textio
