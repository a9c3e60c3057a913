#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace lime {

/// Shortest decimal representation that parses back to the same double.
/// Locale independent.
std::string format_shortest(double value);

/// Fixed 17 significant digits, locale independent.
std::string format_17g(double value);

/// Strict locale-independent parse of the whole string (a leading '+' is allowed).
std::optional<double> parse_number(std::string_view text);

}  // namespace lime
