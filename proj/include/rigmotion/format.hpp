#pragma once

// Decimal number rendering shared by every text format the library emits.
// All routines work on the shortest round-trip decimal form of the input, so
// a value written as "0.15" rounds like the decimal 0.15 and not like its
// binary neighbour 0.1499999....  Output never uses exponent notation and
// never prints "-0".

#include <optional>
#include <string>
#include <string_view>

namespace rigmotion {

// Shortest representation that parses back to the same double.
std::string format_shortest(double value);

// Rounds half away from zero to `digits` significant figures (digits >= 1).
std::string round_significant(double value, int digits);

// Rounds half away from zero to at most `places` decimal places (places >= 0),
// trailing zeros stripped.
std::string round_decimals(double value, int places);

// Exactly `places` decimal places, zero padded ("0.500000").
std::string format_fixed(double value, int places);

// Strict decimal parse: optional sign, digits, optional fraction and
// exponent. Rejects inf/nan and trailing garbage.
std::optional<double> parse_number(std::string_view text);

// JSON string literal with quotes and escapes.
std::string json_quote(std::string_view text);

// Number of Unicode code points in a UTF-8 string (continuation bytes are
// not counted).
std::size_t utf8_length(std::string_view text);

}  // namespace rigmotion
