#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace lcr {

/// Parses a decimal literal such as "5590", "5,590.0" or "$8". Returns
/// nullopt unless the whole (stripped) input is a finite number.
std::optional<double> parse_decimal(std::string_view text);

/// Relative tolerance 1e-4, absolute 1e-6 near zero.
bool answers_match(double predicted, double gold);

/// Shortest decimal text that reads back to the same double ("39", "5590.5").
std::string format_decimal(double value);

}  // namespace lcr
