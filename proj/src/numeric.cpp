#include "lcr/numeric.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace lcr {

std::optional<double> parse_decimal(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (char c : text) {
        if (c == '$' || c == ',' || c == '\\' || std::isspace(static_cast<unsigned char>(c))) continue;
        cleaned.push_back(c);
    }
    if (cleaned.empty()) return std::nullopt;
    const char* first = cleaned.data();
    const char* last = first + cleaned.size();
    if (*first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

bool answers_match(double predicted, double gold) {
    const double diff = std::fabs(predicted - gold);
    if (diff <= 1e-6) return true;
    return diff <= 1e-4 * std::max(std::fabs(predicted), std::fabs(gold));
}

std::string format_decimal(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

}  // namespace lcr
