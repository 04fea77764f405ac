#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lcr/corpus.hpp"

namespace lcr::detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

/// Calls fn(line_number, json) for every non-blank line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw SchemaError(line_no, "<record>", std::string("invalid JSON: ") + e.what());
            }
            if (!j.is_object()) throw SchemaError(line_no, "<record>", "expected a JSON object");
            fn(line_no, j);
        }
        if (end == text.size()) break;
        start = end + 1;
    }
}

inline const nlohmann::json& require(const nlohmann::json& j, std::size_t line, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw SchemaError(line, field, "missing field");
    return *it;
}

inline std::string require_string(const nlohmann::json& j, std::size_t line, const char* field) {
    const auto& v = require(j, line, field);
    if (!v.is_string()) throw SchemaError(line, field, "expected a string");
    return v.get<std::string>();
}

inline double require_number(const nlohmann::json& j, std::size_t line, const char* field) {
    const auto& v = require(j, line, field);
    if (!v.is_number()) throw SchemaError(line, field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(line, field, "expected a finite number");
    return d;
}

}  // namespace lcr::detail
