#include "lcr/prompts.hpp"

#include <stdexcept>

#include "jsonl.hpp"

namespace lcr {

// Generated from resources/ at configure time.
const std::map<std::string, std::string>& builtin_resources();

namespace {

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

PromptLibrary::PromptLibrary() {
    for (const auto& [name, text] : builtin_resources()) texts_.emplace(name, strip_trailing_newlines(text));
}

const PromptLibrary& default_prompts() {
    static const PromptLibrary lib;
    return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
    PromptLibrary lib;
    if (!std::filesystem::is_directory(dir)) throw IoError("prompt directory not found: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (!entry.is_regular_file() || (ext != ".txt" && ext != ".jsonl")) continue;
        lib.set(entry.path().stem().string(), strip_trailing_newlines(detail::read_file(entry.path())));
    }
    return lib;
}

const std::string& PromptLibrary::get(std::string_view name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) throw std::out_of_range("unknown prompt resource: " + std::string(name));
    return it->second;
}

void PromptLibrary::set(std::string name, std::string text) { texts_[std::move(name)] = std::move(text); }

std::vector<std::string> PromptLibrary::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : texts_) out.push_back(name);
    return out;
}

std::string PromptLibrary::render(std::string_view name, const std::map<std::string, std::string>& vars) const {
    const std::string& tmpl = get(name);
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string::npos) {
                auto it = vars.find(tmpl.substr(i + 1, close - i - 1));
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

}  // namespace lcr
