#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lcr {

/// Named text resources: the three preprocessing prompts, the solve
/// instructions, the contrastive header, the fixed Fix / Hard example
/// blocks and the built-in contrastive example set (JSON lines).
///
/// Defaults are compiled in from resources/; a directory of `<name>.txt`
/// or `<name>.jsonl` files overrides them by name.
class PromptLibrary {
public:
    PromptLibrary();  // built-in defaults

    static PromptLibrary from_directory(const std::filesystem::path& dir);

    const std::string& get(std::string_view name) const;
    void set(std::string name, std::string text);
    std::vector<std::string> names() const;

    /// get(name) with every "{key}" replaced by its value.
    std::string render(std::string_view name, const std::map<std::string, std::string>& vars) const;

private:
    std::map<std::string, std::string, std::less<>> texts_;
};

/// Shared instance holding the built-in defaults.
const PromptLibrary& default_prompts();

namespace prompt_names {
inline constexpr std::string_view conditions = "conditions";
inline constexpr std::string_view plan = "plan";
inline constexpr std::string_view algebra = "algebra";
inline constexpr std::string_view contrastive_header = "contrastive_header";
inline constexpr std::string_view solve_instruction = "solve_instruction";
inline constexpr std::string_view zero_shot_instruction = "zero_shot_instruction";
inline constexpr std::string_view fix_examples = "fix_examples";
inline constexpr std::string_view hard_examples = "hard_examples";
inline constexpr std::string_view contrastive_examples = "contrastive_examples";
}  // namespace prompt_names

}  // namespace lcr
