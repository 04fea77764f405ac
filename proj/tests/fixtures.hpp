#pragma once

#include <string>
#include <vector>

#include "lcr/gateway.hpp"
#include "lcr/prompts.hpp"

namespace lcr::testing {

/// Scripts the three preprocessing turns for one question.
inline void script_preprocess(MockBackend::Script& script, const std::string& question, const std::string& r1,
                              const std::string& r2, const std::string& r3,
                              const PromptLibrary& prompts = default_prompts()) {
    std::vector<Message> msgs{{"user", prompts.render(prompt_names::conditions, {{"question", question}})}};
    script[fingerprint(msgs)].push_back(r1);
    msgs.push_back({"assistant", r1});
    msgs.push_back({"user", prompts.get(prompt_names::plan)});
    script[fingerprint(msgs)].push_back(r2);
    msgs.push_back({"assistant", r2});
    msgs.push_back({"user", prompts.get(prompt_names::algebra)});
    script[fingerprint(msgs)].push_back(r3);
}

/// Scripts the final single-prompt solve call.
inline void script_prompt(MockBackend::Script& script, const std::string& prompt,
                          const std::vector<std::string>& completions) {
    auto& slot = script[fingerprint({{"user", prompt}})];
    slot.insert(slot.end(), completions.begin(), completions.end());
}

}  // namespace lcr::testing
