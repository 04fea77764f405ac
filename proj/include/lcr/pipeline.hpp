#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lcr/corpus.hpp"
#include "lcr/formula.hpp"
#include "lcr/gateway.hpp"
#include "lcr/prompts.hpp"
#include "lcr/similarity.hpp"

namespace lcr {

/// A dataset problem: one line {"id", "question", "answer"}.
struct Problem {
    std::string id;
    std::string question;
    std::optional<double> answer;
};

std::vector<Problem> parse_dataset(std::string_view text);
std::vector<Problem> load_dataset(const std::filesystem::path& path);

/// Outputs of the three preprocessing prompts and what was extracted from them.
struct PreprocessOutput {
    std::string known_conditions;
    std::string plan_and_solution;
    std::string algebraic_form;                // raw reply to the algebra prompt
    std::vector<std::string> algebraic_steps;  // expressions found in that reply
    std::optional<AlignedFormula> total_formula;
    std::optional<double> final_answer;
};

/// No parseable formula in the algebra reply. `partial` keeps the raw texts.
class ExtractionError : public std::runtime_error {
public:
    ExtractionError(const std::string& msg, PreprocessOutput partial)
        : std::runtime_error(msg), partial_(std::move(partial)) {}
    const PreprocessOutput& partial() const noexcept { return partial_; }

private:
    PreprocessOutput partial_;
};

/// Runs the conditions, plan and algebra prompts as one conversation, then
/// extracts and chains the algebraic steps into a total formula.
PreprocessOutput preprocess(std::string_view question, ChatBackend& backend, const PromptLibrary& prompts = default_prompts(),
                            const DecodingParams& params = {});

struct ScoredExample {
    const ReferenceExample* example = nullptr;
    double score = 0.0;
};

/// Scores every corpus entry against the target and returns the top k by
/// (score desc, id asc). An empty target formula forces alpha = 0.
std::vector<ScoredExample> retrieve_scored(const ProblemKey& target, std::span<const ReferenceExample> corpus,
                                           std::size_t k, const SimilarityConfig& cfg, SemanticProvider& sem);
std::vector<ReferenceExample> retrieve(const ProblemKey& target, std::span<const ReferenceExample> corpus,
                                       std::size_t k, const SimilarityConfig& cfg, SemanticProvider& sem);

/// Header, then per example "Question{i}: ", "Right Answer: ", "Wrong Answer: ",
/// "Explanation: " blocks closed by " |EOS|" (the explanation block is
/// omitted when empty), then the solve instruction and the target question.
/// Blocks are separated by a blank line.
std::string build_contrastive_prompt(std::span<const ReferenceExample> examples, std::string_view question,
                                     const PromptLibrary& prompts = default_prompts());

/// The examples portion of build_contrastive_prompt (header through the last |EOS|).
std::string contrastive_examples_block(std::span<const ReferenceExample> examples, const PromptLibrary& prompts = default_prompts());

/// Last "the answer is <number>" (case-insensitive), else the last number in
/// the text. Currency signs and thousands separators are ignored.
std::optional<double> extract_answer(std::string_view completion);

/// Mode of the extracted answers; ties go to the value seen first. Missing
/// answers abstain.
std::optional<double> majority_vote(std::span<const std::optional<double>> answers);

enum class Strategy { lcr, semantic, logic, fix, hard, contrastive, zero_shot };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy s);

struct SolveOptions {
    std::size_t k = 7;
    int guesses = 10;
    SimilarityConfig similarity;
    DecodingParams decoding;
    Strategy strategy = Strategy::lcr;
};

struct Guess {
    std::string completion;
    std::optional<double> answer;
};

struct RetrievedRef {
    std::string id;
    double score = 0.0;
};

struct SolveTrace {
    std::string problem_id;
    std::string question;
    std::string strategy;
    std::optional<std::string> target_formula;  // aligned text used for retrieval
    std::optional<std::string> preprocess_error;
    std::vector<RetrievedRef> retrieved;
    std::string prompt;
    std::vector<Guess> guesses;
    std::optional<double> voted_answer;
    std::optional<double> gold_answer;
    bool majority_correct = false;
    bool any_correct = false;
};

/// Fills voted_answer, majority_correct and any_correct from the guesses.
void score_trace(SolveTrace& trace);

/// Preprocess, retrieve, build the prompt, sample `guesses` completions and
/// vote. A failed preprocessing step degrades retrieval to semantic-only.
SolveTrace solve(const Problem& problem, std::span<const ReferenceExample> corpus, ChatBackend& backend,
                 SemanticProvider& sem, const SolveOptions& options, const PromptLibrary& prompts = default_prompts());

/// The built-in four-example contrastive set.
std::vector<ReferenceExample> builtin_contrastive_examples(const PromptLibrary& prompts = default_prompts());

}  // namespace lcr
