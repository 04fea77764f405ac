#include "lcr/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include <spdlog/spdlog.h>

#include "jsonl.hpp"
#include "lcr/numeric.hpp"

namespace lcr {

std::vector<Problem> parse_dataset(std::string_view text) {
    std::vector<Problem> out;
    detail::for_each_record(text, [&out](std::size_t line, const nlohmann::json& j) {
        Problem p;
        const auto& id = detail::require(j, line, "id");
        if (id.is_string()) {
            p.id = id.get<std::string>();
        } else if (id.is_number_integer()) {
            p.id = std::to_string(id.get<long long>());
        } else {
            throw SchemaError(line, "id", "expected a string or integer");
        }
        p.question = detail::require_string(j, line, "question");
        if (auto it = j.find("answer"); it != j.end() && !it->is_null()) {
            if (it->is_number()) {
                p.answer = it->get<double>();
            } else if (it->is_string()) {
                p.answer = parse_decimal(it->get<std::string>());
                if (!p.answer) throw SchemaError(line, "answer", "not a decimal number");
            } else {
                throw SchemaError(line, "answer", "expected a number");
            }
        }
        out.push_back(std::move(p));
    });
    return out;
}

std::vector<Problem> load_dataset(const std::filesystem::path& path) { return parse_dataset(detail::read_file(path)); }

PreprocessOutput preprocess(std::string_view question, ChatBackend& backend, const PromptLibrary& prompts,
                            const DecodingParams& params) {
    PreprocessOutput out;
    ChatRequest req;
    req.params = params;
    req.sample_count = 1;

    auto ask = [&](std::string content) {
        req.messages.push_back({"user", std::move(content)});
        std::string reply = backend.complete(req).completions.at(0);
        req.messages.push_back({"assistant", reply});
        return reply;
    };

    out.known_conditions = ask(prompts.render(prompt_names::conditions, {{"question", std::string(question)}}));
    out.plan_and_solution = ask(prompts.get(prompt_names::plan));
    out.algebraic_form = ask(prompts.get(prompt_names::algebra));
    out.final_answer = extract_answer(out.algebraic_form);

    const std::vector<FormulaStep> steps = extract_steps(out.algebraic_form);
    for (const FormulaStep& s : steps) out.algebraic_steps.push_back(s.expression);
    if (steps.empty()) throw ExtractionError("no formula found in the algebraic-form reply", std::move(out));

    const std::vector<std::string> roots = chain_steps(steps);
    try {
        out.total_formula = merge_steps(roots);
    } catch (const MergeError& e) {
        throw ExtractionError(e.what(), std::move(out));
    }
    return out;
}

std::vector<ScoredExample> retrieve_scored(const ProblemKey& target, std::span<const ReferenceExample> corpus,
                                           std::size_t k, const SimilarityConfig& cfg, SemanticProvider& sem) {
    if (k == 0) throw std::invalid_argument("retrieve: k must be >= 1");
    if (corpus.empty()) throw std::invalid_argument("retrieve: corpus is empty");
    SimilarityConfig effective = cfg;
    if (target.formula.empty()) effective.alpha = 0.0;
    effective.validate();

    std::vector<ScoredExample> scored;
    scored.reserve(corpus.size());
    for (const ReferenceExample& ex : corpus) {
        scored.push_back({&ex, tls(target, {ex.question, ex.right_formula.text}, effective, sem)});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredExample& a, const ScoredExample& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.example->id < b.example->id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

std::vector<ReferenceExample> retrieve(const ProblemKey& target, std::span<const ReferenceExample> corpus,
                                       std::size_t k, const SimilarityConfig& cfg, SemanticProvider& sem) {
    std::vector<ReferenceExample> out;
    for (const ScoredExample& s : retrieve_scored(target, corpus, k, cfg, sem)) out.push_back(*s.example);
    return out;
}

std::string contrastive_examples_block(std::span<const ReferenceExample> examples, const PromptLibrary& prompts) {
    std::string out = prompts.get(prompt_names::contrastive_header);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const ReferenceExample& ex = examples[i];
        out += "\n\nQuestion" + std::to_string(i + 1) + ": " + ex.question;
        out += "\n\nRight Answer: " + ex.right_reasoning;
        out += "\n\nWrong Answer: " + ex.wrong_reasoning;
        if (!ex.explanation.empty()) out += "\n\nExplanation: " + ex.explanation;
        out += " |EOS|";
    }
    return out;
}

std::string build_contrastive_prompt(std::span<const ReferenceExample> examples, std::string_view question,
                                     const PromptLibrary& prompts) {
    if (examples.empty()) throw std::invalid_argument("build_contrastive_prompt: no examples");
    std::string out = contrastive_examples_block(examples, prompts);
    out += "\n\n" + prompts.get(prompt_names::solve_instruction);
    out += "\n\nQuestion: ";
    out += question;
    out += "\n\nAnswer:";
    return out;
}

namespace {

const std::regex& number_pattern() {
    static const std::regex re(R"((-?)((?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?))");
    return re;
}

std::optional<double> number_at(const std::smatch& m, const std::string& text) {
    auto value = parse_decimal(m[2].str());
    if (!value) return std::nullopt;
    const auto pos = static_cast<std::size_t>(m.position(0));
    // "74-35" is subtraction, not a negative literal.
    const bool negative = m[1].length() > 0 &&
                          (pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1])));
    return negative ? -*value : *value;
}

}  // namespace

std::optional<double> extract_answer(std::string_view completion) {
    const std::string text(completion);
    static const std::regex phrase(R"(the answer is[\s:$\\*]*(-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?))",
                                   std::regex::icase);
    std::optional<double> found;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), phrase); it != std::sregex_iterator(); ++it) {
        if (auto v = parse_decimal((*it)[1].str())) found = v;
    }
    if (found) return found;

    for (auto it = std::sregex_iterator(text.begin(), text.end(), number_pattern()); it != std::sregex_iterator();
         ++it) {
        if (auto v = number_at(*it, text)) found = v;
    }
    return found;
}

std::optional<double> majority_vote(std::span<const std::optional<double>> answers) {
    struct Tally {
        double value;
        std::size_t count;
        std::size_t first;
    };
    std::vector<Tally> tallies;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (!answers[i]) continue;
        auto it = std::find_if(tallies.begin(), tallies.end(), [&](const Tally& t) { return t.value == *answers[i]; });
        if (it == tallies.end()) {
            tallies.push_back({*answers[i], 1, i});
        } else {
            ++it->count;
        }
    }
    if (tallies.empty()) return std::nullopt;
    const auto best = std::min_element(tallies.begin(), tallies.end(), [](const Tally& a, const Tally& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.first < b.first;
    });
    return best->value;
}

Strategy parse_strategy(std::string_view name) {
    if (name == "lcr") return Strategy::lcr;
    if (name == "semantic") return Strategy::semantic;
    if (name == "logic") return Strategy::logic;
    if (name == "fix") return Strategy::fix;
    if (name == "hard") return Strategy::hard;
    if (name == "contrastive") return Strategy::contrastive;
    if (name == "zero-shot") return Strategy::zero_shot;
    throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::lcr: return "lcr";
    case Strategy::semantic: return "semantic";
    case Strategy::logic: return "logic";
    case Strategy::fix: return "fix";
    case Strategy::hard: return "hard";
    case Strategy::contrastive: return "contrastive";
    case Strategy::zero_shot: return "zero-shot";
    }
    return "lcr";
}

void score_trace(SolveTrace& trace) {
    std::vector<std::optional<double>> answers;
    answers.reserve(trace.guesses.size());
    for (const Guess& g : trace.guesses) answers.push_back(g.answer);
    trace.voted_answer = majority_vote(answers);
    trace.majority_correct = false;
    trace.any_correct = false;
    if (!trace.gold_answer) return;
    const double gold = *trace.gold_answer;
    trace.majority_correct = trace.voted_answer && answers_match(*trace.voted_answer, gold);
    trace.any_correct = std::any_of(answers.begin(), answers.end(),
                                    [gold](const std::optional<double>& a) { return a && answers_match(*a, gold); });
}

std::vector<ReferenceExample> builtin_contrastive_examples(const PromptLibrary& prompts) {
    return parse_corpus(prompts.get(prompt_names::contrastive_examples));
}

SolveTrace solve(const Problem& problem, std::span<const ReferenceExample> corpus, ChatBackend& backend,
                 SemanticProvider& sem, const SolveOptions& options, const PromptLibrary& prompts) {
    if (options.guesses < 1) throw std::invalid_argument("solve: guesses must be >= 1");
    SolveTrace trace;
    trace.problem_id = problem.id;
    trace.question = problem.question;
    trace.gold_answer = problem.answer;
    trace.strategy = std::string(to_string(options.strategy));

    switch (options.strategy) {
    case Strategy::lcr:
    case Strategy::logic:
    case Strategy::semantic: {
        SimilarityConfig cfg = options.similarity;
        if (options.strategy == Strategy::logic) cfg.alpha = 1.0;
        if (options.strategy == Strategy::semantic) {
            cfg.alpha = 0.0;
        } else {
            try {
                PreprocessOutput pre = preprocess(problem.question, backend, prompts, options.decoding);
                trace.target_formula = pre.total_formula->text;
            } catch (const ExtractionError& e) {
                trace.preprocess_error = e.what();
                spdlog::info("problem {}: {}; falling back to semantic-only retrieval", problem.id, e.what());
            }
        }
        const std::string formula = trace.target_formula.value_or("");
        const auto scored = retrieve_scored({problem.question, formula}, corpus, options.k, cfg, sem);
        std::vector<ReferenceExample> refs;
        for (const ScoredExample& s : scored) {
            trace.retrieved.push_back({s.example->id, s.score});
            refs.push_back(*s.example);
        }
        trace.prompt = build_contrastive_prompt(refs, problem.question, prompts);
        break;
    }
    case Strategy::contrastive:
        trace.prompt = build_contrastive_prompt(builtin_contrastive_examples(prompts), problem.question, prompts);
        break;
    case Strategy::fix:
    case Strategy::hard:
        trace.prompt = prompts.get(options.strategy == Strategy::fix ? prompt_names::fix_examples
                                                                     : prompt_names::hard_examples) +
                       "\n\nQ: " + problem.question + "\n\nA:";
        break;
    case Strategy::zero_shot:
        trace.prompt = prompts.get(prompt_names::zero_shot_instruction) + "\n\nQuestion: " + problem.question +
                       "\n\nAnswer:";
        break;
    }

    ChatRequest req;
    req.messages.push_back({"user", trace.prompt});
    req.params = options.decoding;
    req.sample_count = options.guesses;
    const ChatResponse resp = backend.complete(req);
    for (const std::string& c : resp.completions) trace.guesses.push_back({c, extract_answer(c)});
    score_trace(trace);
    return trace;
}

}  // namespace lcr
