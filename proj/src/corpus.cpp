#include "lcr/corpus.hpp"

#include <spdlog/spdlog.h>

#include "jsonl.hpp"
#include "lcr/numeric.hpp"

namespace lcr {

SchemaError::SchemaError(std::size_t line, std::string field, const std::string& detail)
    : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + detail),
      line_(line),
      field_(std::move(field)) {}

Attempt make_attempt(std::string reasoning, std::string formula, std::optional<double> answer, double gold) {
    Attempt a;
    a.reasoning = std::move(reasoning);
    a.formula = std::move(formula);
    a.answer = answer;
    a.correct = answer.has_value() && answers_match(*answer, gold);
    return a;
}

namespace {

std::optional<std::pair<const Attempt*, AlignedFormula>> first_aligned(const std::vector<Attempt>& attempts,
                                                                         bool want_correct) {
    for (const Attempt& a : attempts) {
        if (a.correct != want_correct) continue;
        try {
            return std::make_pair(&a, align_variables(a.formula));
        } catch (const ParseError&) {
            continue;
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<ReferenceExample> screen(const std::vector<ScreeningRecord>& records) {
    std::vector<ReferenceExample> out;
    for (const ScreeningRecord& rec : records) {
        auto right = first_aligned(rec.attempts, true);
        auto wrong = first_aligned(rec.attempts, false);
        if (!right || !wrong) {
            const bool mixed = std::any_of(rec.attempts.begin(), rec.attempts.end(), [](const Attempt& a) { return a.correct; }) &&
                               std::any_of(rec.attempts.begin(), rec.attempts.end(), [](const Attempt& a) { return !a.correct; });
            if (mixed) spdlog::warn("screen: problem {} has mixed outcomes but no usable formula", rec.problem_id);
            continue;
        }
        ReferenceExample ex;
        ex.id = rec.problem_id;
        ex.question = rec.question;
        ex.right_reasoning = right->first->reasoning;
        ex.right_formula = std::move(right->second);
        ex.wrong_reasoning = wrong->first->reasoning;
        ex.wrong_formula = std::move(wrong->second);
        ex.gold_answer = rec.gold_answer;
        ex.source_dataset = rec.source_dataset;
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<ReferenceExample> dedup(const std::vector<ReferenceExample>& examples, const SimilarityConfig& cfg,
                                    SemanticProvider& sem) {
    cfg.validate();
    std::vector<ReferenceExample> kept;
    for (const ReferenceExample& candidate : examples) {
        const ProblemKey key{candidate.question, candidate.right_formula.text};
        bool duplicate = false;
        for (const ReferenceExample& k : kept) {
            if (tls(key, {k.question, k.right_formula.text}, cfg, sem) > cfg.dedup_threshold) {
                duplicate = true;
                spdlog::debug("dedup: dropping {} as near-duplicate of {}", candidate.id, k.id);
                break;
            }
        }
        if (!duplicate) kept.push_back(candidate);
    }
    return kept;
}

namespace {

nlohmann::json to_json(const ReferenceExample& ex) {
    return {{"id", ex.id},
            {"question", ex.question},
            {"right_reasoning", ex.right_reasoning},
            {"right_formula", ex.right_formula.origin},
            {"wrong_reasoning", ex.wrong_reasoning},
            {"wrong_formula", ex.wrong_formula.origin},
            {"explanation", ex.explanation},
            {"gold_answer", ex.gold_answer},
            {"source_dataset", ex.source_dataset}};
}

AlignedFormula require_formula(const nlohmann::json& j, std::size_t line, const char* field) {
    const std::string text = detail::require_string(j, line, field);
    try {
        return align_variables(text);
    } catch (const ParseError& e) {
        throw SchemaError(line, field, std::string("not a valid formula: ") + e.what());
    }
}

}  // namespace

void save_corpus(const std::vector<ReferenceExample>& examples, const std::filesystem::path& path) {
    std::string out;
    for (const auto& ex : examples) out += to_json(ex).dump() + "\n";
    detail::write_file(path, out);
}

std::vector<ReferenceExample> parse_corpus(std::string_view text) {
    std::vector<ReferenceExample> out;
    detail::for_each_record(text, [&out](std::size_t line, const nlohmann::json& j) {
        ReferenceExample ex;
        ex.id = detail::require_string(j, line, "id");
        ex.question = detail::require_string(j, line, "question");
        ex.right_reasoning = detail::require_string(j, line, "right_reasoning");
        ex.right_formula = require_formula(j, line, "right_formula");
        ex.wrong_reasoning = detail::require_string(j, line, "wrong_reasoning");
        ex.wrong_formula = require_formula(j, line, "wrong_formula");
        ex.explanation = detail::require_string(j, line, "explanation");
        ex.gold_answer = detail::require_number(j, line, "gold_answer");
        ex.source_dataset = detail::require_string(j, line, "source_dataset");
        out.push_back(std::move(ex));
    });
    return out;
}

std::vector<ReferenceExample> load_corpus(const std::filesystem::path& path) {
    return parse_corpus(detail::read_file(path));
}

std::string to_jsonl(const ScreeningRecord& record) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const Attempt& a : record.attempts) {
        attempts.push_back({{"reasoning", a.reasoning},
                            {"formula", a.formula},
                            {"answer", a.answer ? nlohmann::json(*a.answer) : nlohmann::json(nullptr)},
                            {"correct", a.correct}});
    }
    nlohmann::json j = {{"problem_id", record.problem_id},
                        {"question", record.question},
                        {"gold_answer", record.gold_answer},
                        {"source_dataset", record.source_dataset},
                        {"attempt_count", record.attempts.size()},
                        {"attempts", attempts}};
    return j.dump() + "\n";
}

void save_screening_log(const std::vector<ScreeningRecord>& records, const std::filesystem::path& path) {
    std::string out;
    for (const auto& r : records) out += to_jsonl(r);
    detail::write_file(path, out);
}

std::vector<ScreeningRecord> parse_screening_log(std::string_view text) {
    std::vector<ScreeningRecord> out;
    detail::for_each_record(text, [&out](std::size_t line, const nlohmann::json& j) {
        ScreeningRecord rec;
        rec.problem_id = detail::require_string(j, line, "problem_id");
        rec.question = detail::require_string(j, line, "question");
        rec.gold_answer = detail::require_number(j, line, "gold_answer");
        rec.source_dataset = j.value("source_dataset", std::string{});
        const auto& attempts = detail::require(j, line, "attempts");
        if (!attempts.is_array()) throw SchemaError(line, "attempts", "expected an array");
        for (const auto& a : attempts) {
            if (!a.is_object()) throw SchemaError(line, "attempts", "expected objects");
            Attempt at;
            at.reasoning = detail::require_string(a, line, "reasoning");
            at.formula = detail::require_string(a, line, "formula");
            const auto& ans = detail::require(a, line, "answer");
            if (ans.is_number()) {
                at.answer = ans.get<double>();
            } else if (!ans.is_null()) {
                throw SchemaError(line, "answer", "expected a number or null");
            }
            // Correctness is recomputed so the admission rule is re-checkable.
            at.correct = at.answer.has_value() && answers_match(*at.answer, rec.gold_answer);
            rec.attempts.push_back(std::move(at));
        }
        if (auto it = j.find("attempt_count"); it != j.end() && it->is_number_unsigned() &&
                                               it->get<std::size_t>() != rec.attempts.size()) {
            throw SchemaError(line, "attempt_count", "does not match the attempts array");
        }
        out.push_back(std::move(rec));
    });
    return out;
}

std::vector<ScreeningRecord> load_screening_log(const std::filesystem::path& path) {
    return parse_screening_log(detail::read_file(path));
}

}  // namespace lcr
