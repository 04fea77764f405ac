#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcr/formula.hpp"
#include "lcr/similarity.hpp"

namespace lcr {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A malformed record in a line-delimited file.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::size_t line, std::string field, const std::string& detail);
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// A screened problem carrying one right and one wrong worked attempt.
struct ReferenceExample {
    std::string id;
    std::string question;
    std::string right_reasoning;
    AlignedFormula right_formula;
    std::string wrong_reasoning;
    AlignedFormula wrong_formula;
    std::string explanation;
    double gold_answer = 0.0;
    std::string source_dataset;

    friend bool operator==(const ReferenceExample&, const ReferenceExample&) = default;
};

struct Attempt {
    std::string reasoning;
    std::string formula;              // merged formula text, empty when extraction failed
    std::optional<double> answer;
    bool correct = false;

    friend bool operator==(const Attempt&, const Attempt&) = default;
};

/// Every attempt made on one training problem while screening.
struct ScreeningRecord {
    std::string problem_id;
    std::string question;
    double gold_answer = 0.0;
    std::string source_dataset;
    std::vector<Attempt> attempts;

    std::size_t attempt_count() const noexcept { return attempts.size(); }
    friend bool operator==(const ScreeningRecord&, const ScreeningRecord&) = default;
};

/// Builds an attempt, computing `correct` against the gold answer.
Attempt make_attempt(std::string reasoning, std::string formula, std::optional<double> answer, double gold);

/// Keeps problems with at least one correct and one incorrect attempt, taking
/// the first of each whose formula aligns. Explanations start empty.
std::vector<ReferenceExample> screen(const std::vector<ScreeningRecord>& records);

/// Greedy in-order scan: an example is dropped when its tls against any kept
/// example exceeds cfg.dedup_threshold. Compares questions and right formulas.
std::vector<ReferenceExample> dedup(const std::vector<ReferenceExample>& examples, const SimilarityConfig& cfg,
                                    SemanticProvider& sem);

/// One JSON object per line with fields id, question, right_reasoning,
/// right_formula, wrong_reasoning, wrong_formula, explanation, gold_answer,
/// source_dataset. Formulas are stored as their original text and re-aligned
/// on load.
void save_corpus(const std::vector<ReferenceExample>& examples, const std::filesystem::path& path);
std::vector<ReferenceExample> load_corpus(const std::filesystem::path& path);
std::vector<ReferenceExample> parse_corpus(std::string_view text);

std::string to_jsonl(const ScreeningRecord& record);
void save_screening_log(const std::vector<ScreeningRecord>& records, const std::filesystem::path& path);
std::vector<ScreeningRecord> load_screening_log(const std::filesystem::path& path);
std::vector<ScreeningRecord> parse_screening_log(std::string_view text);

}  // namespace lcr
