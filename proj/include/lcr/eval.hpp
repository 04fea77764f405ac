#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lcr/pipeline.hpp"

namespace lcr {

class MissingGold : public std::invalid_argument {
public:
    explicit MissingGold(const std::string& problem_id)
        : std::invalid_argument("trace " + problem_id + " has no gold answer"), problem_id_(problem_id) {}
    const std::string& problem_id() const noexcept { return problem_id_; }

private:
    std::string problem_id_;
};

class UnknownKind : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ErrorKind { comprehension, calculation, logic, equation };

inline constexpr std::array<ErrorKind, 4> all_error_kinds = {ErrorKind::comprehension, ErrorKind::calculation,
                                                             ErrorKind::logic, ErrorKind::equation};

ErrorKind parse_error_kind(std::string_view name);
std::string_view to_string(ErrorKind kind);

struct ErrorAnnotation {
    std::string problem_id;
    ErrorKind kind = ErrorKind::comprehension;
    std::string note;
    std::string annotator;

    friend bool operator==(const ErrorAnnotation&, const ErrorAnnotation&) = default;
};

std::vector<ErrorAnnotation> parse_annotations(std::string_view text);
std::vector<ErrorAnnotation> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::vector<ErrorAnnotation>& annotations, const std::filesystem::path& path);

struct TallyRow {
    ErrorKind kind;
    std::size_t count = 0;
    double percent = 0.0;  // rounded to one decimal

    std::string formatted() const;  // "10(35.7%)"
};

struct ErrorTally {
    std::vector<TallyRow> rows;  // one per kind, in declaration order
    std::size_t total = 0;

    const TallyRow& row(ErrorKind kind) const;
};

ErrorTally tally_errors(std::span<const ErrorAnnotation> annotations);

struct ProblemSummary {
    std::string problem_id;
    std::optional<double> voted_answer;
    double gold_answer = 0.0;
    bool majority_correct = false;
    bool any_correct = false;
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::size_t latent_correct = 0;
    double latent_accuracy = 0.0;
    std::vector<ProblemSummary> per_problem;
    std::map<ErrorKind, std::size_t> error_tallies;
};

/// Aggregates majority and any-guess correctness. An empty run reports zeros.
EvalReport evaluate(std::span<const SolveTrace> traces, std::span<const ErrorAnnotation> annotations = {});

nlohmann::json to_json(const SolveTrace& trace);
SolveTrace trace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvalReport& report);

/// Writes traces.jsonl (one trace per line) and summary.json into dir.
void write_report(const EvalReport& report, std::span<const SolveTrace> traces, const std::filesystem::path& dir);

}  // namespace lcr
