#include "lcr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "jsonl.hpp"

namespace lcr {

using nlohmann::json;

ErrorKind parse_error_kind(std::string_view name) {
    for (ErrorKind k : all_error_kinds) {
        if (to_string(k) == name) return k;
    }
    throw UnknownKind("unknown error kind: " + std::string(name));
}

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::comprehension: return "comprehension";
    case ErrorKind::calculation: return "calculation";
    case ErrorKind::logic: return "logic";
    case ErrorKind::equation: return "equation";
    }
    return "comprehension";
}

std::vector<ErrorAnnotation> parse_annotations(std::string_view text) {
    std::vector<ErrorAnnotation> out;
    detail::for_each_record(text, [&out](std::size_t line, const json& j) {
        ErrorAnnotation a;
        a.problem_id = detail::require_string(j, line, "problem_id");
        a.kind = parse_error_kind(detail::require_string(j, line, "kind"));
        a.note = j.value("note", "");
        a.annotator = j.value("annotator", "");
        out.push_back(std::move(a));
    });
    return out;
}

std::vector<ErrorAnnotation> load_annotations(const std::filesystem::path& path) {
    return parse_annotations(detail::read_file(path));
}

void save_annotations(const std::vector<ErrorAnnotation>& annotations, const std::filesystem::path& path) {
    std::string out;
    for (const ErrorAnnotation& a : annotations) {
        json j{{"problem_id", a.problem_id}, {"kind", to_string(a.kind)}, {"note", a.note}, {"annotator", a.annotator}};
        out += j.dump() + "\n";
    }
    detail::write_file(path, out);
}

std::string TallyRow::formatted() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu(%.1f%%)", count, percent);
    return buf;
}

const TallyRow& ErrorTally::row(ErrorKind kind) const {
    return rows.at(static_cast<std::size_t>(kind));
}

ErrorTally tally_errors(std::span<const ErrorAnnotation> annotations) {
    ErrorTally t;
    for (ErrorKind k : all_error_kinds) t.rows.push_back({k, 0, 0.0});
    for (const ErrorAnnotation& a : annotations) ++t.rows[static_cast<std::size_t>(a.kind)].count;
    t.total = annotations.size();
    if (t.total == 0) return t;
    for (TallyRow& r : t.rows) {
        r.percent = std::round(1000.0 * static_cast<double>(r.count) / static_cast<double>(t.total)) / 10.0;
    }
    return t;
}

EvalReport evaluate(std::span<const SolveTrace> traces, std::span<const ErrorAnnotation> annotations) {
    EvalReport r;
    for (const SolveTrace& t : traces) {
        if (!t.gold_answer) throw MissingGold(t.problem_id);
        r.per_problem.push_back({t.problem_id, t.voted_answer, *t.gold_answer, t.majority_correct, t.any_correct});
        if (t.majority_correct) ++r.correct;
        if (t.any_correct || t.majority_correct) ++r.latent_correct;
    }
    r.total = traces.size();
    if (r.total > 0) {
        r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
        r.latent_accuracy = static_cast<double>(r.latent_correct) / static_cast<double>(r.total);
    }
    if (!annotations.empty()) {
        const ErrorTally tally = tally_errors(annotations);
        for (const TallyRow& row : tally.rows) r.error_tallies[row.kind] = row.count;
    }
    return r;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional_number(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

std::optional<std::string> read_optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

}  // namespace

json to_json(const SolveTrace& trace) {
    json retrieved = json::array();
    for (const RetrievedRef& r : trace.retrieved) retrieved.push_back({{"id", r.id}, {"score", r.score}});
    json guesses = json::array();
    for (const Guess& g : trace.guesses) {
        guesses.push_back({{"completion", g.completion}, {"answer", optional_number(g.answer)}});
    }
    return json{{"problem_id", trace.problem_id},
                {"question", trace.question},
                {"strategy", trace.strategy},
                {"target_formula", trace.target_formula ? json(*trace.target_formula) : json(nullptr)},
                {"preprocess_error", trace.preprocess_error ? json(*trace.preprocess_error) : json(nullptr)},
                {"retrieved", retrieved},
                {"prompt", trace.prompt},
                {"guesses", guesses},
                {"voted_answer", optional_number(trace.voted_answer)},
                {"gold_answer", optional_number(trace.gold_answer)},
                {"majority_correct", trace.majority_correct},
                {"any_correct", trace.any_correct}};
}

SolveTrace trace_from_json(const json& j) {
    SolveTrace t;
    t.problem_id = j.at("problem_id").get<std::string>();
    t.question = j.value("question", "");
    t.strategy = j.value("strategy", "");
    t.target_formula = read_optional_string(j, "target_formula");
    t.preprocess_error = read_optional_string(j, "preprocess_error");
    for (const json& r : j.value("retrieved", json::array())) {
        t.retrieved.push_back({r.at("id").get<std::string>(), r.at("score").get<double>()});
    }
    t.prompt = j.value("prompt", "");
    for (const json& g : j.value("guesses", json::array())) {
        t.guesses.push_back({g.at("completion").get<std::string>(), read_optional_number(g, "answer")});
    }
    t.voted_answer = read_optional_number(j, "voted_answer");
    t.gold_answer = read_optional_number(j, "gold_answer");
    t.majority_correct = j.value("majority_correct", false);
    t.any_correct = j.value("any_correct", false);
    return t;
}

json to_json(const EvalReport& report) {
    json per = json::array();
    for (const ProblemSummary& p : report.per_problem) {
        per.push_back({{"problem_id", p.problem_id},
                       {"voted_answer", optional_number(p.voted_answer)},
                       {"gold_answer", p.gold_answer},
                       {"majority_correct", p.majority_correct},
                       {"any_correct", p.any_correct}});
    }
    json tallies = json::object();
    for (const auto& [kind, count] : report.error_tallies) tallies[std::string(to_string(kind))] = count;
    return json{{"total", report.total},
                {"correct", report.correct},
                {"accuracy", report.accuracy},
                {"latent_correct", report.latent_correct},
                {"latent_accuracy", report.latent_accuracy},
                {"per_problem", per},
                {"error_tallies", tallies}};
}

void write_report(const EvalReport& report, std::span<const SolveTrace> traces, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::string lines;
    for (const SolveTrace& t : traces) lines += to_json(t).dump() + "\n";
    detail::write_file(dir / "traces.jsonl", lines);
    detail::write_file(dir / "summary.json", to_json(report).dump(2) + "\n");
}

}  // namespace lcr
