#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "lcr/commands.hpp"

using namespace lcr;
using lcr::testing::script_preprocess;
using lcr::testing::script_prompt;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lcr_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_script(const fs::path& p, const MockBackend::Script& script) {
    std::string out;
    for (const auto& [fp, completions] : script) {
        out += nlohmann::json{{"fingerprint", fp}, {"completions", completions}}.dump() + "\n";
    }
    write(p, out);
}

std::string zero_shot_prompt(const std::string& q) {
    return default_prompts().get(prompt_names::zero_shot_instruction) + "\n\nQuestion: " + q + "\n\nAnswer:";
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, SimdistExample) {
    const CliRun r = cli({"simdist", "A*(B+C+D)*B", "A*(B+C)*B"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("N: 0.2000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("TD: 0.2500"), std::string::npos);
    EXPECT_NE(r.out.find("logic_similarity: 0.8750"), std::string::npos);
}

TEST(Cli, SimdistIdenticalAndMalformed) {
    const CliRun same = cli({"simdist", "x+y", "a+b"});
    EXPECT_EQ(same.code, 0);
    EXPECT_NE(same.out.find("N: 0.0000"), std::string::npos);
    EXPECT_NE(same.out.find("logic_similarity: 1.0000"), std::string::npos);
    const CliRun bad = cli({"simdist", "(a+", "b"});
    EXPECT_NE(bad.code, 0);
    EXPECT_NE(bad.err.find("position"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"frobnicate"}).code, 1);
    EXPECT_EQ(cli({"simdist", "a"}).code, 1);
    EXPECT_EQ(cli({"--help"}).code, 0);
    const fs::path dir = fresh_dir("usage");
    EXPECT_EQ(cli({"eval", "--alpha", "1.5", "--dataset", "x", "-o", dir.string()}).code, 1);
    EXPECT_EQ(cli({"eval", "--strategy", "magic", "-o", dir.string()}).code, 1);
}

TEST(Cli, ConfigRejectsUnknownKeys) {
    const fs::path dir = fresh_dir("config");
    write(dir / "cfg.json", R"({"alpha": 0.5, "colour": "blue"})");
    EXPECT_THROW(load_config(dir / "cfg.json"), ConfigError);
    EXPECT_EQ(cli({"eval", "--config", (dir / "cfg.json").string()}).code, 1);
}

TEST(Cli, ConfigRoundTrip) {
    RunConfig c;
    c.alpha = 0.4;
    c.k = 3;
    c.strategy = "semantic";
    c.decoding.top_k = 12;
    const RunConfig back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Cli, SubsampleIsSeededAndOrdered) {
    std::vector<Problem> ps;
    for (int i = 0; i < 20; ++i) ps.push_back({std::to_string(i), "q", 1.0});
    RunConfig c;
    c.limit = 5;
    c.seed = 3;
    const auto a = select_problems(ps, c);
    const auto b = select_problems(ps, c);
    ASSERT_EQ(a.size(), 5u);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].id, b[i].id);
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(std::stoi(a[i - 1].id), std::stoi(a[i].id));
    c.limit = 0;
    EXPECT_EQ(select_problems(ps, c).size(), 20u);
}

TEST(Cli, PreprocessWritesResumableLog) {
    const fs::path dir = fresh_dir("preprocess");
    write(dir / "train.jsonl", R"({"id":"a","question":"What is 2 + 3?","answer":5})"
                               "\n"
                               R"({"id":"b","question":"What is 4 * 6?","answer":24})"
                               "\n");
    MockBackend::Script script;
    script_preprocess(script, "What is 2 + 3?", "c", "p", "2 + 3 = 5. The answer is 5.");
    script_preprocess(script, "What is 4 * 6?", "c", "p", "4 + 6 = 10. The answer is 10.");
    write_script(dir / "script.jsonl", script);
    const std::vector<std::string> args{"preprocess", "--dataset", (dir / "train.jsonl").string(), "--mock-script",
                                        (dir / "script.jsonl").string(), "--attempts", "3", "-o", dir.string()};
    const CliRun r = cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto log = load_screening_log(dir / "screening.jsonl");
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[0].attempt_count(), 3u);
    EXPECT_TRUE(log[0].attempts[0].correct);
    EXPECT_FALSE(log[1].attempts[0].correct);
    EXPECT_EQ(log[1].attempts[0].formula, "4 + 6");
    EXPECT_TRUE(fs::exists(dir / "config.json"));

    // A rerun skips both problems; a torn final line is dropped and redone.
    const std::string full = read(dir / "screening.jsonl");
    ASSERT_EQ(cli(args).code, 0);
    EXPECT_EQ(read(dir / "screening.jsonl"), full);
    const auto first_end = full.find('\n');
    write(dir / "screening.jsonl", full.substr(0, first_end + 1) + full.substr(first_end + 1, 40));
    ASSERT_EQ(cli(args).code, 0);
    EXPECT_EQ(read(dir / "screening.jsonl"), full);
}

TEST(Cli, PreprocessMissingDatasetIsDataError) {
    const fs::path dir = fresh_dir("missing");
    EXPECT_EQ(cli({"preprocess", "--dataset", (dir / "nope.jsonl").string(), "-o", dir.string()}).code, 2);
}

TEST(Cli, BuildCorpus) {
    const fs::path dir = fresh_dir("build");
    auto rec = [](std::string id, std::string q, std::vector<std::pair<std::string, double>> attempts) {
        ScreeningRecord r{std::move(id), std::move(q), 10, "toy", {}};
        for (auto& [f, a] : attempts) r.attempts.push_back(make_attempt("r", f, a, 10));
        return r;
    };
    save_screening_log({rec("1", "Q one", {{"4+6", 10}, {"4*6", 24}}), rec("2", "Q two", {{"4+6", 10}}),
                        rec("3", "Q three", {{"4*6", 24}})},
                       dir / "log.jsonl");
    CliRun r = cli({"build-corpus", "--screening-log", (dir / "log.jsonl").string(), "-o", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load_corpus(dir / "corpus.jsonl").size(), 1u);

    save_screening_log({rec("1", "Same", {{"4+6", 10}, {"4*6", 24}}), rec("2", "Same", {{"5+7", 10}, {"1", 1}})},
                       dir / "dups.jsonl");
    r = cli({"build-corpus", "--screening-log", (dir / "dups.jsonl").string(), "--corpus",
             (dir / "dedup.jsonl").string(), "-o", dir.string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(load_corpus(dir / "dedup.jsonl").size(), 1u);

    write(dir / "empty.jsonl", "");
    r = cli({"build-corpus", "--screening-log", (dir / "empty.jsonl").string(), "--corpus",
             (dir / "none.jsonl").string(), "-o", dir.string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(load_corpus(dir / "none.jsonl").empty());
}

namespace {

// Five problems; per-guess answers chosen so 3 are majority-correct and 4 latent-correct.
void five_problem_fixture(const fs::path& dir) {
    const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
        {"What is 1 + 1?", {"The answer is 2", "The answer is 2", "The answer is 3"}},
        {"What is 2 + 2?", {"The answer is 4", "The answer is 5", "The answer is 4"}},
        {"What is 3 + 3?", {"The answer is 6", "The answer is 6", "The answer is 6"}},
        {"What is 4 + 4?", {"The answer is 9", "The answer is 9", "The answer is 8"}},
        {"What is 5 + 5?", {"The answer is 11", "no idea", "The answer is 12"}},
    };
    std::string data;
    MockBackend::Script script;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double gold = 2.0 * static_cast<double>(i + 1);
        data += nlohmann::json{{"id", "p" + std::to_string(i)}, {"question", cases[i].first}, {"answer", gold}}.dump() +
                "\n";
        script_prompt(script, zero_shot_prompt(cases[i].first), cases[i].second);
    }
    write(dir / "test.jsonl", data);
    write_script(dir / "script.jsonl", script);
}

}  // namespace

TEST(Cli, EvalScriptedAccuracy) {
    const fs::path dir = fresh_dir("eval");
    five_problem_fixture(dir);
    const std::vector<std::string> args{"eval",          "--dataset", (dir / "test.jsonl").string(),
                                        "--mock-script", (dir / "script.jsonl").string(),
                                        "--strategy",    "zero-shot", "--guesses", "3", "--parallelism", "3",
                                        "-o",            (dir / "run1").string()};
    const CliRun r = cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = nlohmann::json::parse(read(dir / "run1" / "summary.json"));
    EXPECT_EQ(summary["total"], 5);
    EXPECT_DOUBLE_EQ(summary["accuracy"].get<double>(), 0.6);
    EXPECT_DOUBLE_EQ(summary["latent_accuracy"].get<double>(), 0.8);

    // Re-running from the echoed config is byte-identical.
    const CliRun again = cli({"eval", "--config", (dir / "run1" / "config.json").string(), "-o", (dir / "run2").string()});
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(read(dir / "run1" / "traces.jsonl"), read(dir / "run2" / "traces.jsonl"));
    EXPECT_EQ(read(dir / "run1" / "summary.json"), read(dir / "run2" / "summary.json"));
    EXPECT_EQ(line_count(read(dir / "run1" / "traces.jsonl")), 5u);
}

TEST(Cli, EvalSingleGuess) {
    const fs::path dir = fresh_dir("eval1");
    five_problem_fixture(dir);
    const CliRun r = cli({"eval", "--dataset", (dir / "test.jsonl").string(), "--mock-script",
                       (dir / "script.jsonl").string(), "--strategy", "zero-shot", "--guesses", "1", "-o",
                       dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    // First scripted guess per problem: 2, 4, 6, 9, 11 against 2, 4, 6, 8, 10.
    const auto summary = nlohmann::json::parse(read(dir / "summary.json"));
    EXPECT_DOUBLE_EQ(summary["accuracy"].get<double>(), 0.6);
    EXPECT_DOUBLE_EQ(summary["latent_accuracy"].get<double>(), 0.6);
}

TEST(Cli, EvalUnscriptedPromptIsBackendError) {
    const fs::path dir = fresh_dir("eval_unknown");
    five_problem_fixture(dir);
    const CliRun r = cli({"eval", "--dataset", (dir / "test.jsonl").string(), "--strategy", "zero-shot",
                       "--mock-dump-unknown", (dir / "unknown.jsonl").string(), "-o", dir.string()});
    EXPECT_EQ(r.code, 3);
    EXPECT_GE(line_count(read(dir / "unknown.jsonl")), 1u);
}

TEST(Cli, EvalKLargerThanCorpus) {
    const fs::path dir = fresh_dir("eval_k");
    write(dir / "test.jsonl", R"({"id":"1","question":"What is 1 + 1?","answer":2})" "\n");
    ReferenceExample ex;
    ex.id = "only";
    ex.question = "What is 3 + 4?";
    ex.right_reasoning = "3 + 4 = 7";
    ex.right_formula = align_variables("3+4");
    ex.wrong_reasoning = "3 * 4 = 12";
    ex.wrong_formula = align_variables("3*4");
    ex.gold_answer = 7;
    save_corpus({ex}, dir / "corpus.jsonl");
    const CliRun r = cli({"eval", "--dataset", (dir / "test.jsonl").string(), "--corpus",
                       (dir / "corpus.jsonl").string(), "--mock-lenient", "--k", "7", "--guesses", "2", "-o",
                       dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const SolveTrace t = trace_from_json(nlohmann::json::parse(read(dir / "traces.jsonl")));
    ASSERT_EQ(t.retrieved.size(), 1u);
    EXPECT_EQ(t.retrieved[0].id, "only");
}

TEST(Cli, RetrieveAndSolve) {
    const fs::path dir = fresh_dir("retrieve");
    ReferenceExample a;
    a.id = "add";
    a.question = "Tom has 3 apples and buys 4 more.";
    a.right_formula = align_variables("3+4");
    a.wrong_formula = align_variables("3*4");
    a.gold_answer = 7;
    ReferenceExample b = a;
    b.id = "mul";
    b.question = "A box holds 6 rows of 5 eggs.";
    b.right_formula = align_variables("6*5");
    save_corpus({a, b}, dir / "corpus.jsonl");
    CliRun r = cli({"retrieve", "--corpus", (dir / "corpus.jsonl").string(), "--question", "Ann has 2 pears and buys 5.",
                 "--formula", "2+5", "-k", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("add\t", 0), 0u) << r.out;

    MockBackend::Script script;
    script_prompt(script, zero_shot_prompt("What is 6 * 7?"), {"The answer is 42"});
    write_script(dir / "script.jsonl", script);
    r = cli({"solve", "--question", "What is 6 * 7?", "--answer", "42", "--strategy", "zero-shot", "--guesses", "1",
             "--mock-script", (dir / "script.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("voted: 42"), std::string::npos);
    EXPECT_NE(r.out.find("majority_correct: true"), std::string::npos);
}
