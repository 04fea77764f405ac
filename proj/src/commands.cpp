#include "lcr/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "jsonl.hpp"
#include "lcr/numeric.hpp"
#include "lcr/semantic.hpp"

namespace lcr {

using nlohmann::json;

namespace {

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void require_range(bool ok, const char* field, const std::string& detail) {
    if (!ok) throw ConfigError(std::string(field) + ": " + detail);
}

bool needs_corpus(Strategy s) { return s == Strategy::lcr || s == Strategy::semantic || s == Strategy::logic; }

SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions o;
    o.k = static_cast<std::size_t>(cfg.k);
    o.guesses = cfg.guesses;
    o.similarity.alpha = cfg.alpha;
    o.similarity.dedup_threshold = cfg.dedup_threshold;
    o.decoding = cfg.decoding;
    o.strategy = parse_strategy(cfg.strategy);
    return o;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The exception of
/// the lowest failing index is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex m;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(m);
                        if (i < failed_at) {
                            failed_at = i;
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<Problem> load_problems(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("dataset: required");
    return select_problems(load_dataset(cfg.dataset), cfg);
}

std::vector<ReferenceExample> load_corpus_for(const RunConfig& cfg) {
    if (cfg.corpus.empty() && !std::filesystem::exists(cfg.corpus_path())) {
        throw ConfigError("corpus: required for strategy " + cfg.strategy);
    }
    return load_corpus(cfg.corpus_path());
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void RunConfig::validate() const {
    require_range(backend == "mock" || backend == "remote", "backend", "expected mock or remote");
    require_range(backend != "remote" || !endpoint.empty(), "endpoint", "required for the remote backend");
    require_range(dialect == "extended" || dialect == "openai", "dialect", "expected extended or openai");
    require_range(timeout_ms > 0, "timeout_ms", "must be positive");
    require_range(alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
    require_range(k >= 1, "k", "must be >= 1");
    require_range(guesses >= 1 && guesses <= 1024, "guesses", "must lie in [1, 1024]");
    require_range(attempts >= 1 && attempts <= 1024, "attempts", "must lie in [1, 1024]");
    require_range(dedup_threshold >= 0.0, "dedup_threshold", "must be >= 0");
    require_range(parallelism >= 1 && parallelism <= 1024, "parallelism", "must lie in [1, 1024]");
    require_range(limit >= 0, "limit", "must be >= 0");
    require_range(!output_dir.empty(), "output_dir", "must not be empty");
    try {
        parse_strategy(strategy);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("strategy: ") + e.what());
    }
    require_range(embedding == "offline" || embedding == "remote", "embedding", "expected offline or remote");
    require_range(embedding != "remote" || !embedding_endpoint.empty(), "embedding_endpoint",
                  "required for remote embeddings");
    require_range(decoding.max_new_tokens >= 1, "max_new_tokens", "must be >= 1");
    require_range(decoding.temperature >= 0.0, "temperature", "must be >= 0");
    require_range(decoding.top_p > 0.0 && decoding.top_p <= 1.0, "top_p", "must lie in (0, 1]");
    require_range(decoding.top_k >= 0, "top_k", "must be >= 0");
    require_range(decoding.repetition_penalty > 0.0, "repetition_penalty", "must be positive");
}

std::filesystem::path RunConfig::screening_log_path() const {
    if (!screening_log.empty()) return screening_log;
    return std::filesystem::path(output_dir) / "screening.jsonl";
}

std::filesystem::path RunConfig::corpus_path() const {
    if (!corpus.empty()) return corpus;
    return std::filesystem::path(output_dir) / "corpus.jsonl";
}

json to_json(const RunConfig& c) {
    return json{{"dataset", c.dataset},
                {"corpus", c.corpus},
                {"screening_log", c.screening_log},
                {"backend", c.backend},
                {"endpoint", c.endpoint},
                {"model", c.model},
                {"api_key_env", c.api_key_env},
                {"dialect", c.dialect},
                {"native_multi_sample", c.native_multi_sample},
                {"timeout_ms", c.timeout_ms},
                {"mock_script", c.mock_script},
                {"mock_strict", c.mock_strict},
                {"alpha", c.alpha},
                {"k", c.k},
                {"guesses", c.guesses},
                {"attempts", c.attempts},
                {"dedup_threshold", c.dedup_threshold},
                {"parallelism", c.parallelism},
                {"output_dir", c.output_dir},
                {"seed", c.seed},
                {"limit", c.limit},
                {"strategy", c.strategy},
                {"embedding", c.embedding},
                {"embedding_endpoint", c.embedding_endpoint},
                {"embedding_model", c.embedding_model},
                {"prompt_dir", c.prompt_dir},
                {"max_new_tokens", c.decoding.max_new_tokens},
                {"temperature", c.decoding.temperature},
                {"top_p", c.decoding.top_p},
                {"top_k", c.decoding.top_k},
                {"repetition_penalty", c.decoding.repetition_penalty}};
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    RunConfig c;
    const json defaults = to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    auto get = [&j](const char* key, auto& field) {
        auto it = j.find(key);
        if (it == j.end()) return;
        try {
            it->get_to(field);
        } catch (const json::exception&) {
            throw ConfigError(std::string("config: bad value for '") + key + "'");
        }
    };
    get("dataset", c.dataset);
    get("corpus", c.corpus);
    get("screening_log", c.screening_log);
    get("backend", c.backend);
    get("endpoint", c.endpoint);
    get("model", c.model);
    get("api_key_env", c.api_key_env);
    get("dialect", c.dialect);
    get("native_multi_sample", c.native_multi_sample);
    get("timeout_ms", c.timeout_ms);
    get("mock_script", c.mock_script);
    get("mock_strict", c.mock_strict);
    get("alpha", c.alpha);
    get("k", c.k);
    get("guesses", c.guesses);
    get("attempts", c.attempts);
    get("dedup_threshold", c.dedup_threshold);
    get("parallelism", c.parallelism);
    get("output_dir", c.output_dir);
    get("seed", c.seed);
    get("limit", c.limit);
    get("strategy", c.strategy);
    get("embedding", c.embedding);
    get("embedding_endpoint", c.embedding_endpoint);
    get("embedding_model", c.embedding_model);
    get("prompt_dir", c.prompt_dir);
    get("max_new_tokens", c.decoding.max_new_tokens);
    get("temperature", c.decoding.temperature);
    get("top_p", c.decoding.top_p);
    get("top_k", c.decoding.top_k);
    get("repetition_penalty", c.decoding.repetition_penalty);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    detail::write_file(path, to_json(cfg).dump(2) + "\n");
}

Runtime make_runtime(const RunConfig& cfg) {
    cfg.validate();
    Runtime rt;
    if (!cfg.prompt_dir.empty()) rt.prompts = PromptLibrary::from_directory(cfg.prompt_dir);

    std::string api_key;
    if (!cfg.api_key_env.empty()) {
        if (const char* v = std::getenv(cfg.api_key_env.c_str())) api_key = v;
    }

    if (cfg.backend == "mock") {
        MockBackend::Script script;
        if (!cfg.mock_script.empty()) {
            try {
                script = load_mock_script(cfg.mock_script);
            } catch (const std::exception& e) {
                throw IoError(e.what());
            }
        }
        rt.mock = mock_from_script(std::move(script), cfg.mock_strict ? MockMode::strict : MockMode::lenient);
        rt.backend = rt.mock;
    } else {
        RemoteBackendOptions o;
        o.endpoint = cfg.endpoint;
        o.model = cfg.model;
        o.api_key = api_key;
        o.dialect = cfg.dialect == "openai" ? WireDialect::openai : WireDialect::extended;
        o.native_multi_sample = cfg.native_multi_sample;
        o.timeout = std::chrono::milliseconds(cfg.timeout_ms);
        o.parallelism = static_cast<std::size_t>(cfg.parallelism);
        rt.backend = std::make_shared<RemoteChatBackend>(std::move(o));
    }

    if (cfg.embedding == "offline") {
        rt.semantic = make_offline_provider();
    } else {
        RemoteEmbedderOptions o;
        o.endpoint = cfg.embedding_endpoint;
        o.model = cfg.embedding_model;
        o.api_key = api_key;
        o.timeout = std::chrono::milliseconds(cfg.timeout_ms);
        rt.semantic = std::make_shared<EmbeddingSimilarity>(std::make_shared<RemoteEmbedder>(std::move(o)));
    }
    return rt;
}

std::vector<Problem> select_problems(std::vector<Problem> problems, const RunConfig& cfg) {
    const auto limit = static_cast<std::size_t>(cfg.limit);
    if (limit == 0 || limit >= problems.size()) return problems;
    std::vector<std::size_t> idx(problems.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Explicit Fisher-Yates: std::shuffle is not portable across standard libraries.
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng() % (i + 1)]);
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    std::vector<Problem> out;
    out.reserve(limit);
    for (std::size_t i : idx) out.push_back(std::move(problems[i]));
    return out;
}

SimdistResult cmd_simdist(std::string_view a, std::string_view b) {
    parse_expression(a);
    parse_expression(b);
    SimdistResult r;
    r.aligned_a = align_variables(a).text;
    r.aligned_b = align_variables(b).text;
    r.norm = norm_distance(r.aligned_a, r.aligned_b);
    r.tree = tree_distance(r.aligned_a, r.aligned_b);
    r.similarity = logic_similarity(r.aligned_a, r.aligned_b);
    return r;
}

std::size_t cmd_preprocess(const RunConfig& cfg, Runtime& rt) {
    const std::vector<Problem> problems = load_problems(cfg);
    for (const Problem& p : problems) {
        if (!p.answer) throw SchemaError(0, "answer", "problem " + p.id + " has no gold answer");
    }
    const std::filesystem::path log_path = cfg.screening_log_path();
    if (log_path.has_parent_path()) ensure_dir(log_path.parent_path());

    std::set<std::string> done;
    if (std::filesystem::exists(log_path)) {
        std::string text = detail::read_file(log_path);
        if (!text.empty() && text.back() != '\n') {
            const auto cut = text.rfind('\n');
            text.resize(cut == std::string::npos ? 0 : cut + 1);
            spdlog::warn("dropping truncated last record of {}", log_path.string());
            detail::write_file(log_path, text);
        }
        for (const ScreeningRecord& r : parse_screening_log(text)) done.insert(r.problem_id);
    }

    std::vector<const Problem*> todo;
    for (const Problem& p : problems) {
        if (!done.contains(p.id)) todo.push_back(&p);
    }
    if (todo.size() < problems.size()) {
        spdlog::info("resuming: {} of {} problems already screened", problems.size() - todo.size(), problems.size());
    }

    std::ofstream out(log_path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + log_path.string());

    const auto batch = static_cast<std::size_t>(cfg.parallelism);
    std::size_t written = 0;
    for (std::size_t start = 0; start < todo.size(); start += batch) {
        const std::size_t n = std::min(batch, todo.size() - start);
        std::vector<ScreeningRecord> records(n);
        parallel_for(n, n, [&](std::size_t i) {
            const Problem& p = *todo[start + i];
            ScreeningRecord& rec = records[i];
            rec.problem_id = p.id;
            rec.question = p.question;
            rec.gold_answer = *p.answer;
            rec.source_dataset = std::filesystem::path(cfg.dataset).stem().string();
            for (int a = 0; a < cfg.attempts; ++a) {
                try {
                    PreprocessOutput pre = preprocess(p.question, *rt.backend, rt.prompts, cfg.decoding);
                    rec.attempts.push_back(make_attempt(pre.plan_and_solution, pre.total_formula->origin,
                                                        pre.final_answer, *p.answer));
                } catch (const ExtractionError& e) {
                    const PreprocessOutput& part = e.partial();
                    rec.attempts.push_back(make_attempt(part.plan_and_solution, "", part.final_answer, *p.answer));
                }
            }
        });
        for (const ScreeningRecord& r : records) {
            out << to_jsonl(r);
            out.flush();
            if (!out) throw IoError("write failed for " + log_path.string());
            ++written;
        }
    }
    return written;
}

std::size_t cmd_build_corpus(const RunConfig& cfg, Runtime& rt) {
    const std::vector<ScreeningRecord> log = load_screening_log(cfg.screening_log_path());
    SimilarityConfig sim;
    sim.alpha = cfg.alpha;
    sim.dedup_threshold = cfg.dedup_threshold;
    const std::vector<ReferenceExample> screened = screen(log);
    const std::vector<ReferenceExample> kept = dedup(screened, sim, *rt.semantic);
    spdlog::info("{} records, {} admitted, {} after dedup", log.size(), screened.size(), kept.size());
    const std::filesystem::path path = cfg.corpus_path();
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    save_corpus(kept, path);
    return kept.size();
}

std::vector<ScoredExample> cmd_retrieve(const RunConfig& cfg, Runtime& rt, const std::vector<ReferenceExample>& corpus,
                                        std::string_view question, std::string_view formula) {
    SimilarityConfig sim;
    sim.alpha = cfg.alpha;
    sim.dedup_threshold = cfg.dedup_threshold;
    std::string aligned;
    if (!formula.empty()) aligned = align_variables(formula).text;
    if (static_cast<std::size_t>(cfg.k) > corpus.size()) {
        spdlog::warn("k = {} exceeds the corpus size {}; using the whole corpus", cfg.k, corpus.size());
    }
    return retrieve_scored({question, aligned}, corpus, static_cast<std::size_t>(cfg.k), sim, *rt.semantic);
}

SolveTrace cmd_solve(const RunConfig& cfg, Runtime& rt, const std::vector<ReferenceExample>& corpus,
                     const Problem& problem) {
    return solve(problem, corpus, *rt.backend, *rt.semantic, solve_options(cfg), rt.prompts);
}

EvalReport cmd_eval(const RunConfig& cfg, Runtime& rt) {
    const std::vector<Problem> problems = load_problems(cfg);
    for (const Problem& p : problems) {
        if (!p.answer) throw MissingGold(p.id);
    }
    const SolveOptions options = solve_options(cfg);
    std::vector<ReferenceExample> corpus;
    if (needs_corpus(options.strategy)) {
        corpus = load_corpus_for(cfg);
        if (options.k > corpus.size()) {
            spdlog::warn("k = {} exceeds the corpus size {}; using the whole corpus", options.k, corpus.size());
        }
    }

    std::vector<SolveTrace> traces(problems.size());
    parallel_for(problems.size(), static_cast<std::size_t>(cfg.parallelism), [&](std::size_t i) {
        traces[i] = solve(problems[i], corpus, *rt.backend, *rt.semantic, options, rt.prompts);
    });

    const EvalReport report = evaluate(traces);
    write_report(report, traces, cfg.output_dir);
    return report;
}

namespace {

struct Override {
    CLI::Option* option;
    std::function<void(RunConfig&, const RunConfig&)> apply;
};

class ConfigFlags {
public:
    explicit ConfigFlags(CLI::App& app) : app_(app) {}

    template <typename T>
    void option(const std::string& name, T RunConfig::*field, const std::string& help) {
        auto* o = app_.add_option(name, flags_.*field, help);
        overrides_.push_back({o, [field](RunConfig& dst, const RunConfig& src) { dst.*field = src.*field; }});
    }

    template <typename T>
    void decoding(const std::string& name, T DecodingParams::*field, const std::string& help) {
        auto* o = app_.add_option(name, flags_.decoding.*field, help);
        overrides_.push_back(
            {o, [field](RunConfig& dst, const RunConfig& src) { dst.decoding.*field = src.decoding.*field; }});
    }

    void flag(const std::string& name, bool RunConfig::*field, const std::string& help) {
        auto* o = app_.add_flag(name, flags_.*field, help);
        overrides_.push_back({o, [field](RunConfig& dst, const RunConfig& src) { dst.*field = src.*field; }});
    }

    void apply(RunConfig& cfg) const {
        for (const Override& o : overrides_) {
            if (o.option->count() > 0) o.apply(cfg, flags_);
        }
    }

private:
    CLI::App& app_;
    RunConfig flags_;
    std::vector<Override> overrides_;
};

void dump_unknown(const Runtime& rt, const std::string& path) {
    if (path.empty() || !rt.mock) return;
    std::string out;
    for (const std::vector<Message>& msgs : rt.mock->unknown_requests()) {
        json m = json::array();
        for (const Message& msg : msgs) m.push_back({{"role", msg.role}, {"content", msg.content}});
        out += json{{"fingerprint", fingerprint(msgs)}, {"messages", m}, {"completions", json::array()}}.dump() + "\n";
    }
    detail::write_file(path, out);
}

void print_trace(const SolveTrace& t, std::ostream& out) {
    out << "problem: " << t.problem_id << "\n";
    if (t.target_formula) out << "formula: " << *t.target_formula << "\n";
    if (t.preprocess_error) out << "preprocess error: " << *t.preprocess_error << "\n";
    for (const RetrievedRef& r : t.retrieved) out << "retrieved: " << r.id << " " << fixed4(r.score) << "\n";
    out << "guesses:";
    for (const Guess& g : t.guesses) out << " " << (g.answer ? format_decimal(*g.answer) : "-");
    out << "\n";
    out << "voted: " << (t.voted_answer ? format_decimal(*t.voted_answer) : "-") << "\n";
    if (t.gold_answer) {
        out << "gold: " << format_decimal(*t.gold_answer) << "\n";
        out << "majority_correct: " << (t.majority_correct ? "true" : "false") << "\n";
        out << "any_correct: " << (t.any_correct ? "true" : "false") << "\n";
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Logic-contrastive retrieval and prompting for math word problems", "lcr"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string dump_unknown_path;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON run configuration; flags override its values");
    app.add_option("--mock-dump-unknown", dump_unknown_path,
                   "Write prompts the mock backend had no script for (JSON lines)");
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    ConfigFlags f(app);
    f.option("--dataset", &RunConfig::dataset, "Problems (JSON lines: id, question, answer)");
    f.option("--corpus", &RunConfig::corpus, "Reference corpus (JSON lines)");
    f.option("--screening-log", &RunConfig::screening_log, "Screening log path");
    f.option("--backend", &RunConfig::backend, "mock or remote");
    f.option("--endpoint", &RunConfig::endpoint, "Chat-completion base URL");
    f.option("--model", &RunConfig::model, "Model name sent to the endpoint");
    f.option("--api-key-env", &RunConfig::api_key_env, "Environment variable holding the API key");
    f.option("--dialect", &RunConfig::dialect, "extended or openai");
    f.flag("--native-multi-sample", &RunConfig::native_multi_sample, "Request all guesses in one call (n)");
    f.option("--timeout-ms", &RunConfig::timeout_ms, "Per-request timeout");
    f.option("--mock-script", &RunConfig::mock_script, "Scripted completions for the mock backend");
    f.flag("--mock-strict,!--mock-lenient", &RunConfig::mock_strict, "Fail on unscripted prompts");
    f.option("--alpha", &RunConfig::alpha, "Weight of the logic term");
    f.option("-k,--k", &RunConfig::k, "Number of references to retrieve");
    f.option("--guesses", &RunConfig::guesses, "Completions sampled per problem");
    f.option("--attempts", &RunConfig::attempts, "Screening attempts per problem");
    f.option("--dedup-threshold", &RunConfig::dedup_threshold, "Similarity above which examples are duplicates");
    f.option("--parallelism", &RunConfig::parallelism, "Problems processed concurrently");
    f.option("-o,--output-dir", &RunConfig::output_dir, "Directory for run outputs");
    f.option("--seed", &RunConfig::seed, "Seed for --limit subsampling");
    f.option("--limit", &RunConfig::limit, "Run a seeded subsample of this many problems");
    f.option("--strategy", &RunConfig::strategy, "lcr, semantic, logic, fix, hard, contrastive or zero-shot");
    f.option("--embedding", &RunConfig::embedding, "offline or remote");
    f.option("--embedding-endpoint", &RunConfig::embedding_endpoint, "Embeddings base URL");
    f.option("--embedding-model", &RunConfig::embedding_model, "Embedding model name");
    f.option("--prompt-dir", &RunConfig::prompt_dir, "Directory of prompt overrides");
    f.decoding("--max-new-tokens", &DecodingParams::max_new_tokens, "Completion token limit");
    f.decoding("--temperature", &DecodingParams::temperature, "Sampling temperature");
    f.decoding("--top-p", &DecodingParams::top_p, "Nucleus sampling mass");
    f.decoding("--top-k", &DecodingParams::top_k, "Top-k sampling cutoff");
    f.decoding("--repetition-penalty", &DecodingParams::repetition_penalty, "Repetition penalty");

    std::string expr_a, expr_b;
    auto* simdist = app.add_subcommand("simdist", "Print N, TD and logic similarity of two formulas");
    simdist->add_option("a", expr_a, "First formula")->required();
    simdist->add_option("b", expr_b, "Second formula")->required();

    auto* pre = app.add_subcommand("preprocess", "Screen dataset problems into a screening log");
    auto* build = app.add_subcommand("build-corpus", "Screening log to deduplicated corpus");

    std::string question, formula;
    auto* retr = app.add_subcommand("retrieve", "Rank corpus references for a question");
    retr->add_option("--question", question, "Target question")->required();
    retr->add_option("--formula", formula, "Target formula (omit for semantic-only)");

    std::string solve_q;
    std::optional<double> solve_gold;
    auto* solve_cmd = app.add_subcommand("solve", "Solve one question");
    solve_cmd->add_option("--question", solve_q, "Question text")->required();
    solve_cmd->add_option("--answer", solve_gold, "Gold answer, if known");

    auto* eval_cmd = app.add_subcommand("eval", "Solve a dataset and report accuracy");

    for (auto* sub : {simdist, pre, build, retr, solve_cmd, eval_cmd}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

    Runtime rt;
    auto finish = [&] { dump_unknown(rt, dump_unknown_path); };
    try {
        if (simdist->parsed()) {
            const SimdistResult r = cmd_simdist(expr_a, expr_b);
            out << "aligned: " << r.aligned_a << " | " << r.aligned_b << "\n";
            out << "N: " << fixed4(r.norm) << "\n";
            out << "TD: " << fixed4(r.tree) << "\n";
            out << "logic_similarity: " << fixed4(r.similarity) << "\n";
            return 0;
        }

        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        f.apply(cfg);
        rt = make_runtime(cfg);

        if (pre->parsed() || build->parsed() || eval_cmd->parsed()) {
            ensure_dir(cfg.output_dir);
            save_config(cfg, std::filesystem::path(cfg.output_dir) / "config.json");
        }

        if (pre->parsed()) {
            const std::size_t n = cmd_preprocess(cfg, rt);
            out << "screened " << n << " problems into " << cfg.screening_log_path().string() << "\n";
        } else if (build->parsed()) {
            const std::size_t n = cmd_build_corpus(cfg, rt);
            out << "corpus of " << n << " examples written to " << cfg.corpus_path().string() << "\n";
        } else if (retr->parsed()) {
            const std::vector<ReferenceExample> corpus = load_corpus_for(cfg);
            for (const ScoredExample& s : cmd_retrieve(cfg, rt, corpus, question, formula)) {
                out << s.example->id << "\t" << fixed4(s.score) << "\n";
            }
        } else if (solve_cmd->parsed()) {
            std::vector<ReferenceExample> corpus;
            if (needs_corpus(parse_strategy(cfg.strategy))) corpus = load_corpus_for(cfg);
            print_trace(cmd_solve(cfg, rt, corpus, {"cli", solve_q, solve_gold}), out);
        } else if (eval_cmd->parsed()) {
            const EvalReport r = cmd_eval(cfg, rt);
            out << "total: " << r.total << "\n";
            out << "accuracy: " << fixed4(r.accuracy) << " (" << r.correct << ")\n";
            out << "latent_accuracy: " << fixed4(r.latent_accuracy) << " (" << r.latent_correct << ")\n";
        }
        finish();
        return 0;
    } catch (const ParseError& e) {
        err << "error: parse error: " << e.what() << "\n";
        return 2;
    } catch (const GatewayError& e) {
        finish();
        err << "error: backend: " << e.what() << "\n";
        return 3;
    } catch (const ProviderError& e) {
        err << "error: embeddings: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace lcr
