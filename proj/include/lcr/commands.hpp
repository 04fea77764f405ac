#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lcr/eval.hpp"
#include "lcr/gateway.hpp"
#include "lcr/pipeline.hpp"
#include "lcr/prompts.hpp"
#include "lcr/similarity.hpp"

namespace lcr {

struct RunConfig {
    std::string dataset;
    std::string corpus;
    std::string screening_log;  // defaults to <output_dir>/screening.jsonl

    std::string backend = "mock";  // mock | remote
    std::string endpoint;
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    std::string dialect = "extended";  // extended | openai
    bool native_multi_sample = false;
    int timeout_ms = 60000;
    std::string mock_script;
    bool mock_strict = true;

    double alpha = 0.7;
    int k = 7;
    int guesses = 10;
    int attempts = 5;
    double dedup_threshold = 0.9;
    int parallelism = 4;
    std::string output_dir = "lcr-out";
    std::uint64_t seed = 0;
    int limit = 0;  // 0 runs the whole dataset
    std::string strategy = "lcr";

    std::string embedding = "offline";  // offline | remote
    std::string embedding_endpoint;
    std::string embedding_model;
    std::string prompt_dir;

    DecodingParams decoding;

    /// Throws ConfigError on out-of-range values or unknown enum names.
    void validate() const;

    std::filesystem::path screening_log_path() const;
    std::filesystem::path corpus_path() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys are rejected with ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Backends, semantic provider and prompts built from a config.
struct Runtime {
    std::shared_ptr<ChatBackend> backend;
    std::shared_ptr<MockBackend> mock;  // set when backend is the mock
    std::shared_ptr<SemanticProvider> semantic;
    PromptLibrary prompts;
};

Runtime make_runtime(const RunConfig& cfg);

/// Seeded subsample of `limit` problems, kept in dataset order.
std::vector<Problem> select_problems(std::vector<Problem> problems, const RunConfig& cfg);

struct SimdistResult {
    std::string aligned_a;
    std::string aligned_b;
    double norm = 0.0;
    double tree = 0.0;
    double similarity = 0.0;
};

SimdistResult cmd_simdist(std::string_view a, std::string_view b);

/// Screens every dataset problem `attempts` times, appending one record per
/// problem to the screening log. Problems already in the log are skipped.
/// Returns the number of records written by this call.
std::size_t cmd_preprocess(const RunConfig& cfg, Runtime& rt);

/// Screening log -> screened, deduplicated corpus file. Returns its size.
std::size_t cmd_build_corpus(const RunConfig& cfg, Runtime& rt);

std::vector<ScoredExample> cmd_retrieve(const RunConfig& cfg, Runtime& rt, const std::vector<ReferenceExample>& corpus,
                                        std::string_view question, std::string_view formula);

SolveTrace cmd_solve(const RunConfig& cfg, Runtime& rt, const std::vector<ReferenceExample>& corpus,
                     const Problem& problem);

/// Solves the dataset and writes traces.jsonl and summary.json.
EvalReport cmd_eval(const RunConfig& cfg, Runtime& rt);

/// Full command line: returns the process exit code (0 ok, 1 usage,
/// 2 data error, 3 backend error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcr
