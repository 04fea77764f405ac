#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include <Eigen/Core>

#include "lcr/similarity.hpp"

namespace lcr {

/// Maps a text to a dense vector.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Eigen::VectorXd embed(std::string_view text) = 0;
};

/// Deterministic offline embedder: character trigrams of the lower-cased,
/// space-padded text hashed (FNV-1a) into `dimension` buckets.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 256, std::size_t ngram = 3);
    Eigen::VectorXd embed(std::string_view text) override;

private:
    std::size_t dimension_;
    std::size_t ngram_;
};

/// Fixed text -> vector table. Unknown texts raise ProviderError.
class TableEmbedder final : public Embedder {
public:
    explicit TableEmbedder(std::map<std::string, Eigen::VectorXd, std::less<>> table);
    Eigen::VectorXd embed(std::string_view text) override;

private:
    std::map<std::string, Eigen::VectorXd, std::less<>> table_;
};

struct RemoteEmbedderOptions {
    std::string endpoint;  // base URL such as http://localhost:8080/v1
    std::string model;
    std::string api_key;
    std::chrono::milliseconds timeout{30000};
};

/// Calls an OpenAI-style /embeddings endpoint.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderOptions options);
    Eigen::VectorXd embed(std::string_view text) override;

private:
    RemoteEmbedderOptions options_;
};

/// Cosine of embeddings, with a thread-safe per-text cache. Zero vectors
/// (e.g. empty text) score 0.
class EmbeddingSimilarity final : public SemanticProvider {
public:
    explicit EmbeddingSimilarity(std::shared_ptr<Embedder> embedder);
    double similarity(std::string_view q1, std::string_view q2) override;

private:
    Eigen::VectorXd lookup(std::string_view text);

    std::shared_ptr<Embedder> embedder_;
    std::mutex mutex_;
    std::unordered_map<std::string, Eigen::VectorXd> cache_;
};

/// The offline provider used in tests and as the CLI default.
std::shared_ptr<SemanticProvider> make_offline_provider();

}  // namespace lcr
