#include "lcr/semantic.hpp"

#include <cctype>
#include <cstdint>

#include <json.hpp>

#include "http_util.hpp"

namespace lcr {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dimension, std::size_t ngram) : dimension_(dimension), ngram_(ngram) {
    if (dimension_ == 0 || ngram_ == 0) throw ConfigError("HashingEmbedder: dimension and ngram must be positive");
}

Eigen::VectorXd HashingEmbedder::embed(std::string_view text) {
    std::string norm = " ";
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (norm.back() != ' ') norm.push_back(' ');
        } else {
            norm.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    if (norm.back() != ' ') norm.push_back(' ');

    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension_));
    if (norm.size() < ngram_ || norm == " ") return v;
    for (std::size_t i = 0; i + ngram_ <= norm.size(); ++i) {
        const auto bucket = fnv1a(std::string_view(norm).substr(i, ngram_)) % dimension_;
        v[static_cast<Eigen::Index>(bucket)] += 1.0;
    }
    return v;
}

TableEmbedder::TableEmbedder(std::map<std::string, Eigen::VectorXd, std::less<>> table) : table_(std::move(table)) {}

Eigen::VectorXd TableEmbedder::embed(std::string_view text) {
    auto it = table_.find(text);
    if (it == table_.end()) throw ProviderError("no embedding for text: " + std::string(text.substr(0, 60)));
    return it->second;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw ConfigError("RemoteEmbedder: endpoint is required");
}

Eigen::VectorXd RemoteEmbedder::embed(std::string_view text) {
    const auto ep = detail::resolve_endpoint(options_.endpoint, "/embeddings");
    auto client = detail::make_client(ep, options_.timeout);
    nlohmann::json body = {{"input", std::string(text)}};
    if (!options_.model.empty()) body["model"] = options_.model;
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = client->Post(ep.path, headers, body.dump(), "application/json");
    if (!res) throw ProviderError("embedding request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw ProviderError("embedding endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
        const auto parsed = nlohmann::json::parse(res->body);
        const auto& values = parsed.at("data").at(0).at("embedding");
        Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i].get<double>();
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed embedding response: ") + e.what());
    }
}

EmbeddingSimilarity::EmbeddingSimilarity(std::shared_ptr<Embedder> embedder) : embedder_(std::move(embedder)) {}

Eigen::VectorXd EmbeddingSimilarity::lookup(std::string_view text) {
    std::string key(text);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    Eigen::VectorXd v = embedder_->embed(text);
    std::lock_guard lock(mutex_);
    return cache_.try_emplace(std::move(key), std::move(v)).first->second;
}

double EmbeddingSimilarity::similarity(std::string_view q1, std::string_view q2) {
    const Eigen::VectorXd u = lookup(q1);
    const Eigen::VectorXd v = lookup(q2);
    if (u.isZero(0.0) || v.isZero(0.0)) return 0.0;
    return cosine(u, v);
}

std::shared_ptr<SemanticProvider> make_offline_provider() {
    return std::make_shared<EmbeddingSimilarity>(std::make_shared<HashingEmbedder>());
}

}  // namespace lcr
