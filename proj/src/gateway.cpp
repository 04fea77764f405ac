#include "lcr/gateway.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <thread>

#include <spdlog/spdlog.h>

#include "http_util.hpp"

namespace lcr {

std::string fingerprint(const std::vector<Message>& messages) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const Message& m : messages) {
        mix(m.role);
        mix("\x1f");
        mix(m.content);
        mix("\x1e");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json build_wire_payload(const ChatRequest& request, const std::string& model, WireDialect dialect, int n) {
    nlohmann::json messages = nlohmann::json::array();
    for (const Message& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    nlohmann::json body = {{"messages", messages},
                           {"max_tokens", request.params.max_new_tokens},
                           {"top_p", request.params.top_p},
                           {"temperature", request.params.temperature}};
    if (!model.empty()) body["model"] = model;
    if (dialect == WireDialect::extended) {
        body["top_k"] = request.params.top_k;
        body["repetition_penalty"] = request.params.repetition_penalty;
    }
    if (n != 1) body["n"] = n;
    return body;
}

namespace {

// 5xx responses: retried like transport failures.
class ServerError : public BackendError {
public:
    using BackendError::BackendError;
};

std::string error_message(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        if (j.contains("error")) {
            const auto& e = j["error"];
            if (e.is_object() && e.contains("message")) return e["message"].get<std::string>();
            if (e.is_string()) return e.get<std::string>();
        }
    } catch (const nlohmann::json::exception&) {
    }
    return body.substr(0, 300);
}

}  // namespace

RemoteChatBackend::RemoteChatBackend(RemoteBackendOptions options)
    : options_(std::move(options)), in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.parallelism, 1, 1024))) {
    if (options_.endpoint.empty()) throw std::invalid_argument("RemoteChatBackend: endpoint is required");
}

ChatResponse RemoteChatBackend::call_once(const ChatRequest& request, int n) {
    const auto ep = detail::resolve_endpoint(options_.endpoint, "/chat/completions");
    auto client = detail::make_client(ep, options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
    const std::string body = build_wire_payload(request, options_.model, options_.dialect, n).dump();

    const auto start = std::chrono::steady_clock::now();
    in_flight_.acquire();
    auto res = client->Post(ep.path, headers, body, "application/json");
    in_flight_.release();
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

    if (!res) throw TransportError("request to " + ep.origin + ep.path + " failed: " + httplib::to_string(res.error()));
    const int status = res->status;
    if (status == 401 || status == 403) throw AuthError("authentication rejected: " + error_message(res->body));
    if (status == 429) {
        long seconds = 1;
        if (res->has_header("Retry-After")) {
            try {
                seconds = std::stol(res->get_header_value("Retry-After"));
            } catch (const std::exception&) {
            }
        }
        throw RateLimited("rate limited: " + error_message(res->body), std::chrono::seconds(seconds));
    }
    if (status >= 500) throw ServerError("backend HTTP " + std::to_string(status) + ": " + error_message(res->body));
    if (status != 200) throw BackendError("backend HTTP " + std::to_string(status) + ": " + error_message(res->body));

    ChatResponse out;
    out.latency = latency;
    try {
        const auto j = nlohmann::json::parse(res->body);
        for (const auto& choice : j.at("choices")) {
            const auto& content = choice.at("message").at("content");
            out.completions.push_back(content.is_string() ? content.get<std::string>() : std::string{});
        }
        if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
            out.usage.prompt_tokens = u->value("prompt_tokens", 0L);
            out.usage.completion_tokens = u->value("completion_tokens", 0L);
        }
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what());
    }
    if (out.completions.size() != static_cast<std::size_t>(n)) {
        throw BackendError("backend returned " + std::to_string(out.completions.size()) + " completions, expected " +
                           std::to_string(n));
    }
    return out;
}

ChatResponse RemoteChatBackend::call_with_retry(const ChatRequest& request, int n) {
    for (int attempt = 0;; ++attempt) {
        std::chrono::milliseconds wait = options_.backoff_base * (1LL << std::min(attempt, 16));
        try {
            return call_once(request, n);
        } catch (const RateLimited& e) {
            if (attempt >= options_.max_retries) throw;
            wait = std::max<std::chrono::milliseconds>(wait, e.retry_after());
            spdlog::warn("{}; retrying in {} ms", e.what(), wait.count());
        } catch (const ServerError& e) {
            if (attempt >= options_.max_retries) throw BackendError(e.what());
            spdlog::warn("{}; retrying in {} ms", e.what(), wait.count());
        } catch (const TransportError& e) {
            if (attempt >= options_.max_retries) throw;
            spdlog::warn("{}; retrying in {} ms", e.what(), wait.count());
        }
        std::this_thread::sleep_for(wait);
    }
}

ChatResponse RemoteChatBackend::complete(const ChatRequest& request) {
    if (request.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    if (options_.native_multi_sample || request.sample_count == 1) return call_with_retry(request, request.sample_count);

    std::vector<std::future<ChatResponse>> futures;
    futures.reserve(static_cast<std::size_t>(request.sample_count));
    for (int i = 0; i < request.sample_count; ++i) {
        futures.push_back(std::async(std::launch::async, [this, &request] { return call_with_retry(request, 1); }));
    }
    ChatResponse merged;
    std::exception_ptr first_error;
    for (auto& f : futures) {
        try {
            ChatResponse part = f.get();
            merged.completions.push_back(std::move(part.completions.front()));
            merged.usage.prompt_tokens += part.usage.prompt_tokens;
            merged.usage.completion_tokens += part.usage.completion_tokens;
            merged.latency = std::max(merged.latency, part.latency);
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return merged;
}

MockBackend::MockBackend(Script script, MockMode mode, std::string default_text)
    : script_(std::move(script)), mode_(mode), default_text_(std::move(default_text)) {}

ChatResponse MockBackend::complete(const ChatRequest& request) {
    if (request.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    const std::string key = fingerprint(request.messages);
    std::lock_guard lock(mutex_);
    ++calls_;
    ChatResponse out;
    auto it = script_.find(key);
    if (it == script_.end() || it->second.empty()) {
        unknown_.push_back(request.messages);
        if (mode_ == MockMode::strict) throw UnknownPrompt("no scripted completion for fingerprint " + key);
        out.completions.assign(static_cast<std::size_t>(request.sample_count), default_text_);
        return out;
    }
    std::size_t& cursor = cursor_[key];
    for (int i = 0; i < request.sample_count; ++i) {
        out.completions.push_back(it->second[cursor % it->second.size()]);
        ++cursor;
    }
    return out;
}

std::vector<std::vector<Message>> MockBackend::unknown_requests() const {
    std::lock_guard lock(mutex_);
    return unknown_;
}

std::size_t MockBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::shared_ptr<MockBackend> mock_from_script(MockBackend::Script script, MockMode mode, std::string default_text) {
    return std::make_shared<MockBackend>(std::move(script), mode, std::move(default_text));
}

MockBackend::Script load_mock_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mock script " + path);
    MockBackend::Script script;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = path + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(where + ": invalid JSON: " + e.what());
        }
        std::string key;
        if (j.contains("fingerprint")) {
            key = j["fingerprint"].get<std::string>();
        } else if (j.contains("messages")) {
            std::vector<Message> msgs;
            for (const auto& m : j["messages"]) msgs.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
            key = fingerprint(msgs);
        } else {
            throw std::runtime_error(where + ": entry needs 'fingerprint' or 'messages'");
        }
        if (script.contains(key)) throw std::runtime_error(where + ": duplicate fingerprint " + key);
        script[key] = j.at("completions").get<std::vector<std::string>>();
    }
    return script;
}

}  // namespace lcr
