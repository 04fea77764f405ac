#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace lcr {

struct DecodingParams {
    int max_new_tokens = 400;
    double top_p = 0.95;
    double temperature = 0.1;
    int top_k = 30;
    double repetition_penalty = 1.15;

    friend bool operator==(const DecodingParams&, const DecodingParams&) = default;
};

struct Message {
    std::string role;
    std::string content;

    friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
    std::vector<Message> messages;
    DecodingParams params;
    int sample_count = 1;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct ChatResponse {
    std::vector<std::string> completions;
    TokenUsage usage;
    std::chrono::milliseconds latency{0};
};

class GatewayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AuthError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class RateLimited : public GatewayError {
public:
    RateLimited(const std::string& msg, std::chrono::seconds retry_after)
        : GatewayError(msg), retry_after_(retry_after) {}
    std::chrono::seconds retry_after() const noexcept { return retry_after_; }

private:
    std::chrono::seconds retry_after_;
};

class TransportError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class BackendError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class UnknownPrompt : public GatewayError {
public:
    using GatewayError::GatewayError;
};

/// A chat-completion backend. Implementations are shareable across threads.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Stable 64-bit FNV-1a hash of the full message list, as 16 hex digits.
std::string fingerprint(const std::vector<Message>& messages);

/// Which sampling fields the wire protocol accepts. `openai` is the strict
/// public schema; `extended` adds top_k and repetition_penalty as accepted
/// by vLLM and TGI style servers.
enum class WireDialect { openai, extended };

struct RemoteBackendOptions {
    std::string endpoint;   // base URL, e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key;
    WireDialect dialect = WireDialect::extended;
    bool native_multi_sample = false;  // send n=sample_count in one call
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    std::size_t parallelism = 4;       // bound on in-flight HTTP calls
};

/// Builds the JSON body sent for one call producing `n` samples.
nlohmann::json build_wire_payload(const ChatRequest& request, const std::string& model, WireDialect dialect, int n);

/// HTTP JSON chat-completion client (POST {endpoint}/chat/completions).
/// Transient failures (transport, 429, 5xx) are retried with exponential
/// backoff; 401/403 and other 4xx fail immediately.
class RemoteChatBackend final : public ChatBackend {
public:
    explicit RemoteChatBackend(RemoteBackendOptions options);
    ChatResponse complete(const ChatRequest& request) override;

private:
    ChatResponse call_once(const ChatRequest& request, int n);
    ChatResponse call_with_retry(const ChatRequest& request, int n);

    RemoteBackendOptions options_;
    std::counting_semaphore<1024> in_flight_;
};

enum class MockMode { strict, lenient };

/// Deterministic scripted backend keyed on fingerprint(messages). Each
/// fingerprint walks its completion list, wrapping around when exhausted.
/// Unknown fingerprints raise UnknownPrompt in strict mode and return the
/// default text otherwise; they are recorded either way.
class MockBackend final : public ChatBackend {
public:
    using Script = std::map<std::string, std::vector<std::string>>;

    explicit MockBackend(Script script, MockMode mode = MockMode::strict, std::string default_text = {});
    ChatResponse complete(const ChatRequest& request) override;

    /// Requests that matched no script entry, in arrival order.
    std::vector<std::vector<Message>> unknown_requests() const;
    std::size_t call_count() const;

private:
    Script script_;
    MockMode mode_;
    std::string default_text_;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> cursor_;
    std::vector<std::vector<Message>> unknown_;
    std::size_t calls_ = 0;
};

std::shared_ptr<MockBackend> mock_from_script(MockBackend::Script script, MockMode mode = MockMode::strict,
                                              std::string default_text = {});

/// Loads a mock script file: JSON lines, each {"fingerprint": ..., or
/// "messages": [...], "completions": [...]}.
MockBackend::Script load_mock_script(const std::string& path);

}  // namespace lcr
