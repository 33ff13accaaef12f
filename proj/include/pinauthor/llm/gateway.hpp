#pragma once

#include "pinauthor/core/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace pinauthor::llm {

using Json = nlohmann::json;

enum class Role { System, User, Assistant };

std::string_view toString(Role role);
std::optional<Role> parseRole(std::string_view label);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

enum class Mode { Live, Record, Replay };

std::string_view toString(Mode mode);
std::optional<Mode> parseMode(std::string_view label);

inline constexpr std::size_t kEmbeddingDim = 64;
inline constexpr const char* kLocalEmbeddingModel = "local-hash-64";

struct ModelConfig {
    std::string helperModel = "gpt-4-turbo";
    std::string generatorModel = "gpt-3.5-turbo-0125";
    std::string embeddingModel = kLocalEmbeddingModel;
    Mode mode = Mode::Replay;
    std::filesystem::path fixtureDir;
    std::string baseUrl = "https://api.openai.com/v1";
    std::string apiKeyEnv = "OPENAI_API_KEY";
    double temperature = 0.0;
    int retries = 2;
    std::chrono::milliseconds backoff{500};

    // Throws ValidationError (replay/record without a fixture directory).
    void validate() const;

    // PINAUTHOR_MODE, PINAUTHOR_FIXTURES, PINAUTHOR_HELPER_MODEL,
    // PINAUTHOR_GENERATOR_MODEL, PINAUTHOR_EMBEDDING_MODEL, PINAUTHOR_BASE_URL.
    static ModelConfig fromEnvironment();
};

class GatewayError : public Error {
public:
    GatewayError(const std::string& message, int attempts)
        : Error(message + " (after " + std::to_string(attempts) + " attempts)"), attempts(attempts) {}
    int attempts;
};

class ReplayMissError : public Error {
public:
    explicit ReplayMissError(const std::string& k) : Error("no replay fixture for key " + k), key(k) {}
    std::string key;
};

std::string sha256Hex(std::string_view data);

// Content hash of (model, canonical messages). Canonical form is the JSON
// serialization with sorted object keys, so it survives re-serialization.
std::string fixtureKey(const std::string& model, const std::vector<ChatMessage>& messages);
std::string embeddingKey(const std::string& model, const std::string& text);

Json toJson(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> messagesFromJson(const Json& j);

// Token-hash bag of words: lowercase alphanumeric runs hashed with 64-bit
// FNV-1a; bucket = hash % dim, sign from the top bit; then L2-normalized.
// Text without tokens maps to the unit vector on bucket 0.
std::vector<double> fallbackEmbedding(std::string_view text, std::size_t dim = kEmbeddingDim);
std::uint64_t fnv1a64(std::string_view text);

// One JSON request/response exchange with the provider.
class Transport {
public:
    virtual ~Transport() = default;
    // Throws on network/HTTP failure.
    virtual Json post(const std::string& path, const Json& body) = 0;
};

// HTTPS client against an OpenAI-compatible base URL.
class HttpTransport : public Transport {
public:
    HttpTransport(std::string baseUrl, std::string apiKey);
    Json post(const std::string& path, const Json& body) override;

private:
    std::string baseUrl_;
    std::string apiKey_;
};

// Test double: serves queued responses and counts calls.
class ScriptedTransport : public Transport {
public:
    void enqueue(Json response) { responses_.push_back(std::move(response)); }
    void enqueueChat(const std::string& content);
    void failNext(int times) { failures_ += times; }
    Json post(const std::string& path, const Json& body) override;

    int calls() const { return calls_; }
    std::size_t pending() const { return responses_.size(); }
    const std::vector<Json>& requests() const { return requests_; }

private:
    std::deque<Json> responses_;
    std::vector<Json> requests_;
    int calls_ = 0;
    int failures_ = 0;
};

// One JSON file per key under the fixture directory.
class FixtureStore {
public:
    explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}
    std::optional<Json> load(const std::string& key) const;
    void save(const std::string& key, const Json& record);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

struct CallRecord {
    enum class Kind { Chat, Embedding } kind = Kind::Chat;
    std::string model;
    std::string key;
    double seconds = 0.0;
    bool replayed = false;
};

class Gateway {
public:
    // With no transport, live/record modes build an HttpTransport from the
    // API key environment variable on first use.
    explicit Gateway(ModelConfig config, std::shared_ptr<Transport> transport = nullptr);

    // Throws ValidationError, ReplayMissError or GatewayError.
    std::string complete(const std::string& model, const std::vector<ChatMessage>& messages);
    std::vector<double> embed(const std::string& model, const std::string& text);
    std::vector<double> embed(const std::string& text) { return embed(config_.embeddingModel, text); }

    const ModelConfig& config() const { return config_; }

    using Listener = std::function<void(const CallRecord&)>;
    void setListener(Listener listener);

    // Overridable for tests that exercise retries without waiting.
    void setSleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

private:
    Json callWithRetries(const std::string& path, const Json& body);
    Transport& transport();
    void notify(const CallRecord& record);

    ModelConfig config_;
    std::shared_ptr<Transport> transport_;
    std::optional<FixtureStore> store_;
    std::function<void(std::chrono::milliseconds)> sleeper_;
    std::mutex mutex_;
    Listener listener_;
};

} // namespace pinauthor::llm
