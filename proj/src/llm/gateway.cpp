#include "pinauthor/llm/gateway.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace pinauthor::llm {

std::string_view toString(Role role) {
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    return "user";
}

std::optional<Role> parseRole(std::string_view label) {
    for (Role r : {Role::System, Role::User, Role::Assistant}) {
        if (label == toString(r)) return r;
    }
    return std::nullopt;
}

std::string_view toString(Mode mode) {
    switch (mode) {
    case Mode::Live: return "live";
    case Mode::Record: return "record";
    case Mode::Replay: return "replay";
    }
    return "replay";
}

std::optional<Mode> parseMode(std::string_view label) {
    for (Mode m : {Mode::Live, Mode::Record, Mode::Replay}) {
        if (label == toString(m)) return m;
    }
    return std::nullopt;
}

void ModelConfig::validate() const {
    if (mode != Mode::Live && fixtureDir.empty()) {
        throw ValidationError(std::string(toString(mode)) + " mode requires a fixture directory");
    }
    if (retries < 0) throw ValidationError("retries must be non-negative");
}

ModelConfig ModelConfig::fromEnvironment() {
    ModelConfig config;
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    if (auto v = env("PINAUTHOR_MODE")) {
        auto mode = parseMode(*v);
        if (!mode) throw ValidationError("PINAUTHOR_MODE must be live, record or replay");
        config.mode = *mode;
    }
    if (auto v = env("PINAUTHOR_FIXTURES")) config.fixtureDir = *v;
    if (auto v = env("PINAUTHOR_HELPER_MODEL")) config.helperModel = *v;
    if (auto v = env("PINAUTHOR_GENERATOR_MODEL")) config.generatorModel = *v;
    if (auto v = env("PINAUTHOR_EMBEDDING_MODEL")) config.embeddingModel = *v;
    if (auto v = env("PINAUTHOR_BASE_URL")) config.baseUrl = *v;
    return config;
}

std::string sha256Hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

Json toJson(const std::vector<ChatMessage>& messages) {
    Json out = Json::array();
    for (const auto& m : messages) out.push_back({{"role", toString(m.role)}, {"content", m.content}});
    return out;
}

std::vector<ChatMessage> messagesFromJson(const Json& j) {
    std::vector<ChatMessage> out;
    for (const auto& item : j) {
        auto role = parseRole(item.at("role").get<std::string>());
        if (!role) throw ValidationError("unknown message role");
        out.push_back({*role, item.at("content").get<std::string>()});
    }
    return out;
}

std::string fixtureKey(const std::string& model, const std::vector<ChatMessage>& messages) {
    Json canonical = {{"kind", "chat"}, {"model", model}, {"messages", toJson(messages)}};
    return sha256Hex(canonical.dump());
}

std::string embeddingKey(const std::string& model, const std::string& text) {
    Json canonical = {{"kind", "embedding"}, {"model", model}, {"input", text}};
    return sha256Hex(canonical.dump());
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> fallbackEmbedding(std::string_view text, std::size_t dim) {
    if (dim == 0) throw ValidationError("embedding dimension must be positive");
    std::vector<double> v(dim, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::uint64_t h = fnv1a64(token);
        v[h % dim] += (h >> 63) ? -1.0 : 1.0;
        token.clear();
    };
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) token += static_cast<char>(std::tolower(u));
        else flush();
    }
    flush();
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm == 0) {
        v[0] = 1.0;
        return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

void ScriptedTransport::enqueueChat(const std::string& content) {
    enqueue({{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}});
}

Json ScriptedTransport::post(const std::string& path, const Json& body) {
    ++calls_;
    requests_.push_back({{"path", path}, {"body", body}});
    if (failures_ > 0) {
        --failures_;
        throw std::runtime_error("scripted transport failure");
    }
    if (responses_.empty()) throw std::runtime_error("scripted transport has no queued response");
    Json r = std::move(responses_.front());
    responses_.pop_front();
    return r;
}

std::optional<Json> FixtureStore::load(const std::string& key) const {
    std::lock_guard lock(mutex_);
    std::ifstream in(dir_ / (key + ".json"));
    if (!in) return std::nullopt;
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error("corrupt fixture " + key + ": " + e.what());
    }
}

void FixtureStore::save(const std::string& key, const Json& record) {
    std::lock_guard lock(mutex_);
    std::filesystem::create_directories(dir_);
    auto path = dir_ / (key + ".json");
    auto tmp = dir_ / (key + ".json.tmp");
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write fixture " + tmp.string());
        out << record.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

Gateway::Gateway(ModelConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    config_.validate();
    if (!config_.fixtureDir.empty()) store_.emplace(config_.fixtureDir);
}

void Gateway::setListener(Listener listener) {
    std::lock_guard lock(mutex_);
    listener_ = std::move(listener);
}

void Gateway::notify(const CallRecord& record) {
    Listener listener;
    {
        std::lock_guard lock(mutex_);
        listener = listener_;
    }
    if (listener) listener(record);
}

Transport& Gateway::transport() {
    std::lock_guard lock(mutex_);
    if (!transport_) {
        const char* key = std::getenv(config_.apiKeyEnv.c_str());
        if (!key || !*key) throw GatewayError("environment variable " + config_.apiKeyEnv + " is not set", 0);
        transport_ = std::make_shared<HttpTransport>(config_.baseUrl, key);
    }
    return *transport_;
}

Json Gateway::callWithRetries(const std::string& path, const Json& body) {
    Transport& t = transport();
    std::string lastError;
    int attempts = 0;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) sleeper_(config_.backoff * (1 << (attempt - 1)));
        ++attempts;
        try {
            return t.post(path, body);
        } catch (const std::exception& e) {
            lastError = e.what();
        }
    }
    throw GatewayError(path + " failed: " + lastError, attempts);
}

std::string Gateway::complete(const std::string& model, const std::vector<ChatMessage>& messages) {
    if (messages.empty()) throw ValidationError("complete requires at least one message");
    for (const auto& m : messages) {
        if (m.content.empty()) throw ValidationError("chat message content must be non-empty");
    }
    std::string key = fixtureKey(model, messages);
    auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    if (config_.mode == Mode::Replay) {
        auto record = store_->load(key);
        if (!record) throw ReplayMissError(key);
        std::string response = record->at("response").get<std::string>();
        notify({CallRecord::Kind::Chat, model, key, elapsed(), true});
        return response;
    }

    Json body = {{"model", model}, {"messages", toJson(messages)}, {"temperature", config_.temperature}};
    Json reply = callWithRetries("/chat/completions", body);
    std::string content;
    try {
        content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
        throw GatewayError(std::string("malformed chat completion: ") + e.what(), 1);
    }
    double seconds = elapsed();
    if (config_.mode == Mode::Record) {
        store_->save(key, {{"key", key}, {"model", model}, {"messages", toJson(messages)}, {"response", content}});
    }
    notify({CallRecord::Kind::Chat, model, key, seconds, false});
    return content;
}

std::vector<double> Gateway::embed(const std::string& model, const std::string& text) {
    if (text.empty()) throw ValidationError("embed requires non-empty text");
    if (model == kLocalEmbeddingModel) return fallbackEmbedding(text);

    std::string key = embeddingKey(model, text);
    auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    if (config_.mode == Mode::Replay) {
        auto record = store_->load(key);
        if (!record) throw ReplayMissError(key);
        auto v = record->at("embedding").get<std::vector<double>>();
        notify({CallRecord::Kind::Embedding, model, key, elapsed(), true});
        return v;
    }
    Json reply = callWithRetries("/embeddings", {{"model", model}, {"input", text}});
    std::vector<double> v;
    try {
        v = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const Json::exception& e) {
        throw GatewayError(std::string("malformed embedding response: ") + e.what(), 1);
    }
    for (double x : v) {
        if (!std::isfinite(x)) throw GatewayError("embedding contains non-finite values", 1);
    }
    double seconds = elapsed();
    if (config_.mode == Mode::Record) {
        store_->save(key, {{"key", key}, {"model", model}, {"input", text}, {"embedding", v}});
    }
    notify({CallRecord::Kind::Embedding, model, key, seconds, false});
    return v;
}

} // namespace pinauthor::llm
