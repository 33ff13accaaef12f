#pragma once

#include "pinauthor/core/types.hpp"
#include "pinauthor/llm/gateway.hpp"

#include <array>
#include <filesystem>
#include <shared_mutex>
#include <string>
#include <vector>

namespace pinauthor::rag {

inline constexpr std::size_t kDefaultTopK = 3;

struct ExampleRecord {
    std::string id;
    ScriptCategory category = ScriptCategory::Primitive;
    std::string instruction;
    std::string code;
    std::string message;
    std::vector<double> embedding;
};

double cosineSimilarity(const std::vector<double>& a, const std::vector<double>& b);

// Three in-memory collections, one per category, scanned exactly.
class ExampleStore {
public:
    explicit ExampleStore(llm::Gateway& gateway) : gateway_(gateway) {}

    ExampleStore(const ExampleStore&) = delete;
    ExampleStore& operator=(const ExampleStore&) = delete;

    // Embeds `instruction` and appends. Throws ValidationError on empty
    // inputs or an embedding whose dimension differs from the store's.
    ExampleRecord addExample(ScriptCategory category, const std::string& instruction, const std::string& code,
                             const std::string& message = {});

    // min(k, size) records by descending cosine similarity to the query;
    // ties keep insertion order. Throws ValidationError for k == 0.
    std::vector<ExampleRecord> topK(ScriptCategory category, const std::string& query,
                                    std::size_t k = kDefaultTopK) const;

    // Same ranking over all three collections (primitive, animation,
    // interaction order for ties).
    std::vector<ExampleRecord> topKMerged(const std::string& query, std::size_t k = kDefaultTopK) const;

    std::vector<ExampleRecord> records(ScriptCategory category) const;
    std::size_t size(ScriptCategory category) const;
    std::size_t dimension() const;

    // One JSON-lines file per category: <dir>/<category>.jsonl with
    // {id, instruction, code, embedding} (plus optional message/origin).
    void save(const std::filesystem::path& dir) const;
    // Records lacking an embedding are embedded on load. Missing files are
    // treated as empty collections.
    void load(const std::filesystem::path& dir);

private:
    struct Collection {
        std::vector<ExampleRecord> records;
        mutable std::shared_mutex mutex;
    };

    void insert(ExampleRecord record);
    Collection& collection(ScriptCategory c) { return collections_[static_cast<std::size_t>(c)]; }
    const Collection& collection(ScriptCategory c) const { return collections_[static_cast<std::size_t>(c)]; }

    llm::Gateway& gateway_;
    std::array<Collection, 3> collections_;
    mutable std::mutex dimMutex_;
    std::size_t dimension_ = 0;
    std::size_t nextId_ = 1;
};

} // namespace pinauthor::rag
