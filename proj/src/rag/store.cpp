#include "pinauthor/rag/store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace pinauthor::rag {

namespace {

struct Scored {
    double score;
    std::size_t order;
    const ExampleRecord* record;
};

std::vector<ExampleRecord> rank(std::vector<Scored> scored, std::size_t k) {
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.order < b.order;
    });
    std::vector<ExampleRecord> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(*scored[i].record);
    return out;
}

} // namespace

double cosineSimilarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("embedding dimensions differ");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void ExampleStore::insert(ExampleRecord record) {
    if (record.embedding.empty()) throw ValidationError("example '" + record.id + "' has no embedding");
    for (double x : record.embedding) {
        if (!std::isfinite(x)) throw ValidationError("example '" + record.id + "' has a non-finite embedding");
    }
    {
        std::lock_guard lock(dimMutex_);
        if (dimension_ == 0) dimension_ = record.embedding.size();
        if (record.embedding.size() != dimension_) {
            throw ValidationError("example '" + record.id + "' has embedding dimension " +
                                  std::to_string(record.embedding.size()) + ", store uses " +
                                  std::to_string(dimension_));
        }
        for (const Collection& c : collections_) {
            std::shared_lock read(c.mutex);
            for (const auto& r : c.records) {
                if (r.id == record.id) throw ValidationError("duplicate example id '" + record.id + "'");
            }
        }
    }
    Collection& c = collection(record.category);
    std::unique_lock lock(c.mutex);
    c.records.push_back(std::move(record));
}

ExampleRecord ExampleStore::addExample(ScriptCategory category, const std::string& instruction,
                                       const std::string& code, const std::string& message) {
    if (instruction.empty()) throw ValidationError("example instruction must be non-empty");
    if (code.empty()) throw ValidationError("example code must be non-empty");
    ExampleRecord record;
    record.category = category;
    record.instruction = instruction;
    record.code = code;
    record.message = message;
    record.embedding = gateway_.embed(instruction);
    {
        std::lock_guard lock(dimMutex_);
        record.id = std::string(toString(category)) + "-" + std::to_string(nextId_++);
    }
    insert(record);
    return record;
}

std::vector<ExampleRecord> ExampleStore::topK(ScriptCategory category, const std::string& query,
                                              std::size_t k) const {
    if (k == 0) throw ValidationError("k must be at least 1");
    const Collection& c = collection(category);
    {
        std::shared_lock lock(c.mutex);
        if (c.records.empty()) return {};
    }
    std::vector<double> q = gateway_.embed(query);
    std::shared_lock lock(c.mutex);
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < c.records.size(); ++i) {
        scored.push_back({cosineSimilarity(q, c.records[i].embedding), i, &c.records[i]});
    }
    return rank(std::move(scored), k);
}

std::vector<ExampleRecord> ExampleStore::topKMerged(const std::string& query, std::size_t k) const {
    if (k == 0) throw ValidationError("k must be at least 1");
    if (dimension() == 0) return {};
    std::vector<double> q = gateway_.embed(query);
    std::vector<std::shared_lock<std::shared_mutex>> locks;
    for (const Collection& c : collections_) locks.emplace_back(c.mutex);
    std::vector<Scored> scored;
    std::size_t order = 0;
    for (const Collection& c : collections_) {
        for (const auto& r : c.records) scored.push_back({cosineSimilarity(q, r.embedding), order++, &r});
    }
    return rank(std::move(scored), k);
}

std::vector<ExampleRecord> ExampleStore::records(ScriptCategory category) const {
    const Collection& c = collection(category);
    std::shared_lock lock(c.mutex);
    return c.records;
}

std::size_t ExampleStore::size(ScriptCategory category) const {
    const Collection& c = collection(category);
    std::shared_lock lock(c.mutex);
    return c.records.size();
}

std::size_t ExampleStore::dimension() const {
    std::lock_guard lock(dimMutex_);
    return dimension_;
}

void ExampleStore::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (ScriptCategory category : kAllCategories) {
        std::ofstream out(dir / (std::string(toString(category)) + ".jsonl"));
        if (!out) throw Error("cannot write collection under " + dir.string());
        for (const auto& r : records(category)) {
            llm::Json j = {{"id", r.id}, {"instruction", r.instruction}, {"code", r.code}, {"embedding", r.embedding}};
            if (!r.message.empty()) j["message"] = r.message;
            out << j.dump() << '\n';
        }
    }
}

void ExampleStore::load(const std::filesystem::path& dir) {
    for (ScriptCategory category : kAllCategories) {
        auto path = dir / (std::string(toString(category)) + ".jsonl");
        std::ifstream in(path);
        if (!in) continue;
        std::string line;
        std::size_t lineNo = 0;
        while (std::getline(in, line)) {
            ++lineNo;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            llm::Json j;
            try {
                j = llm::Json::parse(line);
            } catch (const llm::Json::exception& e) {
                throw ValidationError(path.string() + ":" + std::to_string(lineNo) + ": " + e.what());
            }
            ExampleRecord r;
            r.category = category;
            r.id = j.at("id").get<std::string>();
            r.instruction = j.at("instruction").get<std::string>();
            r.code = j.at("code").get<std::string>();
            r.message = j.value("message", "");
            if (r.instruction.empty() || r.code.empty()) {
                throw ValidationError(path.string() + ":" + std::to_string(lineNo) + ": empty instruction or code");
            }
            if (j.contains("embedding")) r.embedding = j["embedding"].get<std::vector<double>>();
            else r.embedding = gateway_.embed(r.instruction);
            insert(std::move(r));
        }
    }
}

} // namespace pinauthor::rag
