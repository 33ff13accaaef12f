#include "pinauthor/rag/store.hpp"
#include "pinauthor/sim/runtime.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <unistd.h>

using namespace pinauthor;
using namespace pinauthor::rag;

namespace {

llm::Gateway& localGateway() {
    static llm::Gateway gateway([] {
        llm::ModelConfig c;
        c.mode = llm::Mode::Live;
        return c;
    }(), std::make_shared<llm::ScriptedTransport>());
    return gateway;
}

std::vector<std::string> ids(const std::vector<ExampleRecord>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.id);
    return out;
}

} // namespace

TEST(RagStore, AddPartitionsByCategory) {
    ExampleStore store(localGateway());
    store.addExample(ScriptCategory::Primitive, "square", "function f() {}");
    EXPECT_EQ(store.size(ScriptCategory::Primitive), 1u);
    EXPECT_EQ(store.size(ScriptCategory::Animation), 0u);
    EXPECT_EQ(store.size(ScriptCategory::Interaction), 0u);
    auto a = store.addExample(ScriptCategory::Animation, "bounce", "x");
    auto b = store.addExample(ScriptCategory::Animation, "bounce", "x");
    EXPECT_NE(a.id, b.id);
    EXPECT_EQ(store.size(ScriptCategory::Animation), 2u);
    EXPECT_THROW(store.addExample(ScriptCategory::Primitive, "x", ""), ValidationError);
    EXPECT_THROW(store.addExample(ScriptCategory::Primitive, "", "code"), ValidationError);
    EXPECT_EQ(store.dimension(), llm::kEmbeddingDim);
}

TEST(RagStore, EmptyAndSmallCollections) {
    ExampleStore store(localGateway());
    EXPECT_TRUE(store.topK(ScriptCategory::Primitive, "anything").empty());
    store.addExample(ScriptCategory::Primitive, "one", "c1");
    store.addExample(ScriptCategory::Primitive, "two", "c2");
    EXPECT_EQ(store.topK(ScriptCategory::Primitive, "one", 3).size(), 2u);
    EXPECT_THROW(store.topK(ScriptCategory::Primitive, "one", 0), ValidationError);
}

TEST(RagStore, MatchesBruteForceCosineOracle) {
    std::mt19937 rng(5);
    const std::vector<std::string> vocab = {"heart", "square", "circle", "wave", "pulse", "move", "left",
                                            "right", "button", "ripple", "grow", "shape", "pins", "rise"};
    for (int trial = 0; trial < 30; ++trial) {
        ExampleStore store(localGateway());
        std::vector<std::string> texts;
        for (int i = 0; i < 10; ++i) {
            std::string t;
            int n = 1 + static_cast<int>(rng() % 5);
            for (int w = 0; w < n; ++w) t += vocab[rng() % vocab.size()] + " ";
            texts.push_back(t);
            store.addExample(ScriptCategory::Animation, t, "code" + std::to_string(i));
        }
        std::string query = vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()];
        auto q = llm::fallbackEmbedding(query);
        std::vector<std::pair<double, int>> oracle;
        for (int i = 0; i < 10; ++i) {
            auto e = llm::fallbackEmbedding(texts[i]);
            double dot = 0;
            for (std::size_t d = 0; d < e.size(); ++d) dot += e[d] * q[d];
            oracle.push_back({dot, i});
        }
        std::sort(oracle.begin(), oracle.end(), [](auto& a, auto& b) {
            if (std::abs(a.first - b.first) > 1e-12) return a.first > b.first;
            return a.second < b.second;
        });
        auto got = store.topK(ScriptCategory::Animation, query, 10);
        ASSERT_EQ(got.size(), 10u);
        for (int i = 0; i < 10; ++i) EXPECT_EQ(got[i].code, "code" + std::to_string(oracle[i].second)) << trial;
        for (std::size_t i = 1; i < got.size(); ++i) {
            EXPECT_GE(cosineSimilarity(q, got[i - 1].embedding) + 1e-15, cosineSimilarity(q, got[i].embedding));
        }
    }
}

TEST(RagStore, SelfQueryRanksFirstAndTiesKeepInsertionOrder) {
    ExampleStore store(localGateway());
    store.addExample(ScriptCategory::Primitive, "a heart shape", "h");
    store.addExample(ScriptCategory::Primitive, "create a square grid", "s");
    store.addExample(ScriptCategory::Primitive, "ring of pins", "r");
    EXPECT_EQ(store.topK(ScriptCategory::Primitive, "create a square grid", 1)[0].code, "s");
    // Identical instructions tie exactly; the earlier one wins.
    store.addExample(ScriptCategory::Primitive, "wave", "first");
    store.addExample(ScriptCategory::Primitive, "wave", "second");
    auto top = store.topK(ScriptCategory::Primitive, "wave", 2);
    EXPECT_EQ(top[0].code, "first");
    EXPECT_EQ(top[1].code, "second");
}

TEST(RagStore, RetrievalNeverCrossesCategories) {
    ExampleStore store(localGateway());
    std::mt19937 rng(9);
    for (int i = 0; i < 30; ++i) {
        auto cat = kAllCategories[rng() % 3];
        store.addExample(cat, "marker " + std::string(toString(cat)) + " " + std::to_string(i),
                         std::string(toString(cat)));
    }
    for (ScriptCategory cat : kAllCategories) {
        for (ScriptCategory queryCat : kAllCategories) {
            for (const auto& r : store.topK(cat, "marker " + std::string(toString(queryCat)), 50)) {
                EXPECT_EQ(r.category, cat);
                EXPECT_EQ(r.code, toString(cat));
            }
        }
    }
    auto merged = store.topKMerged("marker primitive", 100);
    EXPECT_EQ(merged.size(), 30u);
}

TEST(RagStore, SaveLoadRoundTrip) {
    auto dir = std::filesystem::temp_directory_path() / ("pinauthor_rag_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    ExampleStore a(localGateway());
    a.addExample(ScriptCategory::Primitive, "square", "s", "made a square");
    a.addExample(ScriptCategory::Interaction, "two buttons", "b");
    a.save(dir);
    ExampleStore b(localGateway());
    b.load(dir);
    for (ScriptCategory c : kAllCategories) {
        auto ra = a.records(c), rb = b.records(c);
        ASSERT_EQ(ra.size(), rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) {
            EXPECT_EQ(ra[i].id, rb[i].id);
            EXPECT_EQ(ra[i].instruction, rb[i].instruction);
            EXPECT_EQ(ra[i].code, rb[i].code);
            EXPECT_EQ(ra[i].message, rb[i].message);
            EXPECT_EQ(ra[i].embedding, rb[i].embedding);
        }
    }
    EXPECT_THROW(b.load(dir), ValidationError); // duplicate ids
    std::filesystem::remove_all(dir);
}

TEST(RagSeeds, LoadCoverTaxonomyAndCompile) {
    ExampleStore store(localGateway());
    store.load(testing_support::sourcePath("data/rag"));
    EXPECT_GE(store.size(ScriptCategory::Primitive), 8u);
    EXPECT_GE(store.size(ScriptCategory::Animation), 6u);
    EXPECT_GE(store.size(ScriptCategory::Interaction), 6u);

    // Parent parameters covering every name the seed scripts touch.
    ParamMap parents;
    for (const auto& r : store.records(ScriptCategory::Primitive)) {
        for (const auto& [name, value] : sim::extractParameters(r.code, ScriptCategory::Primitive)) {
            parents.set(name, value);
        }
    }
    for (ScriptCategory cat : kAllCategories) {
        for (const auto& r : store.records(cat)) {
            auto err = sim::compileCheck(r.code, cat, parents);
            EXPECT_FALSE(err.has_value()) << r.id << ": " << (err ? err->describe() : "");
            EXPECT_FALSE(r.message.empty()) << r.id;
        }
    }
    auto primitives = store.records(ScriptCategory::Primitive);
    EXPECT_EQ(primitives[0].code, testing_support::readFile("data/scripts/square_primitive.js"));
    EXPECT_EQ(store.records(ScriptCategory::Animation)[0].code,
              testing_support::readFile("data/scripts/bounce_animation.js"));
    EXPECT_EQ(store.records(ScriptCategory::Interaction)[0].code,
              testing_support::readFile("data/scripts/two_button_interaction.js"));

    EXPECT_EQ(store.topK(ScriptCategory::Primitive, "Create a heart shape on the display", 1)[0].id,
              "primitive-heart");
}
