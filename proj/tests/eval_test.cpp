#include "pinauthor/eval/authoring.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <unistd.h>

using namespace pinauthor;
using namespace pinauthor::eval;

namespace {

double rate(const std::vector<std::vector<int>>& outcomes) { return successRate(outcomes); }

struct Replay {
    explicit Replay(const std::string& name)
        : gateway([&] {
              llm::ModelConfig c;
              c.mode = llm::Mode::Replay;
              c.fixtureDir = testing_support::sourcePath("data/fixtures/" + name);
              return c;
          }()),
          examples(gateway) {
        examples.load(testing_support::sourcePath("data/rag"));
    }

    EvalReport run(const std::vector<std::string>& prompts, PipelineVariant variant, unsigned jobs = 1) {
        return runCorpus(prompts, variant, gateway, examples, {jobs});
    }

    llm::Gateway gateway;
    rag::ExampleStore examples;
};

service::Scenario scenario(const std::string& name) {
    return service::loadScenario(testing_support::sourcePath("data/scenarios/" + name + ".json"));
}

std::vector<std::string> prompts(const service::Scenario& s) {
    std::vector<std::string> out;
    for (const auto& t : s.turns) out.push_back(t.prompt);
    return out;
}

std::vector<std::vector<int>> outcomes(const EvalReport& r) {
    std::vector<std::vector<int>> out;
    for (const auto& s : r.perSample) out.push_back(s.s);
    return out;
}

} // namespace

TEST(SuccessRate, SingleSuccess) { EXPECT_EQ(rate({{1}}), 1.0); }

TEST(SuccessRate, MixedSegmentCounts) {
    EXPECT_DOUBLE_EQ(rate({{1}, {1, 1, 0}}), (1.0 + 2.0 / 3.0) / 2.0);
    EXPECT_NEAR(rate({{1}, {1, 1, 0}}), 0.8333333333333333, 1e-15);
}

TEST(SuccessRate, AllFailures) { EXPECT_EQ(rate({{0}, {0, 0, 0}, {0, 0}}), 0.0); }

TEST(SuccessRate, FiftySamples) {
    // 20 baseline-style successes, 10 baseline failures, 20 three-segment
    // samples with two of three compiling: (20 + 20 * 2/3) / 50 = 2/3.
    std::vector<std::vector<int>> s;
    for (int i = 0; i < 20; ++i) s.push_back({1});
    for (int i = 0; i < 10; ++i) s.push_back({0});
    for (int i = 0; i < 20; ++i) s.push_back({1, 0, 1});
    EXPECT_NEAR(successRate(s), 2.0 / 3.0, 1e-12);
}

TEST(SuccessRate, RejectsBadInput) {
    EXPECT_THROW(successRate(std::vector<std::vector<int>>{}), ValidationError);
    EXPECT_THROW(rate({{1}, {}}), ValidationError);
    EXPECT_THROW(rate({{2}}), ValidationError);
    EXPECT_THROW(successRate(std::vector<SampleResult>{}), ValidationError);
}

TEST(SuccessRate, PermutationInvariantAndBounded) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::vector<int>> s(1 + rng() % 60);
        for (auto& sample : s) {
            sample.resize(1 + rng() % 3);
            for (int& v : sample) v = static_cast<int>(rng() % 2);
        }
        double base = successRate(s);
        ASSERT_GE(base, 0.0);
        ASSERT_LE(base, 1.0);
        auto shuffled = s;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto& sample : shuffled) std::shuffle(sample.begin(), sample.end(), rng);
        ASSERT_NEAR(successRate(shuffled), base, 1e-12);
    }
}

TEST(Variant, NamesRoundTrip) {
    for (auto v : {PipelineVariant::Baseline, PipelineVariant::BaselineRag, PipelineVariant::Segmentation,
                   PipelineVariant::Full}) {
        EXPECT_EQ(parseVariant(toString(v)), v);
    }
    EXPECT_EQ(toString(PipelineVariant::BaselineRag), "baseline-rag");
    EXPECT_FALSE(parseVariant("shape-it"));
}

TEST(Report, JsonRoundTripIsLossless) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> seconds(0.0, 30.0);
    for (int trial = 0; trial < 50; ++trial) {
        EvalReport r;
        r.variant = static_cast<PipelineVariant>(trial % 4);
        for (int i = 0; i < 1 + trial % 7; ++i) {
            SampleResult s;
            s.prompt = "prompt \"" + std::to_string(i) + "\" with unicode é";
            for (unsigned j = 0; j < 1 + rng() % 3; ++j) {
                s.s.push_back(static_cast<int>(rng() % 2));
                s.categories.push_back("primitive");
                s.latencies.push_back(seconds(rng));
            }
            if (s.s.front() == 0) s.errors.push_back("primitive: Parse: unexpected end");
            r.perSample.push_back(s);
            r.latencies.insert(r.latencies.end(), s.latencies.begin(), s.latencies.end());
        }
        r.successRate = successRate(r.perSample);
        r.meanLatency = seconds(rng);
        r.latencyPhysical = trial % 2;
        EvalReport back = EvalReport::fromJson(Json::parse(r.toJson().dump()));
        ASSERT_EQ(back, r);
    }
}

TEST(Report, RejectsInconsistentCounts) {
    Json j = Json::parse(R"({"variant":"full","n":2,"successRate":1,
        "perSample":[{"prompt":"a","m_i":1,"s_ij":[1]}]})");
    EXPECT_THROW(EvalReport::fromJson(j), ValidationError);
    j["n"] = 1;
    j["perSample"][0]["m_i"] = 3;
    EXPECT_THROW(EvalReport::fromJson(j), ValidationError);
    EXPECT_THROW(EvalReport::fromJson(Json::parse(R"({"variant":"nope"})")), ValidationError);
}

TEST(Corpus, ShippedCorpusHasFiftyPrompts) {
    auto corpus = loadCorpus(testing_support::sourcePath("data/corpus/techeval.txt"));
    ASSERT_EQ(corpus.size(), 50u);
    EXPECT_EQ(corpus.front(),
              "Please create a grid of long rods that move up and down depending on the location of the product.");
    EXPECT_EQ(corpus[24], "make a heart get bigger and smaller with a pop background");
    for (const auto& p : corpus) {
        ASSERT_FALSE(p.empty());
        EXPECT_NE(p.back(), ' ');
    }
}

TEST(Corpus, MissingOrEmpty) {
    EXPECT_THROW(loadCorpus("/nonexistent/corpus.txt"), NotFoundError);
    auto path = std::filesystem::temp_directory_path() / ("empty-corpus-" + std::to_string(::getpid()));
    std::ofstream(path) << "\n   \n";
    EXPECT_THROW(loadCorpus(path), ValidationError);
    std::filesystem::remove(path);
}

TEST(RunCorpus, CraftedAnimationFailuresMatchHandArithmetic) {
    Replay replay("eval-full-crafted");
    auto s = scenario("eval-full-crafted");
    EvalReport report = replay.run(prompts(s), PipelineVariant::Full);
    ASSERT_EQ(report.n(), 4u);
    EXPECT_EQ(outcomes(report), (std::vector<std::vector<int>>{{1, 0, 1}, {1, 0, 1}, {1}, {1, 1}}));
    // Three-segment samples score 2/3 each; the rest score 1.
    EXPECT_NEAR(report.successRate, (2.0 / 3 + 2.0 / 3 + 1 + 1) / 4, 1e-12);
    EXPECT_EQ(report.perSample[0].categories, (std::vector<std::string>{"primitive", "animation", "interaction"}));
    EXPECT_EQ(report.perSample[0].errors.size(), 1u);
    EXPECT_NE(report.perSample[0].errors[0].find("animation"), std::string::npos);
    EXPECT_FALSE(report.latencyPhysical);
    // Four helper calls plus one generator call per segment.
    EXPECT_EQ(report.perSample[0].latencies.size(), 7u);
    EXPECT_EQ(report.perSample[2].latencies.size(), 4u); // validation is skipped without animation or interaction
    EXPECT_EQ(report.latencies.size(), 7u + 7 + 4 + 6);
}

TEST(RunCorpus, AllCompilingGivesOne) {
    Replay replay("eval-full-pass");
    EvalReport report = replay.run(prompts(scenario("eval-full-pass")), PipelineVariant::Full);
    EXPECT_EQ(report.successRate, 1.0);
    EXPECT_EQ(report.perSample[0].m(), 3u);
    EXPECT_EQ(report.perSample[1].m(), 1u);
}

TEST(RunCorpus, BaselineScoresOneSegmentPerSample) {
    Replay replay("eval-baseline");
    EvalReport report = replay.run(prompts(scenario("eval-baseline")), PipelineVariant::Baseline);
    for (const auto& s : report.perSample) {
        EXPECT_EQ(s.m(), 1u);
        EXPECT_EQ(s.categories, std::vector<std::string>{"combined"});
        EXPECT_EQ(s.latencies.size(), 1u);
    }
    EXPECT_EQ(outcomes(report), (std::vector<std::vector<int>>{{1}, {0}, {1}}));
    EXPECT_NEAR(report.successRate, 2.0 / 3.0, 1e-12);
}

TEST(RunCorpus, SegmentationSkipsTheParameterPipeline) {
    Replay replay("eval-segmentation");
    EvalReport report = replay.run(prompts(scenario("eval-segmentation")), PipelineVariant::Segmentation);
    EXPECT_EQ(outcomes(report), (std::vector<std::vector<int>>{{1, 0}, {1, 1, 1}}));
    EXPECT_NEAR(report.successRate, 0.75, 1e-12);
    EXPECT_EQ(report.perSample[1].latencies.size(), 4u); // one segmentation call, three generator calls
}

TEST(RunCorpus, FixtureMissesScoreZeroAndTheRunContinues) {
    Replay replay("eval-full-crafted");
    auto corpus = prompts(scenario("eval-full-crafted"));
    corpus.insert(corpus.begin() + 1, "a prompt nobody recorded");
    for (auto variant : {PipelineVariant::Baseline, PipelineVariant::BaselineRag, PipelineVariant::Segmentation,
                         PipelineVariant::Full}) {
        EvalReport report = replay.run({"a prompt nobody recorded"}, variant);
        ASSERT_EQ(report.n(), 1u);
        EXPECT_EQ(report.perSample[0].s, std::vector<int>{0});
        ASSERT_EQ(report.perSample[0].errors.size(), 1u);
        EXPECT_NE(report.perSample[0].errors[0].find("fixture"), std::string::npos) << report.perSample[0].errors[0];
    }
    EvalReport report = replay.run(corpus, PipelineVariant::Full);
    EXPECT_EQ(outcomes(report), (std::vector<std::vector<int>>{{1, 0, 1}, {0}, {1, 0, 1}, {1}, {1, 1}}));
    EXPECT_NEAR(report.successRate, (2.0 / 3 + 0 + 2.0 / 3 + 1 + 1) / 5, 1e-12);
}

TEST(RunCorpus, ParallelJobsGiveTheSameReport) {
    Replay replay("eval-full-crafted");
    auto corpus = prompts(scenario("eval-full-crafted"));
    for (int i = 0; i < 3; ++i) corpus.insert(corpus.end(), corpus.begin(), corpus.begin() + 4);
    EvalReport serial = replay.run(corpus, PipelineVariant::Full, 1);
    EvalReport parallel = replay.run(corpus, PipelineVariant::Full, 4);
    EXPECT_EQ(outcomes(parallel), outcomes(serial));
    EXPECT_EQ(parallel.successRate, serial.successRate);
    EXPECT_EQ(parallel.latencies.size(), serial.latencies.size());
}

TEST(RunCorpus, EmptyCorpusRejected) {
    Replay replay("eval-full-crafted");
    EXPECT_THROW(replay.run({}, PipelineVariant::Full), ValidationError);
}

TEST(Authoring, CommittedFixturesMatchAFreshRecording) {
    for (const std::string name : {"eval-full-crafted", "eval-full-pass", "eval-baseline", "eval-segmentation"}) {
        auto dir = std::filesystem::temp_directory_path() / ("pinauthor-eval-" + name + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        auto s = scenario(name);
        ASSERT_TRUE(isEvalScenario(s));
        authorEvalScenario(s, dir, testing_support::sourcePath("data/rag"));
        auto committed = std::filesystem::path(testing_support::sourcePath("data/fixtures/" + name));
        std::size_t count = 0;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            ++count;
            auto other = committed / entry.path().filename();
            ASSERT_TRUE(std::filesystem::exists(other)) << other;
            std::ifstream a(entry.path()), b(other);
            std::string x((std::istreambuf_iterator<char>(a)), {}), y((std::istreambuf_iterator<char>(b)), {});
            EXPECT_EQ(x, y) << entry.path().filename();
        }
        EXPECT_EQ(count, static_cast<std::size_t>(std::distance(std::filesystem::directory_iterator(committed), {})));
        std::filesystem::remove_all(dir);
    }
}

TEST(Authoring, UnusedResponsesAreRejected) {
    auto s = scenario("eval-baseline");
    s.turns[0].responses.push_back(s.turns[0].responses[0]);
    auto dir = std::filesystem::temp_directory_path() / ("pinauthor-eval-unused-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    EXPECT_THROW(authorEvalScenario(s, dir, testing_support::sourcePath("data/rag")), ValidationError);
    std::filesystem::remove_all(dir);
}
