#include "pinauthor/service/http_server.hpp"
#include "pinauthor/service/scenario.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <thread>
#include <unistd.h>

using namespace pinauthor;
using namespace pinauthor::service;

namespace {

struct Rig {
    explicit Rig(const std::string& scenario)
        : gateway([&] {
              llm::ModelConfig c;
              c.mode = llm::Mode::Replay;
              c.fixtureDir = testing_support::sourcePath("data/fixtures/" + scenario);
              return c;
          }()),
          examples(gateway), pipeline((examples.load(testing_support::sourcePath("data/rag")), gateway), examples) {}

    llm::Gateway gateway;
    rag::ExampleStore examples;
    AuthoringPipeline pipeline;
};

struct Recorder {
    std::mutex mutex;
    std::vector<Json> events;

    EventListener listener() {
        return [this](const Json& e) {
            std::lock_guard lock(mutex);
            events.push_back(e);
        };
    }
    std::vector<std::string> phases() {
        std::lock_guard lock(mutex);
        std::vector<std::string> out;
        for (const auto& e : events) {
            if (e["type"] == "feedback") out.push_back(e["phase"]);
        }
        return out;
    }
    void clear() {
        std::lock_guard lock(mutex);
        events.clear();
    }
};

Json expectations(const std::string& scenario) {
    return Json::parse(testing_support::readFile("data/scenarios/" + scenario + ".json"));
}

std::string turnPrompt(const std::string& scenario, std::size_t turn) {
    return expectations(scenario)["turns"][turn]["prompt"];
}

std::vector<HeightField> frames(SessionHost& host, int n) {
    std::vector<HeightField> out;
    for (int i = 0; i < n; ++i) {
        host.tick();
        out.push_back(*host.currentTargets());
    }
    return out;
}

std::filesystem::path tempDir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("pinauthor-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Non-error phases must follow the canonical order without repeats.
bool canonicalSubsequence(const std::vector<std::string>& phases) {
    int last = -1;
    for (const auto& label : phases) {
        auto phase = parseFeedbackPhase(label);
        if (!phase) return false;
        if (*phase == FeedbackPhase::Error) continue;
        int rank = static_cast<int>(*phase);
        if (rank <= last) return false;
        last = rank;
    }
    return true;
}

} // namespace

TEST(Scenarios, CommittedFixturesMatchFreshAuthoring) {
    for (const char* name : {"heart", "regen", "regen-exhausted"}) {
        auto dir = tempDir(std::string("author-") + name);
        authorScenario(loadScenario(testing_support::sourcePath(std::string("data/scenarios/") + name + ".json")), dir,
                       testing_support::sourcePath("data/rag"));
        std::set<std::string> fresh, committed;
        for (auto& f : std::filesystem::directory_iterator(dir)) fresh.insert(f.path().filename());
        auto committedDir = std::filesystem::path(testing_support::sourcePath("data/fixtures")) / name;
        for (auto& f : std::filesystem::directory_iterator(committedDir)) committed.insert(f.path().filename());
        EXPECT_EQ(fresh, committed) << name;
        for (const auto& f : fresh) {
            EXPECT_EQ(testing_support::readFile("data/fixtures/" + std::string(name) + "/" + f),
                      [&] {
                          std::ifstream in(dir / f);
                          return std::string(std::istreambuf_iterator<char>(in), {});
                      }())
                << f;
        }
        std::filesystem::remove_all(dir);
    }
}

TEST(Service, HeartWalkthroughProducesThreeArtifactsAndFourSliders) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    Recorder rec;
    host.subscribe(rec.listener());
    HistoryCard card = host.submitPrompt(turnPrompt("heart", 0));
    Json expect = expectations("heart")["expect"];

    EXPECT_EQ(card.id, "card-1");
    EXPECT_FALSE(card.parentId);
    EXPECT_EQ(card.plan.primitive, expect["segments"]["primitive"].get<std::string>());
    EXPECT_EQ(card.plan.animation, expect["segments"]["animation"].get<std::string>());
    EXPECT_EQ(card.plan.interaction, expect["segments"]["interaction"].get<std::string>());
    EXPECT_EQ(card.params.names(), expect["parameters"].get<std::vector<std::string>>());
    EXPECT_EQ(card.instructions.primitive, expect["instructions"]["primitive"].get<std::string>());
    EXPECT_EQ(card.instructions.animation, expect["instructions"]["animation"].get<std::string>());
    EXPECT_EQ(card.instructions.interaction, expect["instructions"]["interaction"].get<std::string>());

    ASSERT_EQ(card.artifacts.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(card.artifacts[i].category, kAllCategories[i]);
        EXPECT_FALSE(sim::compileCheck(card.artifacts[i].source, card.artifacts[i].category, card.artifacts[0].parameters));
    }
    Json history = host.history();
    ASSERT_EQ(history["sliders"].size(), expect["sliders"].get<std::size_t>());
    std::vector<std::string> sliderNames;
    for (const auto& s : history["sliders"]) sliderNames.push_back(s["name"]);
    EXPECT_EQ(sliderNames, expect["parameters"].get<std::vector<std::string>>());
    EXPECT_EQ(history["buttons"].size(), 2u);

    EXPECT_EQ(rec.phases(), (std::vector<std::string>{"segmented", "parameters", "validated", "instructed",
                                                      "generated:primitive", "generated:animation",
                                                      "generated:interaction", "loaded"}));
}

TEST(Service, FollowupAddsRotationAndKeepsTheAnimation) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    HistoryCard second = host.submitPrompt(turnPrompt("heart", 1));
    EXPECT_EQ(second.id, "card-2");
    EXPECT_EQ(second.parentId, "card-1");
    EXPECT_TRUE(second.plan.isFollowup);
    EXPECT_TRUE(second.params.contains(expectations("heart")["expect"]["followupParameter"].get<std::string>()));
    ASSERT_EQ(second.artifacts.size(), 3u);
    EXPECT_EQ(second.artifacts[1].category, ScriptCategory::Animation);
    EXPECT_EQ(host.history()["sliders"].size(), 5u);
    EXPECT_EQ(host.snapshot().cards().size(), 2u);
}

TEST(Service, RegenerationLoopRepairsOnce) {
    Rig rig("regen");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    Recorder rec;
    host.subscribe(rec.listener());
    int generatorCalls = 0;
    rig.gateway.setListener([&](const llm::CallRecord& r) { generatorCalls += r.model == rig.pipeline.config().generatorModel; });
    HistoryCard card = host.submitPrompt(turnPrompt("regen", 0));
    EXPECT_EQ(generatorCalls, 2);
    ASSERT_EQ(card.artifacts.size(), 1u);
    EXPECT_FALSE(sim::compileCheck(card.artifacts[0].source, ScriptCategory::Primitive));
    auto phases = rec.phases();
    auto err = std::find(phases.begin(), phases.end(), "error");
    ASSERT_NE(err, phases.end());
    EXPECT_EQ(std::count(phases.begin(), phases.end(), "error"), 1);
    EXPECT_EQ(*(err + 1), "generated:primitive");
    EXPECT_EQ(phases.back(), "loaded");
    EXPECT_TRUE(host.currentTargets());
}

TEST(Service, RegenerationBoundFailsWithCategory) {
    Rig rig("regen-exhausted");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    Recorder rec;
    host.subscribe(rec.listener());
    int generatorCalls = 0;
    rig.gateway.setListener([&](const llm::CallRecord& r) { generatorCalls += r.model == rig.pipeline.config().generatorModel; });
    try {
        host.submitPrompt(turnPrompt("regen-exhausted", 0));
        FAIL();
    } catch (const GenerationFailedError& e) {
        EXPECT_EQ(e.category, ScriptCategory::Primitive);
        EXPECT_EQ(e.attempts, kMaxRegens + 1);
    }
    EXPECT_EQ(generatorCalls, kMaxRegens + 1);
    EXPECT_TRUE(host.snapshot().cards().empty());
    EXPECT_FALSE(host.currentTargets());
    EXPECT_EQ(rec.phases().back(), "error");
    EXPECT_TRUE(canonicalSubsequence(rec.phases()));
}

TEST(Service, CommandsWithoutSceneAreInvalidState) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    EXPECT_THROW(host.setParameter("heartScale", 1), InvalidStateError);
    EXPECT_THROW(host.pressButton(1, true), InvalidStateError);
    EXPECT_THROW(host.toggleArtifact(0), InvalidStateError);
    EXPECT_THROW(host.rollbackTo("card-1"), NotFoundError);
    EXPECT_THROW(host.submitPrompt("  "), ValidationError);
    EXPECT_FALSE(host.tick());
    Json h = host.history();
    EXPECT_TRUE(h["cards"].empty());
    EXPECT_TRUE(h["activeCardId"].is_null());
}

TEST(Service, UnknownTargetsAreNotFound) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    EXPECT_THROW(host.setParameter("nope", 1), NotFoundError);
    EXPECT_THROW(host.pressButton(9, true), NotFoundError);
    EXPECT_THROW(host.toggleArtifact(3), NotFoundError);
    EXPECT_THROW(host.rollbackTo("card-9"), NotFoundError);
    EXPECT_THROW(host.setParameter("heartScale", std::nan("")), ValidationError);
}

TEST(Service, SliderWriteShowsInNextFrame) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    host.tick();
    EXPECT_DOUBLE_EQ(host.currentTargets()->maxHeight(), 50.0);
    host.setParameter("heartHeight", 80);
    auto frame = host.tick();
    ASSERT_TRUE(frame);
    double peak = 0;
    for (const auto& h : (*frame)["heights"]) peak = std::max(peak, h.get<double>());
    EXPECT_DOUBLE_EQ(peak, 80.0);
}

TEST(Service, TogglingTheAnimationFreezesTheShape) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    auto moving = frames(host, 10);
    EXPECT_NE(moving.front(), moving.back());
    EXPECT_FALSE(host.toggleArtifact(1));
    EXPECT_FALSE(host.snapshot().activeCard()->enabled[1]);
    auto still = frames(host, 10);
    for (const auto& f : still) EXPECT_EQ(f, still.front());
    EXPECT_TRUE(host.toggleArtifact(1));
    auto again = frames(host, 10);
    EXPECT_NE(again.front(), again.back());
}

TEST(Service, ButtonPressMovesTheHeart) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    host.toggleArtifact(1);
    host.pressButton(2, true);
    for (int i = 0; i < 10; ++i) host.tick();
    host.pressButton(2, false);
    Json sliders = host.history()["sliders"];
    EXPECT_NEAR(sliders[0]["value"].get<double>(), 12 + 10 * 0.1, 1e-9);
}

TEST(Service, RollbackReproducesTheCardsScene) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    auto original = frames(host, 40);
    host.submitPrompt(turnPrompt("heart", 1));
    host.rollbackTo("card-1");
    EXPECT_EQ(frames(host, 40), original);
    EXPECT_EQ(host.snapshot().activeCardId(), "card-1");
    EXPECT_EQ(host.history()["sliders"].size(), 4u);
}

TEST(Service, PromptAfterRollbackBranches) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    host.submitPrompt(turnPrompt("heart", 1));
    host.rollbackTo("card-1");
    HistoryCard branch = host.submitPrompt(turnPrompt("heart", 1));
    EXPECT_EQ(branch.id, "card-3");
    EXPECT_EQ(branch.parentId, "card-1");
    EXPECT_EQ(host.snapshot().cards().size(), 3u);
}

TEST(Service, FailedPromptLeavesStateUntouched) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    Session before = host.snapshot();
    EXPECT_THROW(host.submitPrompt("a prompt with no fixture"), llm::ReplayMissError);
    EXPECT_EQ(host.snapshot(), before);
    EXPECT_TRUE(host.tick());
}

TEST(Service, EventLogReplayReproducesCards) {
    auto dir = tempDir("log");
    auto logPath = dir / "session.jsonl";
    Rig rig("heart");
    Session original;
    {
        SessionHost host("s", rig.pipeline, {0.0, logPath});
        host.submitPrompt(turnPrompt("heart", 0));
        host.submitPrompt(turnPrompt("heart", 1));
        host.toggleArtifact(1);
        host.rollbackTo("card-1");
        EXPECT_THROW(host.submitPrompt("unknown"), llm::ReplayMissError);
        original = host.snapshot();
    }
    std::ifstream in(logPath);
    std::vector<std::string> types;
    for (std::string line; std::getline(in, line);) {
        Json entry = Json::parse(line);
        types.push_back(entry["type"]);
        if (entry["type"] == "prompt") EXPECT_FALSE(entry["fixtureKeys"].empty());
    }
    EXPECT_EQ(types, (std::vector<std::string>{"created", "prompt", "prompt", "toggle", "rollback", "prompt-failed"}));

    SessionHost restored("s", rig.pipeline, {0.0, std::nullopt});
    restored.restore(logPath);
    EXPECT_EQ(restored.snapshot(), original);
    EXPECT_EQ(frames(restored, 5).size(), 5u);
    std::filesystem::remove_all(dir);
}

TEST(Service, RestoreDetectsDivergence) {
    auto dir = tempDir("diverge");
    auto logPath = dir / "session.jsonl";
    Rig rig("heart");
    {
        SessionHost host("s", rig.pipeline, {0.0, logPath});
        host.submitPrompt(turnPrompt("heart", 0));
    }
    std::ifstream in(logPath);
    std::string created, prompt;
    std::getline(in, created);
    std::getline(in, prompt);
    Json entry = Json::parse(prompt);
    entry["card"]["userInput"] = "tampered";
    entry["text"] = turnPrompt("heart", 0);
    std::ofstream(logPath) << created << "\n" << entry.dump() << "\n";
    SessionHost restored("s", rig.pipeline, {0.0, std::nullopt});
    EXPECT_THROW(restored.restore(logPath), InvalidStateError);
    std::filesystem::remove_all(dir);
}

TEST(Service, PropertyCardCountAndPhaseOrder) {
    Rig heart("heart");
    std::mt19937 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        SessionHost host("s", heart.pipeline, {0.0, std::nullopt});
        Recorder rec;
        host.subscribe(rec.listener());
        std::size_t expected = 0;
        for (int step = 0; step < 4; ++step) {
            rec.clear();
            int pick = static_cast<int>(rng() % 3);
            std::string prompt = pick == 2 ? "unknown prompt" : turnPrompt("heart", pick);
            bool ok = true;
            try {
                host.submitPrompt(prompt);
            } catch (const Error&) {
                ok = false;
            }
            expected += ok;
            EXPECT_EQ(host.snapshot().cards().size(), expected);
            EXPECT_TRUE(canonicalSubsequence(rec.phases()));
            if (ok) EXPECT_EQ(rec.phases().back(), "loaded");
            else EXPECT_EQ(rec.phases().back(), "error");
        }
    }
}

TEST(Service, CommandsFromManyThreadsAreSerialized) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {0.0, std::nullopt});
    host.submitPrompt(turnPrompt("heart", 0));
    host.toggleArtifact(1);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&host, t] {
            for (int i = 0; i < 25; ++i) {
                host.setParameter("heartHeight", 10 + t);
                host.tick();
            }
        });
    }
    for (auto& th : threads) th.join();
    double h = host.history()["sliders"][3]["value"];
    EXPECT_GE(h, 10);
    EXPECT_LE(h, 17);
}

TEST(Service, TickerPublishesFramesInBackground) {
    Rig rig("heart");
    SessionHost host("s", rig.pipeline, {120.0, std::nullopt});
    Recorder rec;
    host.subscribe(rec.listener());
    host.submitPrompt(turnPrompt("heart", 0));
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    std::lock_guard lock(rec.mutex);
    std::vector<std::uint64_t> seqs;
    for (const auto& e : rec.events) {
        if (e["type"] == "frame") {
            seqs.push_back(e["seq"]);
            EXPECT_EQ(e["heights"].size(), kPinCount);
        }
    }
    EXPECT_GE(seqs.size(), 5u);
    EXPECT_TRUE(std::is_sorted(seqs.begin(), seqs.end()));
}

TEST(Service, ManagerCreatesIndependentSessions) {
    Rig rig("heart");
    auto dir = tempDir("manager");
    SessionManager manager(rig.pipeline, {0.0, std::nullopt}, dir);
    auto a = manager.create();
    auto b = manager.create();
    EXPECT_NE(a->id(), b->id());
    EXPECT_EQ(manager.get(a->id()), a);
    EXPECT_THROW(manager.get("missing"), NotFoundError);
    a->submitPrompt(turnPrompt("heart", 0));
    EXPECT_EQ(a->snapshot().cards().size(), 1u);
    EXPECT_TRUE(b->snapshot().cards().empty());
    EXPECT_TRUE(std::filesystem::exists(dir / (a->id() + ".jsonl")));
    std::filesystem::remove_all(dir);
}

TEST(ServiceErrors, MapToStatusAndKind) {
    auto kind = [](const std::exception& e) { return describeError(e); };
    EXPECT_EQ(kind(NotFoundError("x")).status, 404);
    EXPECT_EQ(kind(InvalidStateError("x")).body["error"]["kind"], "invalid-state");
    EXPECT_EQ(kind(ValidationError("x")).status, 400);
    auto g = kind(GenerationFailedError(ScriptCategory::Animation, 4, "boom"));
    EXPECT_EQ(g.body["error"]["kind"], "generation-failed");
    EXPECT_EQ(g.body["error"]["category"], "animation");
    EXPECT_EQ(kind(llm::ReplayMissError("k")).body["error"]["kind"], "replay-miss");
}

class HttpApi : public ::testing::Test {
protected:
    void SetUp() override {
        manager = std::make_unique<SessionManager>(rig.pipeline, HostOptions{60.0, std::nullopt});
        server = std::make_unique<HttpService>(*manager);
        port = server->start("127.0.0.1", 0);
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
        client->set_read_timeout(30, 0);
    }
    void TearDown() override { server->stop(); }

    std::pair<int, Json> post(const std::string& path, const Json& body = Json::object()) {
        auto res = client->Post(path, body.dump(), "application/json");
        if (!res) return {0, nullptr};
        return {res->status, Json::parse(res->body)};
    }
    std::pair<int, Json> get(const std::string& path) {
        auto res = client->Get(path);
        if (!res) return {0, nullptr};
        return {res->status, Json::parse(res->body)};
    }

    Rig rig{"heart"};
    std::unique_ptr<SessionManager> manager;
    std::unique_ptr<HttpService> server;
    std::unique_ptr<httplib::Client> client;
    int port = 0;
};

TEST_F(HttpApi, EndpointsDriveASession) {
    auto [created, session] = post("/sessions");
    ASSERT_EQ(created, 201);
    std::string base = "/sessions/" + session["sessionId"].get<std::string>();

    EXPECT_EQ(post(base + "/params", {{"name", "heartScale"}, {"value", 3}}).first, 409);
    EXPECT_EQ(post(base + "/artifacts/0/toggle").second["error"]["kind"], "invalid-state");

    auto [status, prompt] = post(base + "/prompt", {{"text", turnPrompt("heart", 0)}});
    ASSERT_EQ(status, 200) << prompt.dump();
    EXPECT_EQ(prompt["card"]["artifacts"].size(), 3u);

    auto [hs, history] = get(base + "/history");
    EXPECT_EQ(hs, 200);
    EXPECT_EQ(history["cards"].size(), 1u);
    EXPECT_EQ(history["sliders"].size(), 4u);

    EXPECT_EQ(post(base + "/params", {{"name", "heartHeight"}, {"value", 70}}).first, 200);
    EXPECT_EQ(get(base + "/history").second["sliders"][3]["value"], 70.0);
    EXPECT_EQ(post(base + "/params", {{"name", "bogus"}, {"value", 1}}).first, 404);
    EXPECT_EQ(post(base + "/params", {{"name", "heartHeight"}}).first, 400);
    EXPECT_EQ(post(base + "/buttons", {{"groupId", 1}, {"pressed", true}}).first, 200);
    EXPECT_EQ(post(base + "/buttons", {{"groupId", 7}, {"pressed", true}}).first, 404);

    auto [ts, toggle] = post(base + "/artifacts/1/toggle");
    EXPECT_EQ(ts, 200);
    EXPECT_EQ(toggle["enabled"], false);
    EXPECT_EQ(post(base + "/artifacts/5/toggle").first, 404);

    EXPECT_EQ(post(base + "/prompt", {{"text", turnPrompt("heart", 1)}}).first, 200);
    EXPECT_EQ(post(base + "/rollback", {{"cardId", "card-1"}}).first, 200);
    EXPECT_EQ(get(base + "/history").second["activeCardId"], "card-1");
    EXPECT_EQ(post(base + "/rollback", {{"cardId", "card-9"}}).first, 404);

    EXPECT_EQ(post(base + "/prompt", {{"text", ""}}).first, 400);
    EXPECT_EQ(post("/sessions/nope/prompt", {{"text", "x"}}).first, 404);
    EXPECT_EQ(get("/sessions/nope/history").first, 404);
    auto bad = client->Post(base + "/params", "not json", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
}

TEST_F(HttpApi, EventStreamCarriesFeedbackAndFrames) {
    std::string id = post("/sessions").second["sessionId"];
    std::string base = "/sessions/" + id;

    std::mutex mutex;
    std::string received;
    std::atomic<bool> sawFrame{false}, sawLoaded{false};
    std::thread reader([&] {
        httplib::Client stream("127.0.0.1", port);
        stream.set_read_timeout(10, 0);
        stream.Get(base + "/events", [&](const char* data, std::size_t n) {
            std::lock_guard lock(mutex);
            received.append(data, n);
            if (received.find("\"phase\":\"loaded\"") != std::string::npos) sawLoaded = true;
            if (received.find("event: frame") != std::string::npos) sawFrame = true;
            return !(sawLoaded && sawFrame);
        });
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    EXPECT_EQ(post(base + "/prompt", {{"text", turnPrompt("heart", 0)}}).first, 200);
    reader.join();
    EXPECT_TRUE(sawLoaded);
    EXPECT_TRUE(sawFrame);

    std::lock_guard lock(mutex);
    std::vector<std::string> phases;
    std::istringstream lines(received);
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("data: ", 0) != 0) continue;
        Json e = Json::parse(line.substr(6));
        if (e["type"] == "feedback") phases.push_back(e["phase"]);
        if (e["type"] == "frame") {
            EXPECT_EQ(e["heights"].size(), kPinCount);
            EXPECT_TRUE(e.contains("seq"));
        }
    }
    EXPECT_EQ(phases.front(), "segmented");
    EXPECT_EQ(phases.back(), "loaded");
    EXPECT_TRUE(canonicalSubsequence(phases));
}

TEST_F(HttpApi, RootServesTheBrowserClient) {
    auto res = client->Get("/");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_NE(res->get_header_value("Content-Type").find("text/html"), std::string::npos);
    EXPECT_EQ(res->body, testing_support::readFile("data/web/index.html"));
    // Every user action maps onto an endpoint of this API.
    for (const char* path : {"'/sessions'", "/prompt`", "/params`", "/buttons`", "/toggle`", "/rollback`", "/history`",
                             "/events`"}) {
        EXPECT_NE(res->body.find(path), std::string::npos) << path;
    }
}
