#include "pinauthor/hw/bridge.hpp"
#include "pinauthor/service/scenario.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pinauthor;
using namespace pinauthor::hw;
using namespace std::chrono_literals;

namespace {

ScriptArtifact script(ScriptCategory category, const std::string& file) {
    ScriptArtifact a;
    a.category = category;
    a.source = testing_support::readFile("data/scripts/" + file);
    return a;
}

std::unique_ptr<sim::Scene> squareWithButtons() {
    auto scene = sim::Scene::load({script(ScriptCategory::Primitive, "square_primitive.js"),
                                   script(ScriptCategory::Interaction, "two_button_interaction.js")});
    scene->step(1.0 / 30);
    return scene;
}

template <class Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = 3000ms) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        if (pred()) return true;
        std::this_thread::sleep_for(5ms);
    }
    return pred();
}

MqttOptions fastOptions(const std::string& id) {
    MqttOptions o;
    o.clientId = id;
    o.keepAlive = 1s;
    o.backoffInitial = 20ms;
    o.backoffMax = 200ms;
    return o;
}

} // namespace

TEST(Wire, AllZeroFieldEncodesToZeroBytes) {
    WireFrame frame = encode(HeightField{});
    for (auto b : frame) EXPECT_EQ(b, 0);
    EXPECT_EQ(bytesOf(frame).size(), 576u);
}

TEST(Wire, RoundsHalfUp) {
    EXPECT_EQ(quantize(25.4), 25);
    EXPECT_EQ(quantize(25.5), 26);
    EXPECT_EQ(quantize(-3), 0);
    EXPECT_EQ(quantize(140), 100);
    EXPECT_EQ(quantize(100), 100);
}

TEST(Wire, RowMajorOrder) {
    HeightField f;
    f.set(3, 2, 77);
    WireFrame frame = encode(f);
    EXPECT_EQ(frame[2 * 24 + 3], 77);
    EXPECT_EQ(decode(frame).at(3, 2), 77);
}

TEST(Wire, RandomFieldsRoundTripWithinHalfUnit) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> height(0.0, 100.0);
    for (int trial = 0; trial < 10000; ++trial) {
        HeightField f;
        for (std::size_t i = 0; i < kPinCount; ++i) f.set(i, height(rng));
        WireFrame frame = encode(f);
        HeightField back = decode(parseWireFrame(bytesOf(frame)));
        for (std::size_t i = 0; i < kPinCount; ++i) {
            ASSERT_LE(std::abs(back.at(i) - f.at(i)), 0.5) << "trial " << trial << " pin " << i;
            ASSERT_EQ(frame[i], quantize(f.at(i)));
        }
    }
}

TEST(Wire, ParseRejectsBadFrames) {
    EXPECT_THROW(parseWireFrame(std::string(575, '\0')), ProtocolError);
    EXPECT_THROW(parseWireFrame(std::string(577, '\0')), ProtocolError);
    std::string tooTall(576, '\0');
    tooTall[10] = static_cast<char>(101);
    EXPECT_THROW(parseWireFrame(tooTall), ProtocolError);
    EXPECT_NO_THROW(parseWireFrame(std::string(576, static_cast<char>(100))));
}

TEST(Press, ThresholdRule) {
    auto scene = squareWithButtons();
    std::size_t pin = pinIndex(16, 20);
    WireFrame actual = encode(scene->field());

    actual[pin] = 50;
    onActualHeights(actual, *scene, kPressThreshold);
    EXPECT_FALSE(scene->pins()[pin].isPressing);

    actual[pin] = 40; // exactly at target - threshold is not a press
    onActualHeights(actual, *scene, kPressThreshold);
    EXPECT_FALSE(scene->pins()[pin].isPressing);

    actual[pin] = 35;
    onActualHeights(actual, *scene, kPressThreshold);
    EXPECT_TRUE(scene->pins()[pin].isPressing);
}

TEST(Press, HeldButtonStaysPressedAtRenderedDepth) {
    auto scene = squareWithButtons();
    std::size_t pin = pinIndex(16, 20);
    WireFrame actual = encode(scene->field());
    actual[pin] = 30;
    onActualHeights(actual, *scene);
    scene->step(1.0 / 30);
    EXPECT_EQ(scene->field().at(pin), 25);
    // The pin now sits at its rendered depth; it must still read as pressed.
    actual[pin] = 25;
    onActualHeights(actual, *scene);
    EXPECT_TRUE(scene->pins()[pin].isPressing);
    actual[pin] = 50;
    onActualHeights(actual, *scene);
    EXPECT_FALSE(scene->pins()[pin].isPressing);
}

TEST(Press, NonButtonPinsIgnored) {
    auto scene = squareWithButtons();
    WireFrame actual{};
    auto presses = detectPresses(releasedTargets(*scene), actual, scene->pins());
    EXPECT_EQ(presses.size(), 2u);
    for (const auto& [index, pressed] : presses) EXPECT_TRUE(scene->pins()[index].isButton);
}

TEST(Mqtt, PacketCodecRoundTrip) {
    PacketReader reader;
    std::string bytes = encodeConnect("dev-1", 30) + encodeSubscribe(7, {"a/b", "c/#"}) +
                        encodePublish("shapeit/pins/target", std::string(576, 'x'));
    for (char c : bytes) reader.feed(std::string_view(&c, 1));
    auto connect = reader.next();
    ASSERT_TRUE(connect);
    EXPECT_EQ(parseConnectClientId(*connect), "dev-1");
    auto sub = reader.next();
    ASSERT_TRUE(sub);
    std::uint16_t id = 0;
    EXPECT_EQ(parseSubscribeTopics(*sub, id), (std::vector<std::string>{"a/b", "c/#"}));
    EXPECT_EQ(id, 7);
    auto pub = reader.next();
    ASSERT_TRUE(pub);
    auto view = parsePublish(*pub);
    EXPECT_EQ(view.topic, "shapeit/pins/target");
    EXPECT_EQ(view.payload.size(), 576u);
    EXPECT_FALSE(reader.next());
}

TEST(Mqtt, RemainingLengthEncoding) {
    EXPECT_EQ(encodePacket({PacketType::PingReq, 0, ""}), std::string("\xC0\x00", 2));
    std::string big = encodePacket({PacketType::Publish, 0, std::string(321, 'a')});
    EXPECT_EQ(static_cast<unsigned char>(big[1]), 0xC1);
    EXPECT_EQ(static_cast<unsigned char>(big[2]), 0x02);
    PacketReader bad;
    bad.feed(std::string("\x30\xff\xff\xff\xff\x01", 6));
    EXPECT_THROW(bad.next(), ProtocolError);
}

TEST(Mqtt, UrlParsing) {
    auto e = parseMqttUrl("mqtt://broker.local:1884");
    EXPECT_EQ(e.host, "broker.local");
    EXPECT_EQ(e.port, 1884);
    EXPECT_EQ(parseMqttUrl("localhost").port, 1883);
    EXPECT_THROW(parseMqttUrl("http://x"), ValidationError);
    EXPECT_THROW(parseMqttUrl("mqtt://x:notaport"), ValidationError);
    EXPECT_THROW(parseMqttUrl("mqtt://:1883"), ValidationError);
}

TEST(Mqtt, PublishSubscribeThroughLocalBroker) {
    LocalBroker broker;
    int port = broker.start();
    std::mutex m;
    std::vector<std::string> got;
    MqttClient a({"127.0.0.1", port}, fastOptions("a"));
    MqttClient b({"127.0.0.1", port}, fastOptions("b"));
    b.subscribe("t/x", [&](const std::string&, const std::string& p) {
        std::lock_guard lock(m);
        got.push_back(p);
    });
    a.start();
    b.start();
    ASSERT_TRUE(a.waitConnected(3s));
    ASSERT_TRUE(b.waitConnected(3s));
    ASSERT_TRUE(eventually([&] { return broker.clientCount() == 2; }));
    // Subscription is processed before later publishes from any client only
    // once SUBACK arrives; poll until delivery.
    ASSERT_TRUE(eventually([&] {
        a.publish("t/x", "hello");
        std::lock_guard lock(m);
        return !got.empty();
    }));
    std::lock_guard lock(m);
    EXPECT_EQ(got.back(), "hello");
}

TEST(Mqtt, ReconnectsAndFlushesLatestPendingPublish) {
    LocalBroker broker;
    int port = broker.start();
    std::mutex m;
    std::vector<std::string> got;
    MqttClient sink({"127.0.0.1", port}, fastOptions("sink"));
    sink.subscribe("t/y", [&](const std::string&, const std::string& p) {
        std::lock_guard lock(m);
        got.push_back(p);
    });
    sink.start();
    ASSERT_TRUE(sink.waitConnected(3s));

    MqttClient source({"127.0.0.1", port}, fastOptions("source"));
    // Queued before the first connection: only the newest value survives.
    source.publish("t/y", "one");
    source.publish("t/y", "two");
    source.publish("t/y", "three");
    EXPECT_EQ(source.pendingPublishes(), 1u);
    source.start();
    ASSERT_TRUE(eventually([&] {
        std::lock_guard lock(m);
        return !got.empty();
    }));
    {
        std::lock_guard lock(m);
        EXPECT_EQ(got, std::vector<std::string>{"three"});
    }

    auto before = sink.connections();
    broker.disconnectAll();
    ASSERT_TRUE(eventually([&] { return sink.connections() > before && sink.connected() && source.connected(); }));
    // The resubscription is live again.
    ASSERT_TRUE(eventually([&] {
        source.publish("t/y", "after");
        std::lock_guard lock(m);
        return got.back() == "after";
    }));
}

TEST(Bridge, MalformedActualFrameIsDroppedAndLogged) {
    LocalBroker broker;
    MqttClient client({"127.0.0.1", broker.start()}, fastOptions("bridge"));
    std::vector<std::string> logs;
    BridgeOptions options;
    options.log = [&](const std::string& line) { logs.push_back(line); };
    HardwareBridge bridge(client, options);

    llm::ModelConfig config;
    config.mode = llm::Mode::Replay;
    config.fixtureDir = testing_support::sourcePath("data/fixtures/heart");
    llm::Gateway gateway(config);
    rag::ExampleStore examples(gateway);
    examples.load(testing_support::sourcePath("data/rag"));
    service::AuthoringPipeline pipeline(gateway, examples);
    auto host = std::make_shared<service::SessionHost>("s", pipeline, service::HostOptions{0.0, std::nullopt});
    auto scenario = service::loadScenario(testing_support::sourcePath("data/scenarios/heart.json"));
    host->submitPrompt(scenario.turns[0].prompt);
    host->tick();
    bridge.attach(host);

    auto before = *host->currentTargets();
    bridge.handleActual(std::string(575, '\0'));
    host->history(); // drain the worker queue
    EXPECT_EQ(bridge.stats().dropped, 1u);
    EXPECT_EQ(bridge.stats().framesIn, 0u);
    ASSERT_FALSE(logs.empty());
    EXPECT_NE(logs.back().find("576"), std::string::npos);
    EXPECT_EQ(*host->currentTargets(), before);
    bool anyPressed = false;
    host->withScene([&](sim::Scene& s) {
        for (const auto& p : s.pins()) anyPressed |= p.isPressing;
    });
    EXPECT_FALSE(anyPressed);
    bridge.detach();
}

TEST(Bridge, EndToEndOverBroker) {
    LocalBroker broker;
    int port = broker.start();
    std::mutex m;
    std::vector<std::string> targets;
    MqttClient client({"127.0.0.1", port}, fastOptions("bridge"));
    HardwareBridge bridge(client);
    MqttClient device({"127.0.0.1", port}, fastOptions("device"));
    device.subscribe("shapeit/pins/target", [&](const std::string&, const std::string& p) {
        std::lock_guard lock(m);
        targets.push_back(p);
    });
    client.start();
    device.start();
    ASSERT_TRUE(client.waitConnected(3s));
    ASSERT_TRUE(device.waitConnected(3s));

    llm::ModelConfig config;
    config.mode = llm::Mode::Replay;
    config.fixtureDir = testing_support::sourcePath("data/fixtures/heart");
    llm::Gateway gateway(config);
    rag::ExampleStore examples(gateway);
    examples.load(testing_support::sourcePath("data/rag"));
    service::AuthoringPipeline pipeline(gateway, examples);
    auto host = std::make_shared<service::SessionHost>("s", pipeline, service::HostOptions{0.0, std::nullopt});
    auto scenario = service::loadScenario(testing_support::sourcePath("data/scenarios/heart.json"));
    host->submitPrompt(scenario.turns[0].prompt);
    host->toggleArtifact(1); // freeze the animation so X moves only by presses
    bridge.attach(host);

    ASSERT_TRUE(eventually([&] {
        host->tick();
        std::lock_guard lock(m);
        return !targets.empty();
    }));
    WireFrame published;
    {
        std::lock_guard lock(m);
        published = parseWireFrame(targets.back());
    }
    EXPECT_EQ(published, encode(*host->currentTargets()));

    // The device reports the right-hand button pushed well below its target.
    std::size_t buttonPin = 0;
    int buttonGroup = 0;
    host->withScene([&](sim::Scene& s) {
        for (std::size_t i = 0; i < s.pins().size(); ++i) {
            if (s.pins()[i].isButton && s.pins()[i].buttonGroupId == 2) {
                buttonPin = i;
                buttonGroup = 2;
            }
        }
    });
    ASSERT_EQ(buttonGroup, 2);
    WireFrame actual = published;
    actual[buttonPin] = 0;
    device.publish("shapeit/pins/actual", std::string(bytesOf(actual)));
    ASSERT_TRUE(eventually([&] {
        bool pressed = false;
        host->withScene([&](sim::Scene& s) { pressed = s.pins()[buttonPin].isPressing; });
        return pressed;
    }));
    double x0 = host->history()["sliders"][0]["value"];
    for (int i = 0; i < 5; ++i) host->tick();
    double x1 = host->history()["sliders"][0]["value"];
    EXPECT_NEAR(x1 - x0, 5 * 0.1, 1e-9);
    bridge.detach();
}
