#include "pinauthor/hw/bridge.hpp"

#include <mutex>

namespace pinauthor::hw {

struct HardwareBridge::State {
    BridgeOptions options;
    std::mutex mutex;
    std::shared_ptr<service::SessionHost> host;
    int token = 0;
    std::atomic<std::uint64_t> framesOut{0};
    std::atomic<std::uint64_t> framesIn{0};
    std::atomic<std::uint64_t> dropped{0};

    void log(const std::string& line) const {
        if (options.log) options.log(line);
    }

    void actual(const std::string& payload) {
        WireFrame frame;
        try {
            frame = parseWireFrame(payload);
        } catch (const ProtocolError& e) {
            ++dropped;
            log(std::string("dropped actual frame: ") + e.what());
            return;
        }
        ++framesIn;
        std::shared_ptr<service::SessionHost> target;
        {
            std::lock_guard lock(mutex);
            target = host;
        }
        if (!target) return;
        double threshold = options.pressThreshold;
        target->post([frame, threshold](service::SessionHost& h) {
            h.withScene([&](sim::Scene& scene) { onActualHeights(frame, scene, threshold); });
        });
    }
};

HardwareBridge::HardwareBridge(MqttClient& client, BridgeOptions options)
    : client_(client), state_(std::make_shared<State>()) {
    state_->options = std::move(options);
    std::weak_ptr<State> weak = state_;
    client_.subscribe(state_->options.actualTopic, [weak](const std::string&, const std::string& payload) {
        if (auto s = weak.lock()) s->actual(payload);
    });
}

HardwareBridge::~HardwareBridge() { detach(); }

void HardwareBridge::attach(std::shared_ptr<service::SessionHost> host) {
    detach();
    if (!host) return;
    std::weak_ptr<State> weak = state_;
    MqttClient* client = &client_;
    std::string topic = state_->options.targetTopic;
    int token = host->subscribe([weak, client, topic](const Json& event) {
        if (event.value("type", "") != "frame") return;
        auto s = weak.lock();
        if (!s) return;
        HeightField field;
        const auto& heights = event.at("heights");
        for (std::size_t i = 0; i < kWireFrameSize && i < heights.size(); ++i) field.set(i, heights[i].get<double>());
        WireFrame frame = encode(field);
        client->publish(topic, std::string(bytesOf(frame)));
        ++s->framesOut;
    });
    std::lock_guard lock(state_->mutex);
    state_->host = std::move(host);
    state_->token = token;
    state_->log("bridge attached to session " + state_->host->id());
}

void HardwareBridge::detach() {
    std::shared_ptr<service::SessionHost> host;
    int token = 0;
    {
        std::lock_guard lock(state_->mutex);
        host = std::move(state_->host);
        state_->host.reset();
        token = state_->token;
    }
    if (host) host->unsubscribe(token);
}

void HardwareBridge::handleActual(const std::string& payload) { state_->actual(payload); }

BridgeStats HardwareBridge::stats() const {
    return {state_->framesOut.load(), state_->framesIn.load(), state_->dropped.load()};
}

} // namespace pinauthor::hw
