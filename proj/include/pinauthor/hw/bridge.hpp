#pragma once

#include "pinauthor/hw/mqtt.hpp"
#include "pinauthor/hw/wire.hpp"
#include "pinauthor/service/session_host.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <string>

namespace pinauthor::hw {

struct BridgeOptions {
    std::string targetTopic = "shapeit/pins/target";
    std::string actualTopic = "shapeit/pins/actual";
    double pressThreshold = kPressThreshold;
    std::function<void(const std::string&)> log;
};

struct BridgeStats {
    std::uint64_t framesOut = 0;
    std::uint64_t framesIn = 0;
    std::uint64_t dropped = 0;
};

// Mirrors one session onto the display: every frame is published as a
// target wire frame, and actual-height frames drive button presses.
class HardwareBridge {
public:
    HardwareBridge(MqttClient& client, BridgeOptions options = {});
    ~HardwareBridge();
    HardwareBridge(const HardwareBridge&) = delete;
    HardwareBridge& operator=(const HardwareBridge&) = delete;

    // Replaces any previously attached session.
    void attach(std::shared_ptr<service::SessionHost> host);
    void detach();

    // Entry point for an actual-height payload. Malformed frames are
    // logged, counted and dropped without touching the session.
    void handleActual(const std::string& payload);

    BridgeStats stats() const;

private:
    struct State;
    MqttClient& client_;
    std::shared_ptr<State> state_;
};

} // namespace pinauthor::hw
