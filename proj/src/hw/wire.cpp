#include "pinauthor/hw/wire.hpp"

#include <cmath>

namespace pinauthor::hw {

std::uint8_t quantize(double height) {
    double h = clampHeight(height);
    return static_cast<std::uint8_t>(std::floor(h + 0.5));
}

WireFrame encode(const HeightField& field) {
    WireFrame frame;
    for (std::size_t i = 0; i < kWireFrameSize; ++i) frame[i] = quantize(field.at(i));
    return frame;
}

HeightField decode(const WireFrame& frame) {
    HeightField field;
    for (std::size_t i = 0; i < kWireFrameSize; ++i) field.set(i, frame[i]);
    return field;
}

WireFrame parseWireFrame(std::string_view payload) {
    if (payload.size() != kWireFrameSize) {
        throw ProtocolError("wire frame must be " + std::to_string(kWireFrameSize) + " bytes, got " +
                            std::to_string(payload.size()));
    }
    WireFrame frame;
    for (std::size_t i = 0; i < kWireFrameSize; ++i) {
        auto byte = static_cast<std::uint8_t>(payload[i]);
        if (byte > kMaxHeight) throw ProtocolError("pin " + std::to_string(i) + " height byte exceeds 100");
        frame[i] = byte;
    }
    return frame;
}

std::string_view bytesOf(const WireFrame& frame) {
    return {reinterpret_cast<const char*>(frame.data()), frame.size()};
}

std::vector<std::pair<std::size_t, bool>> detectPresses(const HeightField& target, const WireFrame& actual,
                                                        const std::vector<sim::PinState>& pins, double threshold) {
    std::vector<std::pair<std::size_t, bool>> out;
    for (std::size_t i = 0; i < pins.size() && i < kWireFrameSize; ++i) {
        if (!pins[i].isButton) continue;
        out.emplace_back(i, actual[i] < target.at(i) - threshold);
    }
    return out;
}

HeightField releasedTargets(const sim::Scene& scene) {
    HeightField target = scene.field();
    const auto& pins = scene.pins();
    for (const auto& button : scene.buttons()) {
        for (std::size_t i = 0; i < pins.size(); ++i) {
            if (pins[i].isButton && pins[i].buttonGroupId == button.id) target.set(i, button.initHeight);
        }
    }
    return target;
}

void onActualHeights(const WireFrame& actual, sim::Scene& scene, double threshold) {
    for (const auto& [index, pressed] : detectPresses(releasedTargets(scene), actual, scene.pins(), threshold)) {
        scene.setPinPressing(index, pressed);
    }
}

} // namespace pinauthor::hw
