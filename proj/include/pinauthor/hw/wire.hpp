#pragma once

#include "pinauthor/core/errors.hpp"
#include "pinauthor/core/height_field.hpp"
#include "pinauthor/sim/runtime.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace pinauthor::hw {

inline constexpr std::size_t kWireFrameSize = kPinCount;
inline constexpr double kPressThreshold = 10.0;

// One unsigned byte per pin, 0..100, row-major in pinIndex order.
using WireFrame = std::array<std::uint8_t, kWireFrameSize>;

class ProtocolError : public Error {
public:
    using Error::Error;
};

// Round half up after clamping to [0, 100].
std::uint8_t quantize(double height);

WireFrame encode(const HeightField& field);
HeightField decode(const WireFrame& frame);

// Throws ProtocolError for a wrong length or a byte above 100.
WireFrame parseWireFrame(std::string_view payload);
std::string_view bytesOf(const WireFrame& frame);

// (pin index, isPressing) for every button pin: pressing iff
// actual < target - threshold.
std::vector<std::pair<std::size_t, bool>> detectPresses(const HeightField& target, const WireFrame& actual,
                                                        const std::vector<sim::PinState>& pins,
                                                        double threshold = kPressThreshold);

// The scene's current targets with every button pin at its released
// height, so a pressed (lowered) button does not move its own reference.
HeightField releasedTargets(const sim::Scene& scene);

// Applies detectPresses against releasedTargets(scene).
void onActualHeights(const WireFrame& actual, sim::Scene& scene, double threshold = kPressThreshold);

} // namespace pinauthor::hw
