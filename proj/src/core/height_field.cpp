#include "pinauthor/core/height_field.hpp"

#include "pinauthor/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pinauthor {

std::size_t pinIndex(int x, int y) {
    if (x < 0 || x >= kGridX || y < 0 || y >= kGridY) {
        throw BoundsError("pin coordinate (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") outside 24x24 grid");
    }
    return static_cast<std::size_t>(y) * kGridX + static_cast<std::size_t>(x);
}

double clampHeight(double h) {
    if (std::isnan(h)) return kMinHeight;
    return std::clamp(h, kMinHeight, kMaxHeight);
}

void HeightField::set(std::size_t index, double height) {
    if (index >= kPinCount) {
        throw BoundsError("pin index " + std::to_string(index) + " outside 0..575");
    }
    heights_[index] = clampHeight(height);
}

double HeightField::minHeight() const {
    return *std::min_element(heights_.begin(), heights_.end());
}

double HeightField::maxHeight() const {
    return *std::max_element(heights_.begin(), heights_.end());
}

} // namespace pinauthor
