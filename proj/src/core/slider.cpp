#include "pinauthor/core/slider.hpp"

#include "pinauthor/core/errors.hpp"

#include <cmath>

namespace pinauthor {

namespace {
constexpr double kScale = 3.0;
constexpr double kZeroHalfWidth = 10.0;
} // namespace

SliderSpec sliderBounds(const std::string& name, double initial) {
    if (!std::isfinite(initial)) {
        throw ValidationError("slider initial value for '" + name + "' is not finite");
    }
    SliderSpec spec{name, initial, 0.0, 0.0};
    if (initial > 0.0) {
        spec.min = initial / kScale;
        spec.max = initial * kScale;
    } else if (initial < 0.0) {
        spec.min = initial * kScale;
        spec.max = initial / kScale;
    } else {
        spec.min = -kZeroHalfWidth;
        spec.max = kZeroHalfWidth;
    }
    return spec;
}

SliderSpec sliderBounds(double initial) { return sliderBounds("", initial); }

std::vector<SliderSpec> slidersFor(const ParamMap& params) {
    std::vector<SliderSpec> sliders;
    sliders.reserve(params.size());
    for (const auto& [name, value] : params) sliders.push_back(sliderBounds(name, value));
    return sliders;
}

} // namespace pinauthor
