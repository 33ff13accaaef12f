#pragma once

#include "pinauthor/core/types.hpp"

#include <string>
#include <vector>

namespace pinauthor {

// Slider range for a generated parameter: one third to three times the
// initial value, ordered by sign. Zero gets a fixed [-10, 10] window.
SliderSpec sliderBounds(double initial);
SliderSpec sliderBounds(const std::string& name, double initial);

std::vector<SliderSpec> slidersFor(const ParamMap& params);

} // namespace pinauthor
