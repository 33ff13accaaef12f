#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace pinauthor {

inline constexpr int kGridX = 24;
inline constexpr int kGridY = 24;
inline constexpr std::size_t kPinCount = static_cast<std::size_t>(kGridX) * kGridY;

// Logical height units; 1 unit == 1 mm of pin stroke.
inline constexpr double kMinHeight = 0.0;
inline constexpr double kMaxHeight = 100.0;

// Row-major: x is the column, y is the row.
std::size_t pinIndex(int x, int y);

// 24x24 grid of pin heights. Heights are kept inside [0, 100]; setters clamp.
class HeightField {
public:
    HeightField() { heights_.fill(0.0); }

    double at(std::size_t index) const { return heights_.at(index); }
    double at(int x, int y) const { return heights_[pinIndex(x, y)]; }

    void set(std::size_t index, double height);
    void set(int x, int y, double height) { set(pinIndex(x, y), height); }

    std::span<const double, kPinCount> heights() const { return heights_; }

    double minHeight() const;
    double maxHeight() const;

    friend bool operator==(const HeightField&, const HeightField&) = default;

private:
    std::array<double, kPinCount> heights_;
};

// NaN maps to 0; +/-inf map to the nearest bound.
double clampHeight(double h);

} // namespace pinauthor
