#pragma once

#include "pinauthor/core/height_field.hpp"
#include "pinauthor/script/interpreter.hpp"

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pinauthor::sim {

struct ButtonSpec {
    int id = 0;
    int size = 1; // footprint is size x size pins
    int x = 0;    // anchor column
    int y = 0;    // anchor row
    double initHeight = 0.0;

    friend bool operator==(const ButtonSpec&, const ButtonSpec&) = default;
};

struct PinState {
    bool isButton = false;
    bool isPressing = false;
    int buttonGroupId = 0; // meaningful only when isButton
};

// One script realm with the host surface installed:
//   ShapeDisplay.grid_x / grid_y / Pins / getPin(i), Pin.setPos(h),
//   Pin.isButton / isPressing / buttonGroup_id, initializeButtons(params).
// Every artifact is instantiated in its own top-level scope so the
// per-category entry points (initializeParams, dynamicScript) never clash.
class Sandbox {
public:
    explicit Sandbox(script::RealmOptions options = {});
    Sandbox(const Sandbox&) = delete;
    Sandbox& operator=(const Sandbox&) = delete;

    script::Interpreter& interp() { return interp_; }

    // Parse + run top-level code in a fresh scope. Throws script::SyntaxError,
    // script::ScriptError or script::BudgetExceeded.
    script::Env* instantiate(const std::string& source);
    script::Value lookup(script::Env* scope, std::string_view name) { return interp_.lookup(scope, name); }

    // Raw (unclamped) heights as written by setPos during the current frame.
    std::array<double, kPinCount>& heights() { return heights_; }
    const std::vector<PinState>& pins() const { return pins_; }
    const std::vector<ButtonSpec>& buttons() const { return buttons_; }

    // Replaces the button layout. Press state survives for group ids that
    // remain. Throws ValidationError for footprints outside the grid,
    // duplicate ids or sizes other than 1 and 2.
    void realizeButtons(std::vector<ButtonSpec> buttons);
    // Reads `params.buttons` the way initializeButtons does.
    std::vector<ButtonSpec> parseButtons(script::Value params);

    void setGroupPressing(int groupId, bool pressed);
    void setPinPressing(std::size_t index, bool pressed);
    bool hasGroup(int groupId) const;

    void clearNonButtonPins();
    void renderButtons(double pressDepthRatio);
    HeightField snapshot() const;

    // Copies host pin state onto the script-visible pin objects.
    void syncPins();

    // Root set for collections: everything the host still references.
    void collect(std::span<const script::Value> extraRoots);

private:
    void installHostApi();

    script::Interpreter interp_;
    std::array<double, kPinCount> heights_{};
    std::vector<PinState> pins_;
    std::vector<ButtonSpec> buttons_;
    std::vector<script::Object*> pinObjects_;
    std::unordered_map<const script::Object*, std::size_t> pinIndex_;
    bool pinsDirty_ = true;
};

} // namespace pinauthor::sim
