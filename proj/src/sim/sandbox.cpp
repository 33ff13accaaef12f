#include "pinauthor/sim/sandbox.hpp"

#include "pinauthor/core/errors.hpp"

#include <cmath>
#include <map>
#include <set>

namespace pinauthor::sim {

using script::Interpreter;
using script::Value;

Sandbox::Sandbox(script::RealmOptions options) : interp_(options), pins_(kPinCount) { installHostApi(); }

void Sandbox::installHostApi() {
    Interpreter& I = interp_;

    script::Object* pinProto = I.newObject();
    script::NativeObject* setPos = I.newFunction("setPos", 1, [this](Interpreter& I, Value self, std::span<const Value> args) {
        auto it = self.isObject() ? pinIndex_.find(self.asObject()) : pinIndex_.end();
        if (it == pinIndex_.end()) I.throwError(script::ErrorType::TypeError, "setPos called on a non-pin value");
        heights_[it->second] = args.empty() ? std::nan("") : I.toNumber(args[0]);
        return Value();
    });
    pinProto->props.set(I.atom("setPos"), Value::object(setPos));

    std::vector<Value> pinValues;
    pinValues.reserve(kPinCount);
    pinObjects_.reserve(kPinCount);
    for (std::size_t i = 0; i < kPinCount; ++i) {
        script::Object* pin = I.newObject(pinProto);
        pin->props.set(I.atom("isButton"), Value::boolean(false));
        pin->props.set(I.atom("isPressing"), Value::boolean(false));
        pin->props.set(I.atom("buttonGroup_id"), Value::null());
        pinObjects_.push_back(pin);
        pinIndex_.emplace(pin, i);
        pinValues.push_back(Value::object(pin));
    }
    script::ArrayObject* pinsArray = I.newArray(std::move(pinValues));
    pinsArray->frozen = true;

    script::Object* display = I.newObject();
    display->props.set(I.atom("grid_x"), Value::number(kGridX));
    display->props.set(I.atom("grid_y"), Value::number(kGridY));
    display->props.set(I.atom("Pins"), Value::object(pinsArray));
    display->props.set(I.atom("getPin"), Value::object(I.newFunction("getPin", 1, [this](Interpreter& I, Value, std::span<const Value> args) {
        double d = args.empty() ? std::nan("") : I.toNumber(args[0]);
        if (!(d >= 0 && d < static_cast<double>(kPinCount)) || d != std::floor(d)) return Value();
        return Value::object(pinObjects_[static_cast<std::size_t>(d)]);
    })));
    display->frozen = true;
    I.defineGlobal("ShapeDisplay", Value::object(display));

    I.defineGlobal("initializeButtons", Value::object(I.newFunction("initializeButtons", 1, [this](Interpreter& I, Value, std::span<const Value> args) {
        try {
            auto layout = parseButtons(args.empty() ? Value() : args[0]);
            if (layout != buttons_) {
                realizeButtons(std::move(layout));
                syncPins();
            }
        } catch (const ValidationError& e) {
            I.throwError(script::ErrorType::TypeError, e.what());
        }
        return Value();
    })));
    I.collectGarbage();
}

script::Env* Sandbox::instantiate(const std::string& source) {
    const script::Program& program = interp_.parse(source);
    script::Env* scope = interp_.newGlobalScope();
    interp_.run(program, scope);
    return scope;
}

std::vector<ButtonSpec> Sandbox::parseButtons(Value params) {
    Interpreter& I = interp_;
    if (!params.isObject()) throw ValidationError("initializeButtons expects the interaction parameter object");
    Value list = I.get(params, "buttons");
    if (list.isUndefined()) list = I.get(params, "button");
    if (list.isUndefined()) return {};
    if (!list.isObject() || list.asObject()->kind != script::ObjectKind::Array) {
        throw ValidationError("params.buttons must be a list");
    }
    auto integer = [&](Value v, const char* what) {
        double d = I.toNumber(v);
        if (!std::isfinite(d)) throw ValidationError(std::string("button ") + what + " must be a finite number");
        return static_cast<int>(std::floor(d));
    };
    std::vector<ButtonSpec> out;
    for (Value entry : static_cast<script::ArrayObject*>(list.asObject())->elements) {
        if (!entry.isObject()) throw ValidationError("each button must be an object");
        ButtonSpec spec;
        spec.id = integer(I.get(entry, "id"), "id");
        Value size = I.get(entry, "size");
        spec.size = size.isUndefined() ? 1 : integer(size, "size");
        Value position = I.get(entry, "position");
        if (!position.isObject()) throw ValidationError("button position must be [x, y] or {x, y}");
        if (position.asObject()->kind == script::ObjectKind::Array) {
            spec.x = integer(I.getComputed(position, Value::number(0)), "position x");
            spec.y = integer(I.getComputed(position, Value::number(1)), "position y");
        } else {
            spec.x = integer(I.get(position, "x"), "position x");
            spec.y = integer(I.get(position, "y"), "position y");
        }
        Value height = I.get(entry, "init_height");
        if (height.isUndefined()) height = I.get(entry, "initHeight");
        double h = height.isUndefined() ? 0.0 : I.toNumber(height);
        if (!std::isfinite(h)) throw ValidationError("button init_height must be a finite number");
        spec.initHeight = clampHeight(h);
        out.push_back(spec);
    }
    return out;
}

void Sandbox::realizeButtons(std::vector<ButtonSpec> buttons) {
    std::set<int> ids;
    std::vector<int> owner(kPinCount, -1);
    for (std::size_t b = 0; b < buttons.size(); ++b) {
        const ButtonSpec& spec = buttons[b];
        if (spec.size != 1 && spec.size != 2) {
            throw ValidationError("button " + std::to_string(spec.id) + " size must be 1 or 2");
        }
        if (!ids.insert(spec.id).second) throw ValidationError("duplicate button id " + std::to_string(spec.id));
        if (spec.x < 0 || spec.y < 0 || spec.x + spec.size > kGridX || spec.y + spec.size > kGridY) {
            throw ValidationError("button " + std::to_string(spec.id) + " footprint lies outside the grid");
        }
        for (int dy = 0; dy < spec.size; ++dy) {
            for (int dx = 0; dx < spec.size; ++dx) {
                std::size_t i = pinIndex(spec.x + dx, spec.y + dy);
                if (owner[i] >= 0) throw ValidationError("button " + std::to_string(spec.id) + " overlaps another button");
                owner[i] = static_cast<int>(b);
            }
        }
    }

    std::set<int> pressedGroups;
    for (const PinState& pin : pins_) {
        if (pin.isButton && pin.isPressing) pressedGroups.insert(pin.buttonGroupId);
    }
    for (std::size_t i = 0; i < kPinCount; ++i) {
        PinState& pin = pins_[i];
        if (owner[i] < 0) {
            pin = PinState{};
            continue;
        }
        int id = buttons[static_cast<std::size_t>(owner[i])].id;
        pin.isButton = true;
        pin.buttonGroupId = id;
        pin.isPressing = pressedGroups.count(id) > 0;
    }
    buttons_ = std::move(buttons);
}

bool Sandbox::hasGroup(int groupId) const {
    for (const ButtonSpec& b : buttons_) {
        if (b.id == groupId) return true;
    }
    return false;
}

void Sandbox::setGroupPressing(int groupId, bool pressed) {
    if (!hasGroup(groupId)) throw NotFoundError("unknown button group " + std::to_string(groupId));
    for (PinState& pin : pins_) {
        if (pin.isButton && pin.buttonGroupId == groupId) pin.isPressing = pressed;
    }
}

void Sandbox::setPinPressing(std::size_t index, bool pressed) {
    if (index >= kPinCount) throw BoundsError("pin index out of range");
    if (pins_[index].isButton) pins_[index].isPressing = pressed;
}

void Sandbox::clearNonButtonPins() {
    for (std::size_t i = 0; i < kPinCount; ++i) {
        if (!pins_[i].isButton) heights_[i] = 0.0;
    }
}

void Sandbox::renderButtons(double pressDepthRatio) {
    std::map<int, double> heightById;
    for (const ButtonSpec& b : buttons_) heightById[b.id] = b.initHeight;
    for (std::size_t i = 0; i < kPinCount; ++i) {
        const PinState& pin = pins_[i];
        if (!pin.isButton) continue;
        double h = heightById[pin.buttonGroupId];
        heights_[i] = pin.isPressing ? h * pressDepthRatio : h;
    }
}

HeightField Sandbox::snapshot() const {
    HeightField field;
    for (std::size_t i = 0; i < kPinCount; ++i) field.set(i, heights_[i]);
    return field;
}

void Sandbox::syncPins() {
    Interpreter& I = interp_;
    script::Atom isButton = I.atom("isButton");
    script::Atom isPressing = I.atom("isPressing");
    script::Atom group = I.atom("buttonGroup_id");
    for (std::size_t i = 0; i < kPinCount; ++i) {
        script::Object* pin = pinObjects_[i];
        const PinState& state = pins_[i];
        pin->props.set(isButton, Value::boolean(state.isButton));
        pin->props.set(isPressing, Value::boolean(state.isButton && state.isPressing));
        pin->props.set(group, state.isButton ? Value::number(state.buttonGroupId) : Value::null());
    }
}

void Sandbox::collect(std::span<const Value> extraRoots) { interp_.maybeCollect(extraRoots); }

} // namespace pinauthor::sim
