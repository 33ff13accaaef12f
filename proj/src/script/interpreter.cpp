#include "pinauthor/script/interpreter.hpp"

#include "pinauthor/script/conversions.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace pinauthor::script {

class ScopeGuard {
public:
    ScopeGuard(Interpreter& interp, Env* parent, bool captured)
        : interp_(interp), env(interp.acquireScope(parent, captured)), captured_(captured) {}
    ~ScopeGuard() {
        if (!captured_) interp_.recycleScope(env);
    }
    ScopeGuard(const ScopeGuard&) = delete;
    ScopeGuard& operator=(const ScopeGuard&) = delete;

private:
    Interpreter& interp_;

public:
    Env* env;

private:
    bool captured_;
};

namespace {

// Unwinding a caught exception costs far more than an ordinary step.
constexpr std::uint64_t kCaughtThrowCost = 2000;

constexpr std::uint64_t kUnwoundFrameCost = 1000;

struct DepthGuard {
    DepthGuard(int& depth, int limit, Interpreter& interp)
        : depth_(depth), interp_(interp), uncaught_(std::uncaught_exceptions()) {
        if (++depth_ > limit) {
            --depth_;
            interp.throwError(ErrorType::RangeError, "Maximum call stack size exceeded");
        }
    }
    ~DepthGuard() {
        --depth_;
        if (std::uncaught_exceptions() > uncaught_) interp_.noteUnwoundFrame();
    }
    int& depth_;
    Interpreter& interp_;
    int uncaught_;
};

struct NewTargetGuard {
    NewTargetGuard(Object*& slot, Object* value) : slot_(slot), saved_(slot) { slot_ = value; }
    ~NewTargetGuard() { slot_ = saved_; }
    Object*& slot_;
    Object* saved_;
};

} // namespace

Interpreter::Interpreter(RealmOptions options)
    : options_(options), heap_(options.heap), rng_(options.randomSeed),
      instructionLimit_(options.instructionLimit) {
    names.length = atom("length");
    names.prototype = atom("prototype");
    names.constructor = atom("constructor");
    names.name = atom("name");
    names.message = atom("message");
    names.thisAtom = atom("this");
    names.funcAtom = atom("%function");
    names.newTargetAtom = atom("%newtarget");
    names.arguments = atom("arguments");
    names.lineNumber = atom("lineNumber");
    names.toStringAtom = atom("toString");
    names.valueOf = atom("valueOf");
    names.size = atom("size");
    names.stack = atom("stack");

    builtins_ = heap_.make<Env>(nullptr);
    builtins_->declare(names.thisAtom, Value(), false, true);
    installBuiltins(*this);
    collectGarbage();
}

Interpreter::~Interpreter() = default;

// ---------------------------------------------------------------------------
// Host API

const Program& Interpreter::parse(std::string_view source) {
    auto program = parseProgram(source, heap_.atoms());
    programs_.push_back(std::move(program));
    return *programs_.back();
}

Env* Interpreter::newGlobalScope() {
    Env* scope = heap_.make<Env>(builtins_);
    scopes_.push_back(scope);
    return scope;
}

void Interpreter::releaseScope(Env* scope) {
    std::erase(scopes_, scope);
}

ScriptError Interpreter::toScriptError(const ThrowSignal& signal) {
    Value v = signal.value;
    std::uint32_t line = 0;
    if (v.isObject()) {
        Object* o = v.asObject();
        std::string name = "Error";
        std::string message;
        for (Object* p = o; p; p = p->proto) {
            if (const Value* n = p->props.find(names.name); n && n->isString()) {
                name = n->asString()->text;
                break;
            }
        }
        if (const Value* m = o->props.find(names.message); m && m->isString()) message = m->asString()->text;
        if (const Value* l = o->props.find(names.lineNumber); l && l->isNumber()) {
            line = static_cast<std::uint32_t>(l->asNumber());
        }
        if (o->kind != ObjectKind::Error && message.empty()) {
            return ScriptError("Uncaught", describe(v), line_);
        }
        return ScriptError(name, message, line);
    }
    return ScriptError("Uncaught", describe(v), line_);
}

void Interpreter::run(const Program& program, Env* scope) {
    try {
        for (Atom name : program.topVarNames) {
            if (!scope->find(name)) scope->declare(name, Value(), true, true);
        }
        hoist(program.body->lexicals, program.body->functions, scope);
        execStatements(program.body->body, scope);
    } catch (const ThrowSignal& signal) {
        throw toScriptError(signal);
    }
}

Value Interpreter::call(Value fn, Value self, std::span<const Value> args) {
    try {
        return callValue(fn, self, args);
    } catch (const ThrowSignal& signal) {
        throw toScriptError(signal);
    }
}

Value Interpreter::lookup(Env* scope, std::string_view name) {
    Env::Binding* b = findBinding(atom(name), scope);
    if (!b || !b->initialized) return Value();
    return b->value;
}

void Interpreter::define(Env* scope, std::string_view name, Value value, bool isMutable) {
    scope->declare(atom(name), value, isMutable, true);
}

void Interpreter::defineGlobal(std::string_view name, Value value) {
    builtins_->declare(atom(name), value, false, true);
}

void Interpreter::beginFrame() {
    instructions_ = 0;
    unwoundFrames_ = 0;
    heap_.beginRun();
    callDepth_ = 0;
    shortCircuit_ = false;
}

void Interpreter::instructionBudgetExceeded() {
    throw BudgetExceeded(BudgetExceeded::Kind::Instructions,
                         "instruction budget exceeded (" + std::to_string(instructionLimit_) + ")");
}

void Interpreter::appendConsole(std::string line) {
    if (console_.size() < options_.maxConsoleLines) console_.push_back(std::move(line));
}

double Interpreter::random() {
    return std::generate_canonical<double, 53>(rng_);
}

void Interpreter::collectGarbage(std::span<const Value> extraRoots) {
    freeScopes_.clear();
    Tracer tracer;
    tracer.mark(builtins_);
    for (Env* scope : scopes_) tracer.mark(scope);
    for (StringCell* s : atomStrings_) tracer.mark(s);
    for (Object* proto : {intrinsics_.objectProto, intrinsics_.functionProto, intrinsics_.arrayProto,
                          intrinsics_.stringProto, intrinsics_.numberProto, intrinsics_.booleanProto,
                          intrinsics_.errorProto, intrinsics_.typeErrorProto, intrinsics_.rangeErrorProto,
                          intrinsics_.referenceErrorProto, intrinsics_.syntaxErrorProto, intrinsics_.mapProto,
                          intrinsics_.setProto}) {
        tracer.mark(proto);
    }
    tracer.mark(completion_);
    completion_ = Value();
    for (const Value& v : extraRoots) tracer.mark(v);
    heap_.collect(tracer);
}

void Interpreter::maybeCollect(std::span<const Value> extraRoots) {
    if (heap_.bytesSinceCollect() > (16u << 20)) collectGarbage(extraRoots);
}

// ---------------------------------------------------------------------------
// Values

Atom Interpreter::atom(std::string_view text) {
    std::size_t before = heap_.atoms().size();
    Atom a = heap_.atoms().intern(text);
    if (heap_.atoms().size() != before) heap_.charge(2 * text.size() + 112);
    return a;
}

Value Interpreter::string(std::string_view text) {
    return Value::string(heap_.makeString(std::string(text)));
}

Value Interpreter::atomString(Atom a) {
    if (a >= atomStrings_.size()) atomStrings_.resize(heap_.atoms().size(), nullptr);
    StringCell*& cell = atomStrings_[a];
    if (!cell) cell = heap_.makeString(heap_.atoms().name(a));
    return Value::string(cell);
}

Object* Interpreter::newObject() {
    return heap_.make<Object>(ObjectKind::Plain, intrinsics_.objectProto);
}

Object* Interpreter::newObject(Object* proto) {
    return heap_.make<Object>(ObjectKind::Plain, proto);
}

ArrayObject* Interpreter::newArray(std::size_t size) {
    heap_.charge(size * sizeof(Value));
    auto* array = heap_.make<ArrayObject>(intrinsics_.arrayProto);
    array->elements.resize(size);
    return array;
}

ArrayObject* Interpreter::newArray(std::vector<Value> elements) {
    heap_.charge(elements.size() * sizeof(Value));
    auto* array = heap_.make<ArrayObject>(intrinsics_.arrayProto);
    array->elements = std::move(elements);
    return array;
}

void Interpreter::pushElement(ArrayObject* array, Value value) {
    heap_.charge(sizeof(Value));
    array->elements.push_back(value);
}

NativeObject* Interpreter::newFunction(std::string name, int arity, NativeFn fn, bool constructible) {
    auto* native = heap_.make<NativeObject>(intrinsics_.functionProto, std::move(name), std::move(fn), constructible);
    native->props.set(names.length, Value::number(arity));
    return native;
}

std::optional<std::uint32_t> Interpreter::atomIndex(Atom a) {
    if (a >= atomIndexCache_.size()) atomIndexCache_.resize(heap_.atoms().size() + 64, -2);
    std::int64_t& cached = atomIndexCache_[a];
    if (cached == -2) {
        auto idx = parseArrayIndex(heap_.atoms().name(a));
        cached = idx ? static_cast<std::int64_t>(*idx) : -1;
    }
    if (cached < 0) return std::nullopt;
    return static_cast<std::uint32_t>(cached);
}

Atom Interpreter::toPropertyKey(Value key) {
    if (key.isString()) return atom(key.asString()->text);
    if (key.isNumber()) return atom(numberToString(key.asNumber()));
    return atom(toString(key));
}

Value Interpreter::functionName(Object* fn) {
    if (fn->kind == ObjectKind::Native) return string(static_cast<NativeObject*>(fn)->name);
    if (fn->kind == ObjectKind::Closure) {
        auto* c = static_cast<ClosureObject*>(fn);
        if (c->fn && c->fn->name) return atomString(*c->fn->name);
        if (c->classNode && c->classNode->name) return atomString(*c->classNode->name);
    }
    if (fn->kind == ObjectKind::Bound) {
        auto* b = static_cast<BoundObject*>(fn);
        return string("bound " + toString(functionName(b->target.asObject())));
    }
    return string("");
}

int Interpreter::functionLength(Object* fn) {
    if (fn->kind != ObjectKind::Closure) return 0;
    auto* c = static_cast<ClosureObject*>(fn);
    if (!c->fn) return 0;
    int n = 0;
    for (const auto& p : c->fn->params) {
        if (p->kind == NodeKind::AssignPattern || p->kind == NodeKind::Rest) break;
        ++n;
    }
    return n;
}

int Interpreter::declaredParameterCount(Value fn) {
    if (!isCallable(fn)) return 0;
    Object* o = fn.asObject();
    if (o->kind == ObjectKind::Closure) {
        auto* c = static_cast<ClosureObject*>(o);
        return c->fn ? static_cast<int>(c->fn->params.size()) : 0;
    }
    if (o->kind == ObjectKind::Bound) {
        auto* b = static_cast<BoundObject*>(o);
        return std::max(0, declaredParameterCount(b->target) - static_cast<int>(b->boundArgs.size()));
    }
    double n = toNumber(getProperty(fn, names.length));
    return std::isfinite(n) ? static_cast<int>(n) : 0;
}

Value Interpreter::getObjectProperty(Object* object, Atom key) {
    switch (object->kind) {
    case ObjectKind::Array: {
        auto* array = static_cast<ArrayObject*>(object);
        if (key == names.length) return Value::number(static_cast<double>(array->elements.size()));
        if (auto idx = atomIndex(key)) {
            return *idx < array->elements.size() ? array->elements[*idx] : Value();
        }
        break;
    }
    case ObjectKind::Map:
    case ObjectKind::Set:
        if (key == names.size) {
            return Value::number(static_cast<double>(static_cast<CollectionObject*>(object)->store.size()));
        }
        break;
    case ObjectKind::Closure:
    case ObjectKind::Native:
    case ObjectKind::Bound:
        if (const Value* own = object->props.find(key)) return *own;
        if (key == names.name) return functionName(object);
        if (key == names.length) return Value::number(functionLength(object));
        if (key == names.prototype && object->kind == ObjectKind::Closure) {
            auto* c = static_cast<ClosureObject*>(object);
            if (c->fn && !c->fn->isArrow && !c->homeObject) {
                Object* proto = newObject();
                proto->props.set(names.constructor, Value::object(object));
                object->props.set(names.prototype, Value::object(proto));
                return Value::object(proto);
            }
        }
        break;
    default: break;
    }
    for (Object* p = object; p; p = p->proto) {
        if (const Value* v = p->props.find(key)) return *v;
    }
    return Value();
}

Value Interpreter::getProperty(Value base, Atom key) {
    switch (base.type()) {
    case Type::Undefined:
    case Type::Null:
        throwError(ErrorType::TypeError, "Cannot read properties of " + std::string(base.isNull() ? "null" : "undefined") +
                                             " (reading '" + atomName(key) + "')");
    case Type::Boolean:
        if (const Value* v = intrinsics_.booleanProto->props.find(key)) return *v;
        return getObjectProperty(intrinsics_.objectProto, key);
    case Type::Number:
        if (const Value* v = intrinsics_.numberProto->props.find(key)) return *v;
        return getObjectProperty(intrinsics_.objectProto, key);
    case Type::String: {
        const std::string& text = base.asString()->text;
        if (key == names.length) return Value::number(static_cast<double>(text.size()));
        if (auto idx = atomIndex(key)) {
            if (*idx < text.size()) return string(text.substr(*idx, 1));
            return Value();
        }
        return getObjectProperty(intrinsics_.stringProto, key);
    }
    case Type::Object: return getObjectProperty(base.asObject(), key);
    }
    return Value();
}

Value Interpreter::getIndexed(Value base, double index, bool& handled) {
    handled = false;
    if (!(index >= 0 && index < 4294967295.0) || index != std::floor(index)) return Value();
    auto i = static_cast<std::size_t>(index);
    if (base.isObject() && base.asObject()->kind == ObjectKind::Array) {
        handled = true;
        auto& elements = static_cast<ArrayObject*>(base.asObject())->elements;
        return i < elements.size() ? elements[i] : Value();
    }
    if (base.isString()) {
        handled = true;
        const std::string& text = base.asString()->text;
        return i < text.size() ? string(text.substr(i, 1)) : Value();
    }
    return Value();
}

Value Interpreter::getComputed(Value base, Value key) {
    if (key.isNumber()) {
        bool handled = false;
        Value v = getIndexed(base, key.asNumber(), handled);
        if (handled) return v;
    }
    if (base.isNullish()) {
        throwError(ErrorType::TypeError, "Cannot read properties of " + std::string(base.isNull() ? "null" : "undefined") +
                                             " (reading '" + toString(key) + "')");
    }
    return getProperty(base, toPropertyKey(key));
}

void Interpreter::setArrayElement(ArrayObject* array, std::uint32_t index, Value value) {
    auto& elements = array->elements;
    if (index < elements.size()) {
        elements[index] = value;
        return;
    }
    std::size_t grow = static_cast<std::size_t>(index) + 1 - elements.size();
    heap_.charge(grow * sizeof(Value));
    tick(grow / 16);
    elements.resize(static_cast<std::size_t>(index) + 1);
    elements[index] = value;
}

void Interpreter::setArrayLength(ArrayObject* array, double length) {
    if (!(length >= 0 && length < 4294967296.0) || length != std::floor(length)) {
        throwError(ErrorType::RangeError, "Invalid array length");
    }
    auto n = static_cast<std::size_t>(length);
    if (n > array->elements.size()) {
        heap_.charge((n - array->elements.size()) * sizeof(Value));
        tick((n - array->elements.size()) / 16);
    }
    array->elements.resize(n);
}

bool Interpreter::setIndexed(Value base, double index, Value value) {
    if (!base.isObject() || base.asObject()->kind != ObjectKind::Array) return false;
    if (!(index >= 0 && index < 4294967295.0) || index != std::floor(index)) return false;
    auto* array = static_cast<ArrayObject*>(base.asObject());
    if (array->frozen) return true;
    setArrayElement(array, static_cast<std::uint32_t>(index), value);
    return true;
}

void Interpreter::setProperty(Value base, Atom key, Value value) {
    if (base.isNullish()) {
        throwError(ErrorType::TypeError, "Cannot set properties of " + std::string(base.isNull() ? "null" : "undefined") +
                                             " (setting '" + atomName(key) + "')");
    }
    if (!base.isObject()) return;
    Object* object = base.asObject();
    if (object->frozen) return;
    if (object->kind == ObjectKind::Array) {
        auto* array = static_cast<ArrayObject*>(object);
        if (key == names.length) {
            setArrayLength(array, toNumber(value));
            return;
        }
        if (auto idx = atomIndex(key)) {
            setArrayElement(array, *idx, value);
            return;
        }
    }
    std::size_t before = object->props.size();
    object->props.set(key, value);
    if (object->props.size() != before) heap_.charge(sizeof(std::pair<Atom, Value>) + 48);
}

void Interpreter::setComputed(Value base, Value key, Value value) {
    if (key.isNumber() && setIndexed(base, key.asNumber(), value)) return;
    if (base.isNullish()) {
        throwError(ErrorType::TypeError, "Cannot set properties of " + std::string(base.isNull() ? "null" : "undefined") +
                                             " (setting '" + toString(key) + "')");
    }
    setProperty(base, toPropertyKey(key), value);
}

bool Interpreter::hasProperty(Object* object, Atom key) {
    if (object->kind == ObjectKind::Array) {
        auto* array = static_cast<ArrayObject*>(object);
        if (key == names.length) return true;
        if (auto idx = atomIndex(key)) return *idx < array->elements.size();
    }
    if (object->isCallable() && (key == names.name || key == names.length)) return true;
    for (Object* p = object; p; p = p->proto) {
        if (p->props.find(key)) return true;
    }
    return false;
}

std::vector<Atom> Interpreter::ownKeys(Object* object) {
    std::vector<Atom> keys;
    if (object->kind == ObjectKind::Array) {
        auto* array = static_cast<ArrayObject*>(object);
        tick(array->elements.size() / 8);
        for (std::size_t i = 0; i < array->elements.size(); ++i) keys.push_back(atom(std::to_string(i)));
    }
    for (const auto& [k, v] : object->props.slots()) keys.push_back(k);
    return keys;
}

bool Interpreter::isConstructor(Value v) const {
    if (!v.isObject()) return false;
    Object* o = v.asObject();
    switch (o->kind) {
    case ObjectKind::Closure: {
        auto* c = static_cast<ClosureObject*>(o);
        if (c->classNode) return true;
        return c->fn && !c->fn->isArrow && !c->homeObject;
    }
    case ObjectKind::Native: return static_cast<NativeObject*>(o)->constructible;
    case ObjectKind::Bound: return isConstructor(static_cast<BoundObject*>(o)->target);
    default: return false;
    }
}

Object* Interpreter::prototypeFor(Object* newTarget, Object* fallback) {
    if (!newTarget) return fallback;
    Value p = getObjectProperty(newTarget, names.prototype);
    return p.isObject() ? p.asObject() : fallback;
}

// ---------------------------------------------------------------------------
// Conversions

bool Interpreter::truthy(Value v) const {
    switch (v.type()) {
    case Type::Undefined:
    case Type::Null: return false;
    case Type::Boolean: return v.asBoolean();
    case Type::Number: return v.asNumber() != 0.0 && !std::isnan(v.asNumber());
    case Type::String: return !v.asString()->text.empty();
    case Type::Object: return true;
    }
    return false;
}

Value Interpreter::toPrimitive(Value v, bool preferString) {
    if (!v.isObject()) return v;
    Atom order[2] = {names.valueOf, names.toStringAtom};
    if (preferString) std::swap(order[0], order[1]);
    for (Atom method : order) {
        Value fn = getProperty(v, method);
        if (isCallable(fn)) {
            Value result = callValue(fn, v, {});
            if (!result.isObject()) return result;
        }
    }
    throwError(ErrorType::TypeError, "Cannot convert object to primitive value");
}

double Interpreter::toNumber(Value v) {
    switch (v.type()) {
    case Type::Undefined: return std::nan("");
    case Type::Null: return 0.0;
    case Type::Boolean: return v.asBoolean() ? 1.0 : 0.0;
    case Type::Number: return v.asNumber();
    case Type::String: return stringToNumber(v.asString()->text);
    case Type::Object: return toNumber(toPrimitive(v, false));
    }
    return std::nan("");
}

std::string Interpreter::toString(Value v) {
    switch (v.type()) {
    case Type::Undefined: return "undefined";
    case Type::Null: return "null";
    case Type::Boolean: return v.asBoolean() ? "true" : "false";
    case Type::Number: return numberToString(v.asNumber());
    case Type::String: return v.asString()->text;
    case Type::Object: return toString(toPrimitive(v, true));
    }
    return {};
}

Value Interpreter::toStringValue(Value v) {
    if (v.isString()) return v;
    return string(toString(v));
}

std::string Interpreter::typeOf(Value v) const {
    switch (v.type()) {
    case Type::Undefined: return "undefined";
    case Type::Null: return "object";
    case Type::Boolean: return "boolean";
    case Type::Number: return "number";
    case Type::String: return "string";
    case Type::Object: return v.asObject()->isCallable() ? "function" : "object";
    }
    return "undefined";
}

bool Interpreter::strictEquals(Value a, Value b) const {
    if (a.type() != b.type()) return false;
    switch (a.type()) {
    case Type::Undefined:
    case Type::Null: return true;
    case Type::Boolean: return a.asBoolean() == b.asBoolean();
    case Type::Number: return a.asNumber() == b.asNumber();
    case Type::String: return a.asString() == b.asString() || a.asString()->text == b.asString()->text;
    case Type::Object: return a.asObject() == b.asObject();
    }
    return false;
}

bool Interpreter::sameValueZero(Value a, Value b) {
    if (a.isNumber() && b.isNumber() && std::isnan(a.asNumber()) && std::isnan(b.asNumber())) return true;
    if (a.type() != b.type()) return false;
    switch (a.type()) {
    case Type::Undefined:
    case Type::Null: return true;
    case Type::Boolean: return a.asBoolean() == b.asBoolean();
    case Type::Number: return a.asNumber() == b.asNumber();
    case Type::String: return a.asString()->text == b.asString()->text;
    case Type::Object: return a.asObject() == b.asObject();
    }
    return false;
}

bool Interpreter::looseEquals(Value a, Value b) {
    while (true) {
        if (a.type() == b.type()) return strictEquals(a, b);
        if (a.isNullish() && b.isNullish()) return true;
        if (a.isNullish() || b.isNullish()) return false;
        if (a.isNumber() && b.isString()) return a.asNumber() == toNumber(b);
        if (a.isString() && b.isNumber()) return toNumber(a) == b.asNumber();
        if (a.isBoolean()) {
            a = Value::number(a.asBoolean() ? 1 : 0);
            continue;
        }
        if (b.isBoolean()) {
            b = Value::number(b.asBoolean() ? 1 : 0);
            continue;
        }
        if (a.isObject() && !b.isObject()) {
            a = toPrimitive(a, false);
            continue;
        }
        if (b.isObject() && !a.isObject()) {
            b = toPrimitive(b, false);
            continue;
        }
        return false;
    }
}

std::vector<Value> Interpreter::iterableToVector(Value v) {
    if (v.isObject()) {
        Object* o = v.asObject();
        if (o->kind == ObjectKind::Array) {
            const auto& elements = static_cast<ArrayObject*>(o)->elements;
            tick(elements.size() / 8);
            return elements;
        }
        if (o->kind == ObjectKind::Map || o->kind == ObjectKind::Set) {
            auto& store = static_cast<CollectionObject*>(o)->store;
            std::vector<Value> out;
            tick(store.size() / 4);
            for (std::size_t i = 0; i < store.entries().size(); ++i) {
                if (!store.alive()[i]) continue;
                const auto& [key, value] = store.entries()[i];
                if (o->kind == ObjectKind::Set) {
                    out.push_back(key);
                } else {
                    out.push_back(Value::object(newArray(std::vector<Value>{key, value})));
                }
            }
            return out;
        }
    }
    if (v.isString()) {
        const std::string& text = v.asString()->text;
        std::vector<Value> out;
        tick(text.size() / 4);
        for (std::size_t i = 0; i < text.size();) {
            auto c = static_cast<unsigned char>(text[i]);
            std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
            len = std::min(len, text.size() - i);
            out.push_back(string(text.substr(i, len)));
            i += len;
        }
        return out;
    }
    throwError(ErrorType::TypeError, describe(v) + " is not iterable");
}

Value Interpreter::makeError(ErrorType type, const std::string& message) {
    Object* proto = intrinsics_.errorProto;
    switch (type) {
    case ErrorType::TypeError: proto = intrinsics_.typeErrorProto; break;
    case ErrorType::RangeError: proto = intrinsics_.rangeErrorProto; break;
    case ErrorType::ReferenceError: proto = intrinsics_.referenceErrorProto; break;
    case ErrorType::SyntaxError: proto = intrinsics_.syntaxErrorProto; break;
    default: break;
    }
    auto* error = heap_.make<Object>(ObjectKind::Error, proto);
    error->props.set(names.message, string(message));
    error->props.set(names.lineNumber, Value::number(line_));
    return Value::object(error);
}

void Interpreter::throwError(ErrorType type, const std::string& message) {
    throw ThrowSignal{makeError(type, message)};
}

std::string Interpreter::describe(Value v) {
    switch (v.type()) {
    case Type::String: return v.asString()->text;
    case Type::Object: {
        Object* o = v.asObject();
        if (o->isCallable()) {
            Value n = functionName(o);
            return "function " + n.asString()->text;
        }
        if (o->kind == ObjectKind::Array) return "[object Array]";
        if (o->kind == ObjectKind::Error) {
            std::string name = "Error";
            for (Object* p = o; p; p = p->proto) {
                if (const Value* nv = p->props.find(names.name); nv && nv->isString()) {
                    name = nv->asString()->text;
                    break;
                }
            }
            const Value* m = o->props.find(names.message);
            return m && m->isString() && !m->asString()->text.empty() ? name + ": " + m->asString()->text : name;
        }
        return "[object Object]";
    }
    default: return toString(v);
    }
}

// ---------------------------------------------------------------------------
// Scopes and bindings

Env* Interpreter::acquireScope(Env* parent, bool captured) {
    if (!captured && !freeScopes_.empty()) {
        Env* env = freeScopes_.back();
        freeScopes_.pop_back();
        env->reset(parent);
        return env;
    }
    return heap_.make<Env>(parent);
}

void Interpreter::recycleScope(Env* scope) {
    scope->bindings.clear();
    scope->parent = nullptr;
    freeScopes_.push_back(scope);
}

Env::Binding* Interpreter::findBinding(Atom name, Env* env) {
    for (Env* e = env; e; e = e->parent) {
        if (Env::Binding* b = e->find(name)) return b;
    }
    return nullptr;
}

Value Interpreter::readBinding(Atom name, Env* env) {
    Env::Binding* b = findBinding(name, env);
    if (!b) throwError(ErrorType::ReferenceError, atomName(name) + " is not defined");
    if (!b->initialized) {
        if (name == names.thisAtom) {
            throwError(ErrorType::ReferenceError,
                       "Must call super constructor in derived class before accessing 'this'");
        }
        throwError(ErrorType::ReferenceError, "Cannot access '" + atomName(name) + "' before initialization");
    }
    return b->value;
}

void Interpreter::assignBinding(Atom name, Value value, Env* env) {
    Env::Binding* b = findBinding(name, env);
    if (!b) {
        // Sloppy-mode implicit global, confined to the script's own scope.
        Env* global = env;
        while (global && global->parent && global->parent != builtins_) global = global->parent;
        if (!global || global == builtins_) throwError(ErrorType::ReferenceError, atomName(name) + " is not defined");
        global->declare(name, value, true, true);
        return;
    }
    if (!b->initialized) {
        throwError(ErrorType::ReferenceError, "Cannot access '" + atomName(name) + "' before initialization");
    }
    if (!b->isMutable) throwError(ErrorType::TypeError, "Assignment to constant variable.");
    b->value = value;
}

Value Interpreter::thisValue(Env* env) {
    return readBinding(names.thisAtom, env);
}

ClosureObject* Interpreter::currentFunction(Env* env) {
    Env::Binding* b = findBinding(names.funcAtom, env);
    if (!b || !b->value.isObject()) throwError(ErrorType::SyntaxError, "'super' keyword unexpected here");
    return static_cast<ClosureObject*>(b->value.asObject());
}

void Interpreter::hoist(const std::vector<LexicalDecl>& lexicals, const std::vector<const FunctionNode*>& functions,
                        Env* env) {
    for (const auto& decl : lexicals) env->declare(decl.name, Value(), !decl.isConst, false);
    for (const FunctionNode* fn : functions) {
        env->declare(*fn->name, Value::object(makeClosure(fn, env)), true, true);
    }
}

void Interpreter::bindPattern(const Node& target, Value value, Env* env, BindKind kind) {
    switch (target.kind) {
    case NodeKind::Identifier: {
        Atom name = as<IdentifierNode>(target).name;
        if (kind == BindKind::Let || kind == BindKind::Const) {
            env->declare(name, value, kind == BindKind::Let, true);
        } else {
            assignBinding(name, value, env);
        }
        return;
    }
    case NodeKind::Member: {
        const auto& m = as<MemberNode>(target);
        Value object = m.object->kind == NodeKind::Super ? thisValue(env) : eval(*m.object, env);
        if (m.computed) setComputed(object, eval(*m.computed, env), value);
        else setProperty(object, m.property, value);
        return;
    }
    case NodeKind::AssignPattern: {
        const auto& a = as<AssignPatternNode>(target);
        if (value.isUndefined()) value = eval(*a.fallback, env);
        bindPattern(*a.target, value, env, kind);
        return;
    }
    case NodeKind::ArrayPattern: {
        const auto& p = as<ArrayPatternNode>(target);
        std::vector<Value> items = iterableToVector(value);
        std::size_t i = 0;
        for (const auto& el : p.elements) {
            Value item = i < items.size() ? items[i] : Value();
            ++i;
            if (el) bindPattern(*el, item, env, kind);
        }
        if (p.rest) {
            std::vector<Value> rest;
            if (i < items.size()) rest.assign(items.begin() + static_cast<std::ptrdiff_t>(i), items.end());
            bindPattern(*p.rest, Value::object(newArray(std::move(rest))), env, kind);
        }
        return;
    }
    case NodeKind::ObjectPattern: {
        const auto& p = as<ObjectPatternNode>(target);
        if (value.isNullish()) {
            throwError(ErrorType::TypeError, "Cannot destructure '" + toString(value) + "' as it is " + toString(value) + ".");
        }
        std::vector<Atom> used;
        for (const auto& prop : p.properties) {
            Atom key = prop.computedKey ? toPropertyKey(eval(*prop.computedKey, env)) : prop.key;
            used.push_back(key);
            bindPattern(*prop.value, getProperty(value, key), env, kind);
        }
        if (p.rest) {
            Object* rest = newObject();
            if (value.isObject()) {
                for (Atom key : ownKeys(value.asObject())) {
                    if (std::find(used.begin(), used.end(), key) != used.end()) continue;
                    setProperty(Value::object(rest), key, getProperty(value, key));
                }
            }
            bindPattern(*p.rest, Value::object(rest), env, kind);
        }
        return;
    }
    default: throwError(ErrorType::SyntaxError, "Invalid destructuring target");
    }
}

// ---------------------------------------------------------------------------
// Expressions

Value Interpreter::eval(const Node& node, Env* env) {
    tick();
    switch (node.kind) {
    case NodeKind::Number: return Value::number(as<NumberNode>(node).value);
    case NodeKind::String: return atomString(as<StringNode>(node).atom);
    case NodeKind::Template: return evalTemplate(as<TemplateNode>(node), env);
    case NodeKind::Boolean: return Value::boolean(as<BooleanNode>(node).value);
    case NodeKind::Null: return Value::null();
    case NodeKind::Identifier: return readBinding(as<IdentifierNode>(node).name, env);
    case NodeKind::This: return thisValue(env);
    case NodeKind::Super: throwError(ErrorType::SyntaxError, "'super' keyword unexpected here");
    case NodeKind::Array: return evalArray(as<ArrayNode>(node), env);
    case NodeKind::Object: return evalObject(as<ObjectNode>(node), env);
    case NodeKind::Function: return Value::object(makeClosure(&as<FunctionNode>(node), env));
    case NodeKind::Class: return evalClass(as<ClassNode>(node), env);
    case NodeKind::Unary: return evalUnary(as<UnaryNode>(node), env);
    case NodeKind::Update: return evalUpdate(as<UpdateNode>(node), env);
    case NodeKind::Binary: {
        const auto& b = as<BinaryNode>(node);
        Value left = eval(*b.left, env);
        Value right = eval(*b.right, env);
        if (b.op == BinaryOp::Add && left.isNumber() && right.isNumber()) {
            return Value::number(left.asNumber() + right.asNumber());
        }
        return binaryOp(b.op, left, right);
    }
    case NodeKind::Logical: return logical(as<LogicalNode>(node), env);
    case NodeKind::Assign: return evalAssign(as<AssignNode>(node), env);
    case NodeKind::Conditional: {
        const auto& c = as<ConditionalNode>(node);
        return truthy(eval(*c.test, env)) ? eval(*c.consequent, env) : eval(*c.alternate, env);
    }
    case NodeKind::Call: return evalCall(as<CallNode>(node), env);
    case NodeKind::New: return evalNew(as<NewNode>(node), env);
    case NodeKind::Member: return evalMember(as<MemberNode>(node), env);
    case NodeKind::OptionalChain: {
        shortCircuit_ = false;
        Value v = eval(*as<OptionalChainNode>(node).expression, env);
        if (shortCircuit_) {
            shortCircuit_ = false;
            return Value();
        }
        return v;
    }
    case NodeKind::Sequence: {
        Value last;
        for (const auto& e : as<SequenceNode>(node).expressions) last = eval(*e, env);
        return last;
    }
    case NodeKind::ArrayPattern:
    case NodeKind::ObjectPattern:
    case NodeKind::AssignPattern:
    case NodeKind::Rest:
    case NodeKind::Spread: throwError(ErrorType::SyntaxError, "Unexpected pattern in expression position");
    default: throwError(ErrorType::SyntaxError, "Unexpected statement in expression position");
    }
}

Value Interpreter::evalTemplate(const TemplateNode& node, Env* env) {
    std::string out = node.quasis[0];
    for (std::size_t i = 0; i < node.expressions.size(); ++i) {
        Value v = eval(*node.expressions[i], env);
        out += v.isString() ? v.asString()->text : toString(v);
        out += node.quasis[i + 1];
    }
    return string(out);
}

Value Interpreter::evalArray(const ArrayNode& node, Env* env) {
    ArrayObject* array = newArray(0);
    heap_.charge(node.elements.size() * sizeof(Value));
    array->elements.reserve(node.elements.size());
    for (const auto& el : node.elements) {
        if (!el) {
            array->elements.emplace_back();
        } else if (el->kind == NodeKind::Spread) {
            std::vector<Value> items = iterableToVector(eval(*as<SpreadNode>(*el).argument, env));
            heap_.charge(items.size() * sizeof(Value));
            array->elements.insert(array->elements.end(), items.begin(), items.end());
        } else {
            Value v = eval(*el, env);
            array->elements.push_back(v);
        }
    }
    return Value::object(array);
}

Value Interpreter::evalObject(const ObjectNode& node, Env* env) {
    Object* object = newObject();
    Value self = Value::object(object);
    for (const auto& prop : node.properties) {
        if (prop.kind == PropertyNode::Kind::Spread) {
            Value source = eval(*prop.value, env);
            if (source.isObject()) {
                for (Atom key : ownKeys(source.asObject())) setProperty(self, key, getProperty(source, key));
            } else if (source.isString()) {
                const std::string& text = source.asString()->text;
                for (std::size_t i = 0; i < text.size(); ++i) {
                    setProperty(self, atom(std::to_string(i)), string(text.substr(i, 1)));
                }
            }
            continue;
        }
        Atom key = prop.computedKey ? toPropertyKey(eval(*prop.computedKey, env)) : prop.key;
        Value value;
        if (prop.value->kind == NodeKind::Function && !as<FunctionNode>(*prop.value).isArrow &&
            as<FunctionNode>(*prop.value).name && *as<FunctionNode>(*prop.value).name == prop.key && !prop.computedKey) {
            // method shorthand: super refers to the literal's prototype
            value = Value::object(makeClosure(&as<FunctionNode>(*prop.value), env, object));
        } else {
            value = eval(*prop.value, env);
        }
        setProperty(self, key, value);
    }
    return self;
}

ClosureObject* Interpreter::makeClosure(const FunctionNode* fn, Env* scope, Object* homeObject) {
    auto* closure = heap_.make<ClosureObject>(intrinsics_.functionProto, fn, scope);
    closure->homeObject = homeObject;
    return closure;
}

Value Interpreter::evalClass(const ClassNode& node, Env* env) {
    Object* protoParent = intrinsics_.objectProto;
    Object* ctorParent = intrinsics_.functionProto;
    bool derived = false;
    if (node.superClass) {
        Value parent = eval(*node.superClass, env);
        if (parent.isNull()) {
            protoParent = nullptr;
        } else {
            if (!isConstructor(parent)) {
                throwError(ErrorType::TypeError, "Class extends value " + describe(parent) + " is not a constructor or null");
            }
            Value pp = getProperty(parent, names.prototype);
            if (!pp.isObject() && !pp.isNull()) {
                throwError(ErrorType::TypeError, "Class extends value does not have valid prototype property");
            }
            protoParent = pp.isObject() ? pp.asObject() : nullptr;
            ctorParent = parent.asObject();
            derived = true;
        }
    }
    Env* classEnv = heap_.make<Env>(env);
    if (node.name) classEnv->declare(*node.name, Value(), false, false);
    Object* proto = newObject(protoParent);
    auto* ctor = heap_.make<ClosureObject>(ctorParent, node.constructor.get(), classEnv);
    ctor->classNode = &node;
    ctor->isDerived = derived;
    ctor->homeObject = proto;
    ctor->props.set(names.prototype, Value::object(proto));
    proto->props.set(names.constructor, Value::object(ctor));
    for (const auto& method : node.methods) {
        Object* home = method.isStatic ? static_cast<Object*>(ctor) : proto;
        Atom key = method.computedKey ? toPropertyKey(eval(*method.computedKey, classEnv)) : method.key;
        home->props.set(key, Value::object(makeClosure(method.fn.get(), classEnv, home)));
    }
    if (node.name) classEnv->declare(*node.name, Value::object(ctor), false, true);
    for (const auto& field : node.fields) {
        if (!field.isStatic) continue;
        Env* fieldEnv = heap_.make<Env>(classEnv);
        fieldEnv->declare(names.thisAtom, Value::object(ctor), false, true);
        fieldEnv->declare(names.funcAtom, Value::object(ctor), false, true);
        Value v = field.value ? eval(*field.value, fieldEnv) : Value();
        setProperty(Value::object(ctor), field.key, v);
    }
    return Value::object(ctor);
}

Value Interpreter::evalUnary(const UnaryNode& node, Env* env) {
    switch (node.op) {
    case UnaryOp::Typeof: {
        if (node.argument->kind == NodeKind::Identifier) {
            Env::Binding* b = findBinding(as<IdentifierNode>(*node.argument).name, env);
            if (!b) return string("undefined");
        }
        return string(typeOf(eval(*node.argument, env)));
    }
    case UnaryOp::Delete: {
        if (node.argument->kind != NodeKind::Member) return Value::boolean(true);
        const auto& m = as<MemberNode>(*node.argument);
        Value object = eval(*m.object, env);
        if (object.isNullish()) throwError(ErrorType::TypeError, "Cannot convert undefined or null to object");
        if (!object.isObject()) return Value::boolean(true);
        Object* o = object.asObject();
        if (o->frozen) return Value::boolean(false);
        Value keyValue = m.computed ? eval(*m.computed, env) : atomString(m.property);
        if (o->kind == ObjectKind::Array && keyValue.isNumber()) {
            double d = keyValue.asNumber();
            auto* array = static_cast<ArrayObject*>(o);
            if (d >= 0 && d == std::floor(d) && d < static_cast<double>(array->elements.size())) {
                array->elements[static_cast<std::size_t>(d)] = Value();
            }
            return Value::boolean(true);
        }
        Atom key = toPropertyKey(keyValue);
        if (o->kind == ObjectKind::Array) {
            if (auto idx = atomIndex(key)) {
                auto* array = static_cast<ArrayObject*>(o);
                if (*idx < array->elements.size()) array->elements[*idx] = Value();
                return Value::boolean(true);
            }
        }
        o->props.erase(key);
        return Value::boolean(true);
    }
    default: break;
    }
    Value v = eval(*node.argument, env);
    switch (node.op) {
    case UnaryOp::Minus: return Value::number(-toNumber(v));
    case UnaryOp::Plus: return Value::number(toNumber(v));
    case UnaryOp::Not: return Value::boolean(!truthy(v));
    case UnaryOp::BitNot: return Value::number(~toInt32(toNumber(v)));
    case UnaryOp::Void: return Value();
    default: return Value();
    }
}

Value Interpreter::evalUpdate(const UpdateNode& node, Env* env) {
    double delta = node.increment ? 1.0 : -1.0;
    if (node.argument->kind == NodeKind::Identifier) {
        Atom name = as<IdentifierNode>(*node.argument).name;
        Env::Binding* b = findBinding(name, env);
        if (b && b->initialized && b->isMutable && b->value.isNumber()) {
            double old = b->value.asNumber();
            b->value = Value::number(old + delta);
            return Value::number(node.prefix ? old + delta : old);
        }
        double old = toNumber(readBinding(name, env));
        assignBinding(name, Value::number(old + delta), env);
        return Value::number(node.prefix ? old + delta : old);
    }
    const auto& m = as<MemberNode>(*node.argument);
    Value object = eval(*m.object, env);
    if (m.computed) {
        Value key = eval(*m.computed, env);
        double old = toNumber(getComputed(object, key));
        setComputed(object, key, Value::number(old + delta));
        return Value::number(node.prefix ? old + delta : old);
    }
    double old = toNumber(getProperty(object, m.property));
    setProperty(object, m.property, Value::number(old + delta));
    return Value::number(node.prefix ? old + delta : old);
}

Value Interpreter::binaryOp(BinaryOp op, Value a, Value b) {
    switch (op) {
    case BinaryOp::Add: {
        if (a.isNumber() && b.isNumber()) return Value::number(a.asNumber() + b.asNumber());
        Value pa = toPrimitive(a, false);
        Value pb = toPrimitive(b, false);
        if (pa.isString() || pb.isString()) {
            std::string left = pa.isString() ? pa.asString()->text : toString(pa);
            const std::string right = pb.isString() ? pb.asString()->text : toString(pb);
            tick((left.size() + right.size()) / 64);
            left += right;
            return string(left);
        }
        return Value::number(toNumber(pa) + toNumber(pb));
    }
    case BinaryOp::Sub: return Value::number(toNumber(a) - toNumber(b));
    case BinaryOp::Mul: return Value::number(toNumber(a) * toNumber(b));
    case BinaryOp::Div: return Value::number(toNumber(a) / toNumber(b));
    case BinaryOp::Mod: return Value::number(std::fmod(toNumber(a), toNumber(b)));
    case BinaryOp::Exp: {
        double x = toNumber(a);
        double y = toNumber(b);
        if (std::isnan(y)) return Value::number(std::nan(""));
        if (std::fabs(x) == 1.0 && std::isinf(y)) return Value::number(std::nan(""));
        return Value::number(std::pow(x, y));
    }
    case BinaryOp::Eq: return Value::boolean(looseEquals(a, b));
    case BinaryOp::NotEq: return Value::boolean(!looseEquals(a, b));
    case BinaryOp::StrictEq: return Value::boolean(strictEquals(a, b));
    case BinaryOp::StrictNotEq: return Value::boolean(!strictEquals(a, b));
    case BinaryOp::Lt:
    case BinaryOp::Gt:
    case BinaryOp::LtEq:
    case BinaryOp::GtEq: {
        Value pa = toPrimitive(a, false);
        Value pb = toPrimitive(b, false);
        if (pa.isString() && pb.isString()) {
            int c = pa.asString()->text.compare(pb.asString()->text);
            switch (op) {
            case BinaryOp::Lt: return Value::boolean(c < 0);
            case BinaryOp::Gt: return Value::boolean(c > 0);
            case BinaryOp::LtEq: return Value::boolean(c <= 0);
            default: return Value::boolean(c >= 0);
            }
        }
        double x = toNumber(pa);
        double y = toNumber(pb);
        switch (op) {
        case BinaryOp::Lt: return Value::boolean(x < y);
        case BinaryOp::Gt: return Value::boolean(x > y);
        case BinaryOp::LtEq: return Value::boolean(x <= y);
        default: return Value::boolean(x >= y);
        }
    }
    case BinaryOp::BitAnd: return Value::number(toInt32(toNumber(a)) & toInt32(toNumber(b)));
    case BinaryOp::BitOr: return Value::number(toInt32(toNumber(a)) | toInt32(toNumber(b)));
    case BinaryOp::BitXor: return Value::number(toInt32(toNumber(a)) ^ toInt32(toNumber(b)));
    case BinaryOp::Shl:
        return Value::number(static_cast<std::int32_t>(toUint32(toNumber(a)) << (toUint32(toNumber(b)) & 31)));
    case BinaryOp::Shr: return Value::number(toInt32(toNumber(a)) >> (toUint32(toNumber(b)) & 31));
    case BinaryOp::UShr: return Value::number(toUint32(toNumber(a)) >> (toUint32(toNumber(b)) & 31));
    case BinaryOp::In: {
        if (!b.isObject()) {
            throwError(ErrorType::TypeError, "Cannot use 'in' operator to search for '" + toString(a) + "' in " + describe(b));
        }
        Object* o = b.asObject();
        if ((o->kind == ObjectKind::Map || o->kind == ObjectKind::Set) && a.isString() && a.asString()->text == "size") {
            return Value::boolean(true);
        }
        if (a.isNumber() && o->kind == ObjectKind::Array) {
            double d = a.asNumber();
            auto& elements = static_cast<ArrayObject*>(o)->elements;
            return Value::boolean(d >= 0 && d == std::floor(d) && d < static_cast<double>(elements.size()));
        }
        return Value::boolean(hasProperty(o, toPropertyKey(a)));
    }
    case BinaryOp::InstanceOf: {
        if (!isCallable(b)) throwError(ErrorType::TypeError, "Right-hand side of 'instanceof' is not callable");
        Object* ctor = b.asObject();
        while (ctor->kind == ObjectKind::Bound) ctor = static_cast<BoundObject*>(ctor)->target.asObject();
        if (!a.isObject()) return Value::boolean(false);
        Value proto = getObjectProperty(ctor, names.prototype);
        if (!proto.isObject()) return Value::boolean(false);
        for (Object* p = a.asObject()->proto; p; p = p->proto) {
            if (p == proto.asObject()) return Value::boolean(true);
        }
        return Value::boolean(false);
    }
    }
    return Value();
}

Value Interpreter::logical(const LogicalNode& node, Env* env) {
    Value left = eval(*node.left, env);
    switch (node.op) {
    case LogicalOp::And: return truthy(left) ? eval(*node.right, env) : left;
    case LogicalOp::Or: return truthy(left) ? left : eval(*node.right, env);
    case LogicalOp::Nullish: return left.isNullish() ? eval(*node.right, env) : left;
    }
    return left;
}

Value Interpreter::evalAssign(const AssignNode& node, Env* env) {
    const Node& target = *node.target;
    if (target.kind == NodeKind::Identifier) {
        Atom name = as<IdentifierNode>(target).name;
        if (node.logical) {
            Value current = readBinding(name, env);
            bool assign = *node.logical == LogicalOp::And ? truthy(current)
                        : *node.logical == LogicalOp::Or  ? !truthy(current)
                                                          : current.isNullish();
            if (!assign) return current;
            Value v = eval(*node.value, env);
            assignBinding(name, v, env);
            return v;
        }
        if (node.op) {
            Value current = readBinding(name, env);
            Value rhs = eval(*node.value, env);
            Value v = binaryOp(*node.op, current, rhs);
            assignBinding(name, v, env);
            return v;
        }
        Value v = eval(*node.value, env);
        Env::Binding* b = findBinding(name, env);
        if (b && b->initialized && b->isMutable) b->value = v;
        else assignBinding(name, v, env);
        return v;
    }
    if (target.kind == NodeKind::Member) {
        const auto& m = as<MemberNode>(target);
        Value object = m.object->kind == NodeKind::Super ? thisValue(env) : eval(*m.object, env);
        Value key = m.computed ? eval(*m.computed, env) : Value();
        auto read = [&] { return m.computed ? getComputed(object, key) : getProperty(object, m.property); };
        auto write = [&](Value v) {
            if (m.computed) setComputed(object, key, v);
            else setProperty(object, m.property, v);
        };
        if (node.logical) {
            Value current = read();
            bool assign = *node.logical == LogicalOp::And ? truthy(current)
                        : *node.logical == LogicalOp::Or  ? !truthy(current)
                                                          : current.isNullish();
            if (!assign) return current;
            Value v = eval(*node.value, env);
            write(v);
            return v;
        }
        if (node.op) {
            Value current = read();
            Value v = binaryOp(*node.op, current, eval(*node.value, env));
            write(v);
            return v;
        }
        Value v = eval(*node.value, env);
        write(v);
        return v;
    }
    Value v = eval(*node.value, env);
    bindPattern(target, v, env, BindKind::Assign);
    return v;
}

Value Interpreter::evalMember(const MemberNode& node, Env* env) {
    if (node.object->kind == NodeKind::Super) {
        ClosureObject* fn = currentFunction(env);
        Object* home = fn->homeObject;
        if (!home) throwError(ErrorType::SyntaxError, "'super' keyword unexpected here");
        Object* proto = home->proto;
        if (!proto) return Value();
        Atom key = node.computed ? toPropertyKey(eval(*node.computed, env)) : node.property;
        return getObjectProperty(proto, key);
    }
    Value object = eval(*node.object, env);
    if (shortCircuit_) return Value();
    if (node.optional && object.isNullish()) {
        shortCircuit_ = true;
        return Value();
    }
    if (node.computed) return getComputed(object, eval(*node.computed, env));
    return getProperty(object, node.property);
}

void Interpreter::evalArguments(const std::vector<NodePtr>& nodes, Env* env, std::vector<Value>& out) {
    out.reserve(nodes.size());
    for (const auto& arg : nodes) {
        if (arg->kind == NodeKind::Spread) {
            std::vector<Value> items = iterableToVector(eval(*as<SpreadNode>(*arg).argument, env));
            out.insert(out.end(), items.begin(), items.end());
        } else {
            out.push_back(eval(*arg, env));
        }
    }
}

std::string Interpreter::describeCallee(const Node& node) {
    switch (node.kind) {
    case NodeKind::Identifier: return atomName(as<IdentifierNode>(node).name);
    case NodeKind::Member: {
        const auto& m = as<MemberNode>(node);
        std::string base = describeCallee(*m.object);
        if (m.computed) return base + "[...]";
        return base + "." + atomName(m.property);
    }
    case NodeKind::This: return "this";
    case NodeKind::Super: return "super";
    case NodeKind::Call: return describeCallee(*as<CallNode>(node).callee) + "(...)";
    default: return "expression";
    }
}

Value Interpreter::evalSuperCall(const CallNode& node, Env* env) {
    ClosureObject* fn = currentFunction(env);
    if (!fn->classNode || !fn->isDerived) throwError(ErrorType::SyntaxError, "'super' keyword unexpected here");
    Value parent = fn->proto ? Value::object(fn->proto) : Value::null();
    if (!isConstructor(parent)) throwError(ErrorType::TypeError, "Super constructor is not a constructor");
    Env::Binding* nt = findBinding(names.newTargetAtom, env);
    Object* newTarget = nt && nt->value.isObject() ? nt->value.asObject() : fn;
    std::vector<Value> args;
    evalArguments(node.arguments, env, args);
    Value result = construct(parent, args, newTarget);
    Env::Binding* thisBinding = findBinding(names.thisAtom, env);
    if (!thisBinding) throwError(ErrorType::SyntaxError, "'super' keyword unexpected here");
    if (thisBinding->initialized) throwError(ErrorType::ReferenceError, "Super constructor may only be called once");
    thisBinding->value = result;
    thisBinding->initialized = true;
    initializeFields(fn, result.asObject());
    return Value();
}

Value Interpreter::evalCall(const CallNode& node, Env* env) {
    const Node& callee = *node.callee;
    if (callee.kind == NodeKind::Super) return evalSuperCall(node, env);
    Value self;
    Value fn;
    if (callee.kind == NodeKind::Member) {
        const auto& m = as<MemberNode>(callee);
        if (m.object->kind == NodeKind::Super) {
            self = thisValue(env);
            fn = evalMember(m, env);
        } else {
            self = eval(*m.object, env);
            if (shortCircuit_) return Value();
            if (m.optional && self.isNullish()) {
                shortCircuit_ = true;
                return Value();
            }
            fn = m.computed ? getComputed(self, eval(*m.computed, env)) : getProperty(self, m.property);
        }
    } else {
        fn = eval(callee, env);
        if (shortCircuit_) return Value();
    }
    if (node.optional && fn.isNullish()) {
        shortCircuit_ = true;
        return Value();
    }
    if (!isCallable(fn)) throwError(ErrorType::TypeError, describeCallee(callee) + " is not a function");
    std::vector<Value> args;
    evalArguments(node.arguments, env, args);
    std::uint32_t savedLine = line_;
    Value result = callFunction(fn.asObject(), self, args, nullptr);
    line_ = savedLine;
    return result;
}

Value Interpreter::evalNew(const NewNode& node, Env* env) {
    Value ctor = eval(*node.callee, env);
    if (!isConstructor(ctor)) throwError(ErrorType::TypeError, describeCallee(*node.callee) + " is not a constructor");
    std::vector<Value> args;
    evalArguments(node.arguments, env, args);
    std::uint32_t savedLine = line_;
    Value result = construct(ctor, args, nullptr);
    line_ = savedLine;
    return result;
}

// ---------------------------------------------------------------------------
// Calls

Value Interpreter::callValue(Value fn, Value self, std::span<const Value> args) {
    if (!isCallable(fn)) throwError(ErrorType::TypeError, describe(fn) + " is not a function");
    return callFunction(fn.asObject(), self, args, nullptr);
}

Value Interpreter::callFunction(Object* fn, Value self, std::span<const Value> args, Object* newTarget) {
    DepthGuard depth(callDepth_, options_.maxCallDepth, *this);
    switch (fn->kind) {
    case ObjectKind::Native: {
        NewTargetGuard guard(newTarget_, newTarget);
        return static_cast<NativeObject*>(fn)->fn(*this, self, args);
    }
    case ObjectKind::Bound: {
        auto* bound = static_cast<BoundObject*>(fn);
        std::vector<Value> merged = bound->boundArgs;
        merged.insert(merged.end(), args.begin(), args.end());
        if (newTarget) {
            Object* target = bound->target.asObject();
            return construct(bound->target, merged, newTarget == fn ? target : newTarget);
        }
        return callFunction(bound->target.asObject(), bound->boundThis, merged, nullptr);
    }
    case ObjectKind::Closure: {
        auto* closure = static_cast<ClosureObject*>(fn);
        if (closure->classNode && !newTarget) {
            throwError(ErrorType::TypeError,
                       "Class constructor " + toString(functionName(closure)) + " cannot be invoked without 'new'");
        }
        return callClosure(closure, self, args, newTarget);
    }
    default: throwError(ErrorType::TypeError, "object is not a function");
    }
}

void Interpreter::bindParameters(const FunctionNode& fn, std::span<const Value> args, Env* env) {
    if (fn.simpleParams) {
        for (std::size_t i = 0; i < fn.params.size(); ++i) {
            env->declare(as<IdentifierNode>(*fn.params[i]).name, i < args.size() ? args[i] : Value(), true, true);
        }
        return;
    }
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
        const Node& p = *fn.params[i];
        if (p.kind == NodeKind::Rest) {
            std::vector<Value> rest;
            if (i < args.size()) rest.assign(args.begin() + static_cast<std::ptrdiff_t>(i), args.end());
            bindPattern(*as<RestNode>(p).target, Value::object(newArray(std::move(rest))), env, BindKind::Let);
            break;
        }
        bindPattern(p, i < args.size() ? args[i] : Value(), env, BindKind::Let);
    }
}

void Interpreter::initializeFields(ClosureObject* ctor, Object* instance) {
    if (!ctor->classNode) return;
    bool any = false;
    for (const auto& field : ctor->classNode->fields) any = any || !field.isStatic;
    if (!any) return;
    Env* fieldEnv = heap_.make<Env>(ctor->scope);
    fieldEnv->declare(names.thisAtom, Value::object(instance), false, true);
    fieldEnv->declare(names.funcAtom, Value::object(ctor), false, true);
    for (const auto& field : ctor->classNode->fields) {
        if (field.isStatic) continue;
        Value v = field.value ? eval(*field.value, fieldEnv) : Value();
        setProperty(Value::object(instance), field.key, v);
    }
}

Value Interpreter::callClosure(ClosureObject* closure, Value self, std::span<const Value> args, Object* newTarget) {
    const FunctionNode* fn = closure->fn;
    ScopeGuard scope(*this, closure->scope, fn->capturesScope);
    Env* env = scope.env;
    bool derivedCtor = newTarget && closure->isDerived;
    if (!fn->isArrow) {
        env->declare(names.thisAtom, derivedCtor ? Value() : self, true, !derivedCtor);
        if (closure->homeObject || closure->classNode) {
            env->declare(names.funcAtom, Value::object(closure), false, true);
        }
        if (derivedCtor) env->declare(names.newTargetAtom, Value::object(newTarget), false, true);
    }
    bindParameters(*fn, args, env);
    if (fn->usesArguments && !fn->isArrow) {
        env->declare(names.arguments, Value::object(newArray(std::vector<Value>(args.begin(), args.end()))), true, true);
    }
    for (Atom name : fn->varNames) {
        if (!env->find(name)) env->declare(name, Value(), true, true);
    }
    Value result;
    if (fn->expressionBody) {
        result = eval(*fn->body, env);
    } else {
        const auto& body = static_cast<const BlockNode&>(*fn->body);
        hoist(body.lexicals, body.functions, env);
        if (execStatements(body.body, env) == Flow::Return) {
            result = completion_;
            completion_ = Value();
        }
    }
    if (derivedCtor && !result.isObject()) {
        Env::Binding* b = env->find(names.thisAtom);
        if (!b->initialized) {
            throwError(ErrorType::ReferenceError,
                       "Must call super constructor in derived class before returning from derived constructor");
        }
        return b->value;
    }
    return result;
}

Value Interpreter::construct(Value ctorValue, std::span<const Value> args, Object* newTarget) {
    if (!isConstructor(ctorValue)) throwError(ErrorType::TypeError, describe(ctorValue) + " is not a constructor");
    Object* ctor = ctorValue.asObject();
    if (!newTarget) newTarget = ctor;
    switch (ctor->kind) {
    case ObjectKind::Bound: return callFunction(ctor, Value(), args, newTarget);
    case ObjectKind::Native: {
        Value result = callFunction(ctor, Value(), args, newTarget);
        if (!result.isObject()) throwError(ErrorType::TypeError, "constructor did not return an object");
        return result;
    }
    case ObjectKind::Closure: {
        auto* closure = static_cast<ClosureObject*>(ctor);
        if (!closure->isDerived) {
            Object* instance = newObject(prototypeFor(newTarget, intrinsics_.objectProto));
            initializeFields(closure, instance);
            if (!closure->fn) return Value::object(instance);
            Value result = callFunction(closure, Value::object(instance), args, newTarget);
            return result.isObject() ? result : Value::object(instance);
        }
        if (!closure->fn) {
            DepthGuard depth(callDepth_, options_.maxCallDepth, *this);
            Value parent = closure->proto ? Value::object(closure->proto) : Value::null();
            Value result = construct(parent, args, newTarget);
            initializeFields(closure, result.asObject());
            return result;
        }
        return callFunction(closure, Value(), args, newTarget);
    }
    default: throwError(ErrorType::TypeError, "not a constructor");
    }
}

// ---------------------------------------------------------------------------
// Statements

Interpreter::Flow Interpreter::execStatements(const std::vector<NodePtr>& body, Env* env) {
    for (const auto& stmt : body) {
        Flow flow = exec(*stmt, env);
        if (flow != Flow::Normal) return flow;
    }
    return Flow::Normal;
}

Interpreter::Flow Interpreter::execBlock(const BlockNode& block, Env* env) {
    if (!block.needsScope()) return execStatements(block.body, env);
    ScopeGuard scope(*this, env, block.capturesScope);
    hoist(block.lexicals, block.functions, scope.env);
    return execStatements(block.body, scope.env);
}

Interpreter::Flow Interpreter::execVarDecl(const VarDeclNode& node, Env* env) {
    for (const auto& d : node.declarations) {
        if (node.declKind == DeclKind::Var) {
            if (!d.init) continue;
            bindPattern(*d.target, eval(*d.init, env), env, BindKind::Var);
        } else {
            Value v = d.init ? eval(*d.init, env) : Value();
            bindPattern(*d.target, v, env, node.declKind == DeclKind::Let ? BindKind::Let : BindKind::Const);
        }
    }
    return Flow::Normal;
}

Interpreter::Flow Interpreter::exec(const Node& node, Env* env) {
    tick();
    line_ = node.line;
    switch (node.kind) {
    case NodeKind::ExprStmt: eval(*as<ExprStmtNode>(node).expression, env); return Flow::Normal;
    case NodeKind::VarDecl: return execVarDecl(as<VarDeclNode>(node), env);
    case NodeKind::FunctionDecl: return Flow::Normal;
    case NodeKind::ClassDecl: {
        const auto& cls = *as<ClassDeclNode>(node).cls;
        Value ctor = evalClass(cls, env);
        env->declare(*cls.name, ctor, true, true);
        return Flow::Normal;
    }
    case NodeKind::Return: {
        const auto& r = as<ReturnNode>(node);
        completion_ = r.argument ? eval(*r.argument, env) : Value();
        return Flow::Return;
    }
    case NodeKind::If: {
        const auto& i = as<IfNode>(node);
        if (truthy(eval(*i.test, env))) return exec(*i.consequent, env);
        if (i.alternate) return exec(*i.alternate, env);
        return Flow::Normal;
    }
    case NodeKind::Block: return execBlock(as<BlockNode>(node), env);
    case NodeKind::For: return execFor(as<ForNode>(node), env);
    case NodeKind::ForOf: return execForOf(as<ForEachNode>(node), env);
    case NodeKind::ForIn: return execForIn(as<ForEachNode>(node), env);
    case NodeKind::While:
    case NodeKind::DoWhile: return execWhile(as<WhileNode>(node), env);
    case NodeKind::Break: return Flow::Break;
    case NodeKind::Continue: return Flow::Continue;
    case NodeKind::Throw: throw ThrowSignal{eval(*as<ThrowNode>(node).argument, env)};
    case NodeKind::Try: return execTry(as<TryNode>(node), env);
    case NodeKind::Switch: return execSwitch(as<SwitchNode>(node), env);
    case NodeKind::Empty: return Flow::Normal;
    default: eval(node, env); return Flow::Normal;
    }
}

bool Interpreter::loopBody(const Node& body, Env* env, Flow& flow) {
    Flow f = exec(body, env);
    if (f == Flow::Break) {
        flow = Flow::Normal;
        return true;
    }
    if (f == Flow::Return) {
        flow = Flow::Return;
        return true;
    }
    return false;
}

Interpreter::Flow Interpreter::execFor(const ForNode& node, Env* env) {
    Env* loopEnv = env;
    std::optional<ScopeGuard> scope;
    if (node.init && node.init->kind == NodeKind::VarDecl &&
        as<VarDeclNode>(*node.init).declKind != DeclKind::Var) {
        scope.emplace(*this, env, node.capturesScope);
        loopEnv = scope->env;
        const auto& decl = as<VarDeclNode>(*node.init);
        std::vector<Atom> bound;
        for (const auto& d : decl.declarations) collectBoundNames(d.target.get(), bound);
        for (Atom name : bound) loopEnv->declare(name, Value(), decl.declKind == DeclKind::Let, false);
    }
    if (node.init) exec(*node.init, loopEnv);
    auto copyIteration = [&] {
        Env* next = heap_.make<Env>(env);
        for (const auto& b : loopEnv->bindings) next->declare(b.name, b.value, b.isMutable, b.initialized);
        loopEnv = next;
    };
    bool perIteration = !node.perIterationNames.empty();
    if (perIteration) copyIteration();
    Flow flow = Flow::Normal;
    while (true) {
        if (node.test && !truthy(eval(*node.test, loopEnv))) break;
        if (loopBody(*node.body, loopEnv, flow)) break;
        if (perIteration) copyIteration();
        if (node.update) eval(*node.update, loopEnv);
        tick();
    }
    return flow;
}

Interpreter::Flow Interpreter::execWhile(const WhileNode& node, Env* env) {
    Flow flow = Flow::Normal;
    if (node.kind == NodeKind::DoWhile) {
        do {
            if (loopBody(*node.body, env, flow)) break;
        } while (truthy(eval(*node.test, env)));
        return flow;
    }
    while (truthy(eval(*node.test, env))) {
        if (loopBody(*node.body, env, flow)) break;
    }
    return flow;
}

Interpreter::Flow Interpreter::execForOf(const ForEachNode& node, Env* env) {
    Value iterable = eval(*node.iterable, env);
    bool lexical = node.declKind && *node.declKind != DeclKind::Var;
    BindKind kind = !lexical ? BindKind::Assign : *node.declKind == DeclKind::Let ? BindKind::Let : BindKind::Const;
    Flow flow = Flow::Normal;
    auto step = [&](Value item) -> bool {
        if (!lexical) {
            bindPattern(*node.target, item, env, kind);
            return loopBody(*node.body, env, flow);
        }
        ScopeGuard scope(*this, env, node.capturesScope);
        bindPattern(*node.target, item, scope.env, kind);
        return loopBody(*node.body, scope.env, flow);
    };
    if (iterable.isObject() && iterable.asObject()->kind == ObjectKind::Array) {
        auto* array = static_cast<ArrayObject*>(iterable.asObject());
        for (std::size_t i = 0; i < array->elements.size(); ++i) {
            if (step(array->elements[i])) break;
        }
        return flow;
    }
    if (iterable.isObject() &&
        (iterable.asObject()->kind == ObjectKind::Map || iterable.asObject()->kind == ObjectKind::Set)) {
        auto* coll = static_cast<CollectionObject*>(iterable.asObject());
        bool isMap = coll->kind == ObjectKind::Map;
        for (std::size_t i = 0; i < coll->store.entries().size(); ++i) {
            if (!coll->store.alive()[i]) continue;
            auto [key, value] = coll->store.entries()[i];
            Value item = isMap ? Value::object(newArray(std::vector<Value>{key, value})) : key;
            if (step(item)) break;
        }
        return flow;
    }
    for (Value item : iterableToVector(iterable)) {
        if (step(item)) break;
    }
    return flow;
}

Interpreter::Flow Interpreter::execForIn(const ForEachNode& node, Env* env) {
    Value subject = eval(*node.iterable, env);
    std::vector<Value> keys;
    if (subject.isObject()) {
        for (Atom key : ownKeys(subject.asObject())) keys.push_back(atomString(key));
    } else if (subject.isString()) {
        for (std::size_t i = 0; i < subject.asString()->text.size(); ++i) keys.push_back(string(std::to_string(i)));
    }
    bool lexical = node.declKind && *node.declKind != DeclKind::Var;
    BindKind kind = !lexical ? BindKind::Assign : *node.declKind == DeclKind::Let ? BindKind::Let : BindKind::Const;
    Flow flow = Flow::Normal;
    for (Value key : keys) {
        if (!lexical) {
            bindPattern(*node.target, key, env, kind);
            if (loopBody(*node.body, env, flow)) break;
            continue;
        }
        ScopeGuard scope(*this, env, node.capturesScope);
        bindPattern(*node.target, key, scope.env, kind);
        if (loopBody(*node.body, scope.env, flow)) break;
    }
    return flow;
}

Interpreter::Flow Interpreter::execTry(const TryNode& node, Env* env) {
    Flow flow = Flow::Normal;
    std::optional<ThrowSignal> pending;
    int depth = callDepth_;
    try {
        flow = exec(*node.block, env);
    } catch (const ThrowSignal& signal) {
        callDepth_ = depth;
        shortCircuit_ = false;
        std::uint64_t unwound = unwoundFrames_;
        unwoundFrames_ = 0;
        tick(kCaughtThrowCost + unwound * kUnwoundFrameCost);
        if (node.handler) {
            try {
                ScopeGuard scope(*this, env, node.capturesScope);
                if (node.param) bindPattern(*node.param, signal.value, scope.env, BindKind::Let);
                flow = exec(*node.handler, scope.env);
            } catch (const ThrowSignal& inner) {
                callDepth_ = depth;
                pending = inner;
            }
        } else {
            pending = signal;
        }
    }
    if (node.finalizer) {
        Value saved = completion_;
        Flow f = exec(*node.finalizer, env);
        if (f != Flow::Normal) return f;
        completion_ = saved;
    }
    if (pending) throw *pending;
    return flow;
}

Interpreter::Flow Interpreter::execSwitch(const SwitchNode& node, Env* env) {
    Value discriminant = eval(*node.discriminant, env);
    std::optional<ScopeGuard> scope;
    Env* caseEnv = env;
    if (!node.lexicals.empty() || !node.functions.empty()) {
        scope.emplace(*this, env, node.capturesScope);
        caseEnv = scope->env;
        hoist(node.lexicals, node.functions, caseEnv);
    }
    std::optional<std::size_t> start;
    for (std::size_t i = 0; i < node.cases.size() && !start; ++i) {
        const auto& c = node.cases[i];
        if (c.test && strictEquals(discriminant, eval(*c.test, caseEnv))) start = i;
    }
    if (!start) {
        for (std::size_t i = 0; i < node.cases.size(); ++i) {
            if (!node.cases[i].test) start = i;
        }
    }
    if (!start) return Flow::Normal;
    for (std::size_t i = *start; i < node.cases.size(); ++i) {
        Flow f = execStatements(node.cases[i].body, caseEnv);
        if (f == Flow::Break) return Flow::Normal;
        if (f != Flow::Normal) return f;
    }
    return Flow::Normal;
}

} // namespace pinauthor::script
