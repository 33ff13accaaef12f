#include "pinauthor/script/conversions.hpp"
#include "pinauthor/script/interpreter.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace pinauthor::script {

namespace {

using Args = std::span<const Value>;

Value arg(Args args, std::size_t i) {
    return i < args.size() ? args[i] : Value();
}

NativeObject* method(Interpreter& I, Object* target, std::string_view name, int arity, NativeFn fn) {
    NativeObject* f = I.newFunction(std::string(name), arity, std::move(fn));
    target->props.set(I.atom(name), Value::object(f));
    return f;
}

void constant(Interpreter& I, Object* target, std::string_view name, Value v) {
    target->props.set(I.atom(name), v);
}

ArrayObject* thisArray(Interpreter& I, Value self, std::string_view name) {
    if (!self.isObject() || self.asObject()->kind != ObjectKind::Array) {
        I.throwError(ErrorType::TypeError, "Array.prototype." + std::string(name) + " called on non-array");
    }
    return static_cast<ArrayObject*>(self.asObject());
}

Value requireCallable(Interpreter& I, Value fn, std::string_view what) {
    if (!I.isCallable(fn)) I.throwError(ErrorType::TypeError, I.describe(fn) + " is not a function (" + std::string(what) + ")");
    return fn;
}

// Relative index helper shared by slice/splice/at/etc.
std::size_t relativeIndex(Interpreter& I, Value v, std::size_t length, std::size_t fallback) {
    if (v.isUndefined()) return fallback;
    double d = I.toNumber(v);
    if (std::isnan(d)) return 0;
    d = std::trunc(d);
    auto len = static_cast<double>(length);
    if (d < 0) return static_cast<std::size_t>(std::max(0.0, len + d));
    return static_cast<std::size_t>(std::min(d, len));
}

std::string stringThis(Interpreter& I, Value self, std::string_view name) {
    if (self.isNullish()) {
        I.throwError(ErrorType::TypeError, "String.prototype." + std::string(name) + " called on null or undefined");
    }
    return I.toString(self);
}

std::string quoteJson(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned char>(c));
                out += buf;
            } else {
                out += c;
            }
        }
    }
    out += '"';
    return out;
}

constexpr int kMaxRenderDepth = 512;

class JsonWriter {
public:
    JsonWriter(Interpreter& I, Value replacer, std::string gap) : I_(I), replacer_(replacer), gap_(std::move(gap)) {
        if (replacer.isObject() && replacer.asObject()->kind == ObjectKind::Array) {
            for (Value v : static_cast<ArrayObject*>(replacer.asObject())->elements) {
                if (v.isString() || v.isNumber()) allow_.push_back(I.toPropertyKey(v));
            }
            replacer_ = Value();
            useAllow_ = true;
        } else if (!I.isCallable(replacer)) {
            replacer_ = Value();
        }
    }

    // Returns false when the value serializes to undefined.
    bool write(Value holder, Value key, Value value, const std::string& indent, std::string& out) {
        I_.tick();
        if (value.isObject()) {
            Value toJson = I_.getProperty(value, I_.atom("toJSON"));
            if (I_.isCallable(toJson)) {
                Value k = key;
                value = I_.callValue(toJson, value, std::span<const Value>(&k, 1));
            }
        }
        if (!replacer_.isUndefined()) {
            Value callArgs[2] = {key, value};
            value = I_.callValue(replacer_, holder, callArgs);
        }
        switch (value.type()) {
        case Type::Undefined: return false;
        case Type::Null: out += "null"; return true;
        case Type::Boolean: out += value.asBoolean() ? "true" : "false"; return true;
        case Type::Number:
            out += std::isfinite(value.asNumber()) ? numberToString(value.asNumber()) : "null";
            return true;
        case Type::String: out += quoteJson(value.asString()->text); return true;
        case Type::Object: break;
        }
        Object* o = value.asObject();
        if (o->isCallable()) return false;
        if (std::find(stack_.begin(), stack_.end(), o) != stack_.end()) {
            I_.throwError(ErrorType::TypeError, "Converting circular structure to JSON");
        }
        if (stack_.size() > kMaxRenderDepth) I_.throwError(ErrorType::RangeError, "Maximum call stack size exceeded");
        stack_.push_back(o);
        std::string inner = indent + gap_;
        if (o->kind == ObjectKind::Array) {
            const auto elements = static_cast<ArrayObject*>(o)->elements;
            if (elements.empty()) {
                out += "[]";
            } else {
                out += '[';
                for (std::size_t i = 0; i < elements.size(); ++i) {
                    if (i) out += ',';
                    if (!gap_.empty()) out += "\n" + inner;
                    if (!write(value, I_.string(std::to_string(i)), elements[i], inner, out)) out += "null";
                }
                if (!gap_.empty()) out += "\n" + indent;
                out += ']';
            }
        } else {
            std::vector<Atom> keys = useAllow_ ? allow_ : I_.ownKeys(o);
            bool any = false;
            out += '{';
            for (Atom k : keys) {
                if (useAllow_ && !I_.hasProperty(o, k)) continue;
                std::string piece;
                Value child = I_.getProperty(value, k);
                if (!write(value, I_.atomString(k), child, inner, piece)) continue;
                if (any) out += ',';
                if (!gap_.empty()) out += "\n" + inner;
                out += quoteJson(I_.atomName(k));
                out += gap_.empty() ? ":" : ": ";
                out += piece;
                any = true;
            }
            if (any && !gap_.empty()) out += "\n" + indent;
            out += '}';
        }
        stack_.pop_back();
        return true;
    }

private:
    Interpreter& I_;
    Value replacer_;
    std::string gap_;
    std::vector<Atom> allow_;
    bool useAllow_ = false;
    std::vector<Object*> stack_;
};

Value fromJson(Interpreter& I, const nlohmann::ordered_json& j, int depth) {
    if (depth > kMaxRenderDepth) I.throwError(ErrorType::SyntaxError, "JSON nesting too deep");
    I.tick();
    switch (j.type()) {
    case nlohmann::ordered_json::value_t::null: return Value::null();
    case nlohmann::ordered_json::value_t::boolean: return Value::boolean(j.get<bool>());
    case nlohmann::ordered_json::value_t::number_integer:
    case nlohmann::ordered_json::value_t::number_unsigned:
    case nlohmann::ordered_json::value_t::number_float: return Value::number(j.get<double>());
    case nlohmann::ordered_json::value_t::string: return I.string(j.get_ref<const std::string&>());
    case nlohmann::ordered_json::value_t::array: {
        ArrayObject* a = I.newArray(0);
        for (const auto& el : j) I.pushElement(a, fromJson(I, el, depth + 1));
        return Value::object(a);
    }
    case nlohmann::ordered_json::value_t::object: {
        Object* o = I.newObject();
        for (const auto& [k, v] : j.items()) I.setProperty(Value::object(o), I.atom(k), fromJson(I, v, depth + 1));
        return Value::object(o);
    }
    default: return Value();
    }
}

std::string inspect(Interpreter& I, Value v, int depth, std::vector<Object*>& seen, bool top);

std::string inspectKey(const std::string& key) {
    bool ident = !key.empty() && !std::isdigit(static_cast<unsigned char>(key[0]));
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) ident = false;
    }
    return ident ? key : "'" + key + "'";
}

std::string inspect(Interpreter& I, Value v, int depth, std::vector<Object*>& seen, bool top) {
    I.tick();
    switch (v.type()) {
    case Type::String: return top ? v.asString()->text : "'" + v.asString()->text + "'";
    case Type::Number:
        if (v.asNumber() == 0 && std::signbit(v.asNumber())) return "-0";
        return numberToString(v.asNumber());
    case Type::Object: break;
    default: return I.toString(v);
    }
    Object* o = v.asObject();
    if (o->isCallable()) {
        std::string name = I.toString(I.getProperty(v, I.names.name));
        bool isClass = o->kind == ObjectKind::Closure && static_cast<ClosureObject*>(o)->classNode;
        if (isClass) return "[class " + (name.empty() ? "(anonymous)" : name) + "]";
        return name.empty() ? "[Function (anonymous)]" : "[Function: " + name + "]";
    }
    if (o->kind == ObjectKind::Error) return I.describe(v);
    if (std::find(seen.begin(), seen.end(), o) != seen.end()) return "[Circular]";
    if (depth > 2) return o->kind == ObjectKind::Array ? "[Array]" : "[Object]";
    seen.push_back(o);
    std::vector<std::string> parts;
    std::string open = "{";
    std::string close = "}";
    if (o->kind == ObjectKind::Array) {
        open = "[";
        close = "]";
        const auto& elements = static_cast<ArrayObject*>(o)->elements;
        std::size_t shown = std::min<std::size_t>(elements.size(), 100);
        for (std::size_t i = 0; i < shown; ++i) parts.push_back(inspect(I, elements[i], depth + 1, seen, false));
        if (elements.size() > shown) parts.push_back("... " + std::to_string(elements.size() - shown) + " more items");
    } else if (o->kind == ObjectKind::Map || o->kind == ObjectKind::Set) {
        auto& store = static_cast<CollectionObject*>(o)->store;
        bool isMap = o->kind == ObjectKind::Map;
        open = std::string(isMap ? "Map(" : "Set(") + std::to_string(store.size()) + ") {";
        for (std::size_t i = 0; i < store.entries().size(); ++i) {
            if (!store.alive()[i]) continue;
            const auto& [key, value] = store.entries()[i];
            std::string piece = inspect(I, key, depth + 1, seen, false);
            if (isMap) piece += " => " + inspect(I, value, depth + 1, seen, false);
            parts.push_back(piece);
        }
    }
    for (const auto& [key, value] : o->props.slots()) {
        parts.push_back(inspectKey(I.atomName(key)) + ": " + inspect(I, value, depth + 1, seen, false));
    }
    seen.pop_back();
    if (parts.empty()) return open + close;
    std::string out = open + " ";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ", ";
        out += parts[i];
    }
    return out + " " + close;
}

std::string joinArray(Interpreter& I, ArrayObject* array, const std::string& sep, std::vector<Object*>& active) {
    if (std::find(active.begin(), active.end(), array) != active.end()) return "";
    if (active.size() > kMaxRenderDepth) I.throwError(ErrorType::RangeError, "Maximum call stack size exceeded");
    active.push_back(array);
    std::string out;
    for (std::size_t i = 0; i < array->elements.size(); ++i) {
        I.tick();
        if (i) out += sep;
        Value v = array->elements[i];
        if (v.isNullish()) continue;
        if (v.isObject() && v.asObject()->kind == ObjectKind::Array) {
            out += joinArray(I, static_cast<ArrayObject*>(v.asObject()), ",", active);
        } else {
            out += I.toString(v);
        }
        if (out.size() > (64u << 20)) I.heap().charge(out.size());
    }
    active.pop_back();
    I.heap().charge(out.size());
    return out;
}

void mergeSort(std::vector<Value>& items, const std::function<bool(Value, Value)>& lessOrEqual) {
    std::vector<Value> buffer(items.size());
    for (std::size_t width = 1; width < items.size(); width *= 2) {
        for (std::size_t lo = 0; lo < items.size(); lo += 2 * width) {
            std::size_t mid = std::min(lo + width, items.size());
            std::size_t hi = std::min(lo + 2 * width, items.size());
            std::size_t i = lo;
            std::size_t j = mid;
            std::size_t k = lo;
            while (i < mid && j < hi) buffer[k++] = lessOrEqual(items[i], items[j]) ? items[i++] : items[j++];
            while (i < mid) buffer[k++] = items[i++];
            while (j < hi) buffer[k++] = items[j++];
        }
        items.swap(buffer);
    }
}

void flattenInto(Interpreter& I, std::vector<Value>& out, const std::vector<Value>& items, double depth) {
    for (Value v : items) {
        I.tick();
        if (depth >= 1 && v.isObject() && v.asObject()->kind == ObjectKind::Array) {
            flattenInto(I, out, static_cast<ArrayObject*>(v.asObject())->elements, depth - 1);
        } else {
            out.push_back(v);
        }
    }
}

CollectionObject* thisCollection(Interpreter& I, Value self, ObjectKind kind, std::string_view name) {
    if (!self.isObject() || self.asObject()->kind != kind) {
        I.throwError(ErrorType::TypeError, std::string(kind == ObjectKind::Map ? "Map" : "Set") + ".prototype." +
                                               std::string(name) + " called on incompatible receiver");
    }
    return static_cast<CollectionObject*>(self.asObject());
}

double toIntegerOrInfinity(Interpreter& I, Value v) {
    double d = I.toNumber(v);
    if (std::isnan(d)) return 0;
    return std::trunc(d);
}

void installObject(Interpreter& I, Env* g) {
    const Intrinsics& in = I.intrinsics();
    Object* proto = in.objectProto;
    NativeObject* ctor = I.newFunction("Object", 1, [](Interpreter& I, Value, Args args) {
        Value v = arg(args, 0);
        if (v.isObject()) return v;
        return Value::object(I.newObject(I.prototypeFor(I.currentNewTarget(), I.intrinsics().objectProto)));
    }, true);
    ctor->props.set(I.names.prototype, Value::object(proto));
    proto->props.set(I.names.constructor, Value::object(ctor));
    g->declare(I.atom("Object"), Value::object(ctor), false, true);

    method(I, proto, "hasOwnProperty", 1, [](Interpreter& I, Value self, Args args) {
        if (!self.isObject()) return Value::boolean(false);
        Object* o = self.asObject();
        Atom key = I.toPropertyKey(arg(args, 0));
        if (o->kind == ObjectKind::Array) {
            if (key == I.names.length) return Value::boolean(true);
            auto idx = parseArrayIndex(I.atomName(key));
            if (idx) return Value::boolean(*idx < static_cast<ArrayObject*>(o)->elements.size());
        }
        return Value::boolean(o->props.find(key) != nullptr);
    });
    method(I, proto, "toString", 0, [](Interpreter& I, Value self, Args) {
        if (self.isUndefined()) return I.string("[object Undefined]");
        if (self.isNull()) return I.string("[object Null]");
        if (self.isObject()) {
            Object* o = self.asObject();
            if (o->kind == ObjectKind::Array) return I.string("[object Array]");
            if (o->isCallable()) return I.string("[object Function]");
            if (o->kind == ObjectKind::Error) return I.string("[object Error]");
        }
        return I.string("[object Object]");
    });
    method(I, proto, "valueOf", 0, [](Interpreter&, Value self, Args) { return self; });
    method(I, proto, "isPrototypeOf", 1, [](Interpreter&, Value self, Args args) {
        Value v = arg(args, 0);
        if (!self.isObject() || !v.isObject()) return Value::boolean(false);
        for (Object* p = v.asObject()->proto; p; p = p->proto) {
            if (p == self.asObject()) return Value::boolean(true);
        }
        return Value::boolean(false);
    });

    auto keysOf = [](Interpreter& I, Value v) -> std::vector<Atom> {
        if (v.isNullish()) I.throwError(ErrorType::TypeError, "Cannot convert undefined or null to object");
        if (v.isString()) {
            std::vector<Atom> keys;
            for (std::size_t i = 0; i < v.asString()->text.size(); ++i) keys.push_back(I.atom(std::to_string(i)));
            return keys;
        }
        if (!v.isObject()) return {};
        return I.ownKeys(v.asObject());
    };
    method(I, ctor, "keys", 1, [keysOf](Interpreter& I, Value, Args args) {
        std::vector<Value> out;
        for (Atom k : keysOf(I, arg(args, 0))) out.push_back(I.atomString(k));
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, ctor, "getOwnPropertyNames", 1, [keysOf](Interpreter& I, Value, Args args) {
        std::vector<Value> out;
        for (Atom k : keysOf(I, arg(args, 0))) out.push_back(I.atomString(k));
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, ctor, "values", 1, [keysOf](Interpreter& I, Value, Args args) {
        std::vector<Value> out;
        Value o = arg(args, 0);
        for (Atom k : keysOf(I, o)) out.push_back(I.getProperty(o, k));
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, ctor, "entries", 1, [keysOf](Interpreter& I, Value, Args args) {
        std::vector<Value> out;
        Value o = arg(args, 0);
        for (Atom k : keysOf(I, o)) {
            out.push_back(Value::object(I.newArray(std::vector<Value>{I.atomString(k), I.getProperty(o, k)})));
        }
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, ctor, "assign", 2, [](Interpreter& I, Value, Args args) {
        Value target = arg(args, 0);
        if (!target.isObject()) I.throwError(ErrorType::TypeError, "Cannot convert undefined or null to object");
        for (std::size_t i = 1; i < args.size(); ++i) {
            if (!args[i].isObject()) continue;
            for (Atom k : I.ownKeys(args[i].asObject())) I.setProperty(target, k, I.getProperty(args[i], k));
        }
        return target;
    });
    method(I, ctor, "freeze", 1, [](Interpreter&, Value, Args args) {
        Value v = arg(args, 0);
        if (v.isObject()) v.asObject()->frozen = true;
        return v;
    });
    method(I, ctor, "isFrozen", 1, [](Interpreter&, Value, Args args) {
        Value v = arg(args, 0);
        return Value::boolean(!v.isObject() || v.asObject()->frozen);
    });
    method(I, ctor, "create", 2, [](Interpreter& I, Value, Args args) {
        Value p = arg(args, 0);
        if (!p.isObject() && !p.isNull()) I.throwError(ErrorType::TypeError, "Object prototype may only be an Object or null");
        Object* o = I.newObject(p.isObject() ? p.asObject() : nullptr);
        Value props = arg(args, 1);
        if (props.isObject()) {
            for (Atom k : I.ownKeys(props.asObject())) {
                Value desc = I.getProperty(props, k);
                if (desc.isObject()) I.setProperty(Value::object(o), k, I.get(desc, "value"));
            }
        }
        return Value::object(o);
    });
    method(I, ctor, "getPrototypeOf", 1, [](Interpreter& I, Value, Args args) {
        Value v = arg(args, 0);
        if (v.isNullish()) I.throwError(ErrorType::TypeError, "Cannot convert undefined or null to object");
        const Intrinsics& in = I.intrinsics();
        if (v.isString()) return Value::object(in.stringProto);
        if (v.isNumber()) return Value::object(in.numberProto);
        if (v.isBoolean()) return Value::object(in.booleanProto);
        Object* p = v.asObject()->proto;
        return p ? Value::object(p) : Value::null();
    });
    method(I, ctor, "setPrototypeOf", 2, [](Interpreter& I, Value, Args args) {
        Value v = arg(args, 0);
        Value p = arg(args, 1);
        if (!p.isObject() && !p.isNull()) I.throwError(ErrorType::TypeError, "Object prototype may only be an Object or null");
        if (v.isObject()) {
            for (Object* q = p.isObject() ? p.asObject() : nullptr; q; q = q->proto) {
                if (q == v.asObject()) I.throwError(ErrorType::TypeError, "Cyclic __proto__ value");
            }
            v.asObject()->proto = p.isObject() ? p.asObject() : nullptr;
        }
        return v;
    });
    method(I, ctor, "fromEntries", 1, [](Interpreter& I, Value, Args args) {
        Object* o = I.newObject();
        for (Value entry : I.iterableToVector(arg(args, 0))) {
            if (!entry.isObject()) I.throwError(ErrorType::TypeError, "Iterator value is not an entry object");
            Value k = I.getComputed(entry, Value::number(0));
            Value v = I.getComputed(entry, Value::number(1));
            I.setProperty(Value::object(o), I.toPropertyKey(k), v);
        }
        return Value::object(o);
    });
    method(I, ctor, "defineProperty", 3, [](Interpreter& I, Value, Args args) {
        Value target = arg(args, 0);
        if (!target.isObject()) I.throwError(ErrorType::TypeError, "Object.defineProperty called on non-object");
        Value desc = arg(args, 2);
        if (desc.isObject()) {
            Value getter = I.get(desc, "get");
            Value setter = I.get(desc, "set");
            if (!getter.isUndefined() || !setter.isUndefined()) {
                I.throwError(ErrorType::TypeError, "accessor properties are not supported");
            }
            I.setComputed(target, arg(args, 1), I.get(desc, "value"));
        }
        return target;
    });
    method(I, ctor, "hasOwn", 2, [](Interpreter& I, Value, Args args) {
        Value o = arg(args, 0);
        if (!o.isObject()) return Value::boolean(false);
        Value fn = I.get(Value::object(I.intrinsics().objectProto), "hasOwnProperty");
        Value k = arg(args, 1);
        return I.callValue(fn, o, std::span<const Value>(&k, 1));
    });
    method(I, ctor, "is", 2, [](Interpreter& I, Value, Args args) {
        Value a = arg(args, 0);
        Value b = arg(args, 1);
        if (a.isNumber() && b.isNumber()) {
            double x = a.asNumber();
            double y = b.asNumber();
            if (std::isnan(x) && std::isnan(y)) return Value::boolean(true);
            if (x == 0 && y == 0) return Value::boolean(std::signbit(x) == std::signbit(y));
            return Value::boolean(x == y);
        }
        return Value::boolean(I.strictEquals(a, b));
    });
}

void installFunction(Interpreter& I, Env* g) {
    Object* proto = I.intrinsics().functionProto;
    NativeObject* ctor = I.newFunction("Function", 1, [](Interpreter& I, Value, Args) -> Value {
        I.throwError(ErrorType::TypeError, "Function constructor is not available");
    });
    ctor->props.set(I.names.prototype, Value::object(proto));
    proto->props.set(I.names.constructor, Value::object(ctor));
    g->declare(I.atom("Function"), Value::object(ctor), false, true);

    method(I, proto, "call", 1, [](Interpreter& I, Value self, Args args) {
        Args rest = args.empty() ? args : args.subspan(1);
        return I.callValue(self, arg(args, 0), rest);
    });
    method(I, proto, "apply", 2, [](Interpreter& I, Value self, Args args) {
        std::vector<Value> list;
        Value a = arg(args, 1);
        if (a.isObject() && a.asObject()->kind == ObjectKind::Array) {
            list = static_cast<ArrayObject*>(a.asObject())->elements;
        } else if (a.isObject()) {
            double n = I.toNumber(I.getProperty(a, I.names.length));
            if (n > 65536) I.throwError(ErrorType::RangeError, "Too many arguments in function call");
            for (std::size_t i = 0; i < static_cast<std::size_t>(std::max(0.0, n)); ++i) {
                list.push_back(I.getComputed(a, Value::number(static_cast<double>(i))));
            }
        } else if (!a.isNullish()) {
            I.throwError(ErrorType::TypeError, "CreateListFromArrayLike called on non-object");
        }
        if (list.size() > 65536) I.throwError(ErrorType::RangeError, "Too many arguments in function call");
        return I.callValue(self, arg(args, 0), list);
    });
    method(I, proto, "bind", 1, [](Interpreter& I, Value self, Args args) {
        if (!I.isCallable(self)) I.throwError(ErrorType::TypeError, "Bind must be called on a function");
        std::vector<Value> bound;
        if (args.size() > 1) bound.assign(args.begin() + 1, args.end());
        auto* b = I.heap().make<BoundObject>(I.intrinsics().functionProto, self, arg(args, 0), std::move(bound));
        return Value::object(b);
    });
    method(I, proto, "toString", 0, [](Interpreter& I, Value self, Args) {
        if (!I.isCallable(self)) I.throwError(ErrorType::TypeError, "Function.prototype.toString requires a function");
        return I.string("function " + I.toString(I.getProperty(self, I.names.name)) + "() { [native code] }");
    });
}

void installArray(Interpreter& I, Env* g) {
    Object* proto = I.intrinsics().arrayProto;
    NativeObject* ctor = I.newFunction("Array", 1, [](Interpreter& I, Value, Args args) {
        ArrayObject* a;
        if (args.size() == 1 && args[0].isNumber()) {
            double n = args[0].asNumber();
            if (!(n >= 0 && n < 4294967296.0) || n != std::floor(n)) I.throwError(ErrorType::RangeError, "Invalid array length");
            I.tick(static_cast<std::uint64_t>(n) / 16);
            a = I.newArray(static_cast<std::size_t>(n));
        } else {
            a = I.newArray(std::vector<Value>(args.begin(), args.end()));
        }
        a->proto = I.prototypeFor(I.currentNewTarget(), I.intrinsics().arrayProto);
        return Value::object(a);
    }, true);
    ctor->props.set(I.names.prototype, Value::object(proto));
    proto->props.set(I.names.constructor, Value::object(ctor));
    g->declare(I.atom("Array"), Value::object(ctor), false, true);

    method(I, ctor, "isArray", 1, [](Interpreter&, Value, Args args) {
        Value v = arg(args, 0);
        return Value::boolean(v.isObject() && v.asObject()->kind == ObjectKind::Array);
    });
    method(I, ctor, "of", 0, [](Interpreter& I, Value, Args args) {
        return Value::object(I.newArray(std::vector<Value>(args.begin(), args.end())));
    });
    method(I, ctor, "from", 1, [](Interpreter& I, Value, Args args) {
        Value source = arg(args, 0);
        Value mapFn = arg(args, 1);
        if (!mapFn.isUndefined()) requireCallable(I, mapFn, "Array.from");
        std::vector<Value> items;
        if (source.isNullish()) I.throwError(ErrorType::TypeError, I.toString(source) + " is not iterable");
        bool iterable = source.isString() ||
                        (source.isObject() && (source.asObject()->kind == ObjectKind::Array ||
                                               source.asObject()->kind == ObjectKind::Map ||
                                               source.asObject()->kind == ObjectKind::Set));
        if (iterable) {
            items = I.iterableToVector(source);
        } else if (source.isObject()) {
            double n = I.toNumber(I.getProperty(source, I.names.length));
            if (std::isnan(n) || n < 0) n = 0;
            if (n >= 4294967296.0) I.throwError(ErrorType::RangeError, "Invalid array length");
            auto len = static_cast<std::size_t>(n);
            I.heap().charge(len * sizeof(Value));
            I.tick(len / 8);
            items.reserve(len);
            for (std::size_t i = 0; i < len; ++i) items.push_back(I.getComputed(source, Value::number(static_cast<double>(i))));
        }
        if (!mapFn.isUndefined()) {
            for (std::size_t i = 0; i < items.size(); ++i) {
                Value callArgs[2] = {items[i], Value::number(static_cast<double>(i))};
                items[i] = I.callValue(mapFn, Value(), callArgs);
            }
        }
        return Value::object(I.newArray(std::move(items)));
    });

    method(I, proto, "push", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "push");
        if (a->frozen) I.throwError(ErrorType::TypeError, "Cannot add property, object is not extensible");
        for (Value v : args) I.pushElement(a, v);
        return Value::number(static_cast<double>(a->elements.size()));
    });
    method(I, proto, "pop", 0, [](Interpreter& I, Value self, Args) {
        ArrayObject* a = thisArray(I, self, "pop");
        if (a->elements.empty() || a->frozen) return Value();
        Value v = a->elements.back();
        a->elements.pop_back();
        return v;
    });
    method(I, proto, "shift", 0, [](Interpreter& I, Value self, Args) {
        ArrayObject* a = thisArray(I, self, "shift");
        if (a->elements.empty() || a->frozen) return Value();
        I.tick(a->elements.size() / 16);
        Value v = a->elements.front();
        a->elements.erase(a->elements.begin());
        return v;
    });
    method(I, proto, "unshift", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "unshift");
        if (a->frozen) I.throwError(ErrorType::TypeError, "Cannot add property, object is not extensible");
        I.heap().charge(args.size() * sizeof(Value));
        I.tick(a->elements.size() / 16);
        a->elements.insert(a->elements.begin(), args.begin(), args.end());
        return Value::number(static_cast<double>(a->elements.size()));
    });
    method(I, proto, "slice", 2, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "slice");
        std::size_t n = a->elements.size();
        std::size_t start = relativeIndex(I, arg(args, 0), n, 0);
        std::size_t end = relativeIndex(I, arg(args, 1), n, n);
        std::vector<Value> out;
        if (start < end) out.assign(a->elements.begin() + static_cast<std::ptrdiff_t>(start), a->elements.begin() + static_cast<std::ptrdiff_t>(end));
        I.tick(out.size() / 8);
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, proto, "splice", 2, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "splice");
        std::size_t n = a->elements.size();
        std::size_t start = relativeIndex(I, arg(args, 0), n, 0);
        std::size_t count;
        if (args.empty()) count = 0;
        else if (args.size() < 2) count = n - start;
        else count = static_cast<std::size_t>(std::clamp(toIntegerOrInfinity(I, args[1]), 0.0, static_cast<double>(n - start)));
        auto first = a->elements.begin() + static_cast<std::ptrdiff_t>(start);
        std::vector<Value> removed(first, first + static_cast<std::ptrdiff_t>(count));
        if (a->frozen) I.throwError(ErrorType::TypeError, "Cannot modify frozen array");
        a->elements.erase(first, first + static_cast<std::ptrdiff_t>(count));
        if (args.size() > 2) {
            I.heap().charge((args.size() - 2) * sizeof(Value));
            a->elements.insert(a->elements.begin() + static_cast<std::ptrdiff_t>(start), args.begin() + 2, args.end());
        }
        I.tick(n / 16);
        return Value::object(I.newArray(std::move(removed)));
    });
    method(I, proto, "concat", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "concat");
        std::vector<Value> out = a->elements;
        for (Value v : args) {
            if (v.isObject() && v.asObject()->kind == ObjectKind::Array) {
                const auto& els = static_cast<ArrayObject*>(v.asObject())->elements;
                out.insert(out.end(), els.begin(), els.end());
            } else {
                out.push_back(v);
            }
        }
        I.tick(out.size() / 8);
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, proto, "join", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "join");
        std::string sep = arg(args, 0).isUndefined() ? "," : I.toString(args[0]);
        std::vector<Object*> active;
        return I.string(joinArray(I, a, sep, active));
    });
    method(I, proto, "toString", 0, [](Interpreter& I, Value self, Args) {
        if (!self.isObject() || self.asObject()->kind != ObjectKind::Array) return I.string("[object Object]");
        std::vector<Object*> active;
        return I.string(joinArray(I, static_cast<ArrayObject*>(self.asObject()), ",", active));
    });
    method(I, proto, "reverse", 0, [](Interpreter& I, Value self, Args) {
        ArrayObject* a = thisArray(I, self, "reverse");
        I.tick(a->elements.size() / 16);
        if (!a->frozen) std::reverse(a->elements.begin(), a->elements.end());
        return self;
    });
    method(I, proto, "indexOf", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "indexOf");
        std::size_t from = relativeIndex(I, arg(args, 1), a->elements.size(), 0);
        for (std::size_t i = from; i < a->elements.size(); ++i) {
            I.tick();
            if (I.strictEquals(a->elements[i], arg(args, 0))) return Value::number(static_cast<double>(i));
        }
        return Value::number(-1);
    });
    method(I, proto, "lastIndexOf", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "lastIndexOf");
        for (std::size_t i = a->elements.size(); i-- > 0;) {
            I.tick();
            if (I.strictEquals(a->elements[i], arg(args, 0))) return Value::number(static_cast<double>(i));
        }
        return Value::number(-1);
    });
    method(I, proto, "includes", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "includes");
        std::size_t from = relativeIndex(I, arg(args, 1), a->elements.size(), 0);
        for (std::size_t i = from; i < a->elements.size(); ++i) {
            I.tick();
            if (Interpreter::sameValueZero(a->elements[i], arg(args, 0))) return Value::boolean(true);
        }
        return Value::boolean(false);
    });
    method(I, proto, "at", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "at");
        double d = toIntegerOrInfinity(I, arg(args, 0));
        if (d < 0) d += static_cast<double>(a->elements.size());
        if (d < 0 || d >= static_cast<double>(a->elements.size())) return Value();
        return a->elements[static_cast<std::size_t>(d)];
    });
    method(I, proto, "fill", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "fill");
        std::size_t n = a->elements.size();
        std::size_t start = relativeIndex(I, arg(args, 1), n, 0);
        std::size_t end = relativeIndex(I, arg(args, 2), n, n);
        I.tick(n / 16);
        if (!a->frozen) {
            for (std::size_t i = start; i < end; ++i) a->elements[i] = arg(args, 0);
        }
        return self;
    });

    // Iteration callbacks: fn(element, index, array)
    auto iterate = [](Interpreter& I, ArrayObject* a, Value fn, Value thisArg, auto&& visit) {
        for (std::size_t i = 0; i < a->elements.size(); ++i) {
            Value callArgs[3] = {a->elements[i], Value::number(static_cast<double>(i)), Value::object(a)};
            if (visit(i, callArgs[0], I.callValue(fn, thisArg, callArgs))) return;
        }
    };
    method(I, proto, "forEach", 1, [iterate](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "forEach");
        Value fn = requireCallable(I, arg(args, 0), "forEach");
        iterate(I, a, fn, arg(args, 1), [](std::size_t, Value, Value) { return false; });
        return Value();
    });
    method(I, proto, "map", 1, [iterate](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "map");
        Value fn = requireCallable(I, arg(args, 0), "map");
        ArrayObject* out = I.newArray(a->elements.size());
        iterate(I, a, fn, arg(args, 1), [&](std::size_t i, Value, Value r) {
            if (i < out->elements.size()) out->elements[i] = r;
            return false;
        });
        return Value::object(out);
    });
    method(I, proto, "filter", 1, [iterate](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "filter");
        Value fn = requireCallable(I, arg(args, 0), "filter");
        ArrayObject* out = I.newArray(0);
        iterate(I, a, fn, arg(args, 1), [&](std::size_t, Value item, Value r) {
            if (I.truthy(r)) I.pushElement(out, item);
            return false;
        });
        return Value::object(out);
    });
    method(I, proto, "some", 1, [iterate](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "some");
        Value fn = requireCallable(I, arg(args, 0), "some");
        bool found = false;
        iterate(I, a, fn, arg(args, 1), [&](std::size_t, Value, Value r) { return found = I.truthy(r); });
        return Value::boolean(found);
    });
    method(I, proto, "every", 1, [iterate](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "every");
        Value fn = requireCallable(I, arg(args, 0), "every");
        bool all = true;
        iterate(I, a, fn, arg(args, 1), [&](std::size_t, Value, Value r) {
            all = I.truthy(r);
            return !all;
        });
        return Value::boolean(all);
    });
    method(I, proto, "find", 1, [iterate](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "find");
        Value fn = requireCallable(I, arg(args, 0), "find");
        Value result;
        iterate(I, a, fn, arg(args, 1), [&](std::size_t, Value item, Value r) {
            if (!I.truthy(r)) return false;
            result = item;
            return true;
        });
        return result;
    });
    method(I, proto, "findIndex", 1, [iterate](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "findIndex");
        Value fn = requireCallable(I, arg(args, 0), "findIndex");
        double result = -1;
        iterate(I, a, fn, arg(args, 1), [&](std::size_t i, Value, Value r) {
            if (!I.truthy(r)) return false;
            result = static_cast<double>(i);
            return true;
        });
        return Value::number(result);
    });
    auto findFromEnd = [](Interpreter& I, Value self, Args args, bool wantIndex) {
        ArrayObject* a = thisArray(I, self, wantIndex ? "findLastIndex" : "findLast");
        Value fn = requireCallable(I, arg(args, 0), "findLast");
        for (std::size_t i = a->elements.size(); i-- > 0;) {
            if (i >= a->elements.size()) continue;
            Value item = a->elements[i];
            Value callArgs[3] = {item, Value::number(static_cast<double>(i)), self};
            if (I.truthy(I.callValue(fn, arg(args, 1), callArgs))) {
                return wantIndex ? Value::number(static_cast<double>(i)) : item;
            }
        }
        return wantIndex ? Value::number(-1) : Value();
    };
    method(I, proto, "findLast", 1, [findFromEnd](Interpreter& I, Value self, Args args) { return findFromEnd(I, self, args, false); });
    method(I, proto, "findLastIndex", 1, [findFromEnd](Interpreter& I, Value self, Args args) { return findFromEnd(I, self, args, true); });
    auto reduce = [](Interpreter& I, Value self, Args args, bool fromRight) {
        ArrayObject* a = thisArray(I, self, fromRight ? "reduceRight" : "reduce");
        Value fn = requireCallable(I, arg(args, 0), "reduce");
        std::size_t n = a->elements.size();
        std::size_t k = 0;
        Value acc;
        if (args.size() >= 2) {
            acc = args[1];
        } else {
            if (n == 0) I.throwError(ErrorType::TypeError, "Reduce of empty array with no initial value");
            acc = fromRight ? a->elements[n - 1] : a->elements[0];
            k = 1;
        }
        for (; k < n && k < a->elements.size() + (fromRight ? 0 : 0); ++k) {
            std::size_t i = fromRight ? n - 1 - k : k;
            if (i >= a->elements.size()) continue;
            Value callArgs[4] = {acc, a->elements[i], Value::number(static_cast<double>(i)), self};
            acc = I.callValue(fn, Value(), callArgs);
        }
        return acc;
    };
    method(I, proto, "reduce", 1, [reduce](Interpreter& I, Value self, Args args) { return reduce(I, self, args, false); });
    method(I, proto, "reduceRight", 1, [reduce](Interpreter& I, Value self, Args args) { return reduce(I, self, args, true); });
    method(I, proto, "sort", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "sort");
        Value cmp = arg(args, 0);
        if (!cmp.isUndefined()) requireCallable(I, cmp, "sort");
        std::vector<Value> items;
        std::size_t undefinedCount = 0;
        for (Value v : a->elements) {
            if (v.isUndefined()) ++undefinedCount;
            else items.push_back(v);
        }
        if (cmp.isUndefined()) {
            std::vector<std::pair<std::string, Value>> keyed;
            for (Value v : items) keyed.emplace_back(I.toString(v), v);
            I.tick(keyed.size() * 4);
            std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
            for (std::size_t i = 0; i < keyed.size(); ++i) items[i] = keyed[i].second;
        } else {
            mergeSort(items, [&](Value x, Value y) {
                Value callArgs[2] = {x, y};
                double r = I.toNumber(I.callValue(cmp, Value(), callArgs));
                return !(r > 0);
            });
        }
        items.insert(items.end(), undefinedCount, Value());
        if (!a->frozen) a->elements = std::move(items);
        return self;
    });
    method(I, proto, "flat", 0, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "flat");
        double depth = arg(args, 0).isUndefined() ? 1 : toIntegerOrInfinity(I, args[0]);
        std::vector<Value> out;
        flattenInto(I, out, a->elements, std::min(depth, 64.0));
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, proto, "flatMap", 1, [](Interpreter& I, Value self, Args args) {
        ArrayObject* a = thisArray(I, self, "flatMap");
        Value fn = requireCallable(I, arg(args, 0), "flatMap");
        std::vector<Value> out;
        for (std::size_t i = 0; i < a->elements.size(); ++i) {
            Value callArgs[3] = {a->elements[i], Value::number(static_cast<double>(i)), self};
            Value r = I.callValue(fn, arg(args, 1), callArgs);
            if (r.isObject() && r.asObject()->kind == ObjectKind::Array) {
                const auto& els = static_cast<ArrayObject*>(r.asObject())->elements;
                out.insert(out.end(), els.begin(), els.end());
            } else {
                out.push_back(r);
            }
        }
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, proto, "keys", 0, [](Interpreter& I, Value self, Args) {
        ArrayObject* a = thisArray(I, self, "keys");
        std::vector<Value> out;
        for (std::size_t i = 0; i < a->elements.size(); ++i) out.push_back(Value::number(static_cast<double>(i)));
        return Value::object(I.newArray(std::move(out)));
    });
    method(I, proto, "values", 0, [](Interpreter& I, Value self, Args) {
        return Value::object(I.newArray(thisArray(I, self, "values")->elements));
    });
    method(I, proto, "entries", 0, [](Interpreter& I, Value self, Args) {
        ArrayObject* a = thisArray(I, self, "entries");
        std::vector<Value> out;
        for (std::size_t i = 0; i < a->elements.size(); ++i) {
            out.push_back(Value::object(I.newArray(std::vector<Value>{Value::number(static_cast<double>(i)), a->elements[i]})));
        }
        return Value::object(I.newArray(std::move(out)));
    });
}

void installString(Interpreter& I, Env* g) {
    Object* proto = I.intrinsics().stringProto;
    NativeObject* ctor = I.newFunction("String", 1, [](Interpreter& I, Value, Args args) {
        if (args.empty()) return I.string("");
        return I.toStringValue(args[0]);
    });
    ctor->props.set(I.names.prototype, Value::object(proto));
    proto->props.set(I.names.constructor, Value::object(ctor));
    g->declare(I.atom("String"), Value::object(ctor), false, true);

    method(I, ctor, "fromCharCode", 1, [](Interpreter& I, Value, Args args) {
        std::string out;
        for (Value v : args) {
            auto cp = static_cast<std::uint32_t>(toUint32(I.toNumber(v)) & 0xFFFF);
            if (cp < 0x80) {
                out += static_cast<char>(cp);
            } else if (cp < 0x800) {
                out += static_cast<char>(0xC0 | (cp >> 6));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            } else {
                out += static_cast<char>(0xE0 | (cp >> 12));
                out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                out += static_cast<char>(0x80 | (cp & 0x3F));
            }
        }
        return I.string(out);
    });

    method(I, proto, "toString", 0, [](Interpreter& I, Value self, Args) { return I.toStringValue(self); });
    method(I, proto, "valueOf", 0, [](Interpreter& I, Value self, Args) { return I.toStringValue(self); });
    method(I, proto, "charAt", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "charAt");
        double d = toIntegerOrInfinity(I, arg(args, 0));
        if (d < 0 || d >= static_cast<double>(s.size())) return I.string("");
        return I.string(s.substr(static_cast<std::size_t>(d), 1));
    });
    method(I, proto, "charCodeAt", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "charCodeAt");
        double d = toIntegerOrInfinity(I, arg(args, 0));
        if (d < 0 || d >= static_cast<double>(s.size())) return Value::number(std::nan(""));
        return Value::number(static_cast<unsigned char>(s[static_cast<std::size_t>(d)]));
    });
    method(I, proto, "codePointAt", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "codePointAt");
        double d = toIntegerOrInfinity(I, arg(args, 0));
        if (d < 0 || d >= static_cast<double>(s.size())) return Value();
        return Value::number(static_cast<unsigned char>(s[static_cast<std::size_t>(d)]));
    });
    method(I, proto, "at", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "at");
        double d = toIntegerOrInfinity(I, arg(args, 0));
        if (d < 0) d += static_cast<double>(s.size());
        if (d < 0 || d >= static_cast<double>(s.size())) return Value();
        return I.string(s.substr(static_cast<std::size_t>(d), 1));
    });
    method(I, proto, "indexOf", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "indexOf");
        std::string needle = I.toString(arg(args, 0));
        std::size_t from = static_cast<std::size_t>(std::clamp(toIntegerOrInfinity(I, arg(args, 1)), 0.0, static_cast<double>(s.size())));
        I.tick(s.size() / 32);
        auto pos = s.find(needle, from);
        return Value::number(pos == std::string::npos ? -1.0 : static_cast<double>(pos));
    });
    method(I, proto, "lastIndexOf", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "lastIndexOf");
        I.tick(s.size() / 32);
        auto pos = s.rfind(I.toString(arg(args, 0)));
        return Value::number(pos == std::string::npos ? -1.0 : static_cast<double>(pos));
    });
    method(I, proto, "includes", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "includes");
        I.tick(s.size() / 32);
        return Value::boolean(s.find(I.toString(arg(args, 0))) != std::string::npos);
    });
    method(I, proto, "startsWith", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "startsWith");
        std::string p = I.toString(arg(args, 0));
        std::size_t from = static_cast<std::size_t>(std::clamp(toIntegerOrInfinity(I, arg(args, 1)), 0.0, static_cast<double>(s.size())));
        return Value::boolean(s.compare(from, p.size(), p) == 0 && from + p.size() <= s.size());
    });
    method(I, proto, "endsWith", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "endsWith");
        std::string p = I.toString(arg(args, 0));
        std::size_t end = arg(args, 1).isUndefined()
                              ? s.size()
                              : static_cast<std::size_t>(std::clamp(toIntegerOrInfinity(I, args[1]), 0.0, static_cast<double>(s.size())));
        return Value::boolean(p.size() <= end && s.compare(end - p.size(), p.size(), p) == 0);
    });
    method(I, proto, "slice", 2, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "slice");
        std::size_t start = relativeIndex(I, arg(args, 0), s.size(), 0);
        std::size_t end = relativeIndex(I, arg(args, 1), s.size(), s.size());
        return I.string(start < end ? s.substr(start, end - start) : "");
    });
    method(I, proto, "substring", 2, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "substring");
        auto clampIdx = [&](Value v, double fallback) {
            double d = v.isUndefined() ? fallback : toIntegerOrInfinity(I, v);
            return static_cast<std::size_t>(std::clamp(d, 0.0, static_cast<double>(s.size())));
        };
        std::size_t a = clampIdx(arg(args, 0), 0);
        std::size_t b = clampIdx(arg(args, 1), static_cast<double>(s.size()));
        if (a > b) std::swap(a, b);
        return I.string(s.substr(a, b - a));
    });
    method(I, proto, "substr", 2, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "substr");
        std::size_t start = relativeIndex(I, arg(args, 0), s.size(), 0);
        double len = arg(args, 1).isUndefined() ? static_cast<double>(s.size()) : toIntegerOrInfinity(I, args[1]);
        if (len <= 0) return I.string("");
        return I.string(s.substr(start, static_cast<std::size_t>(std::min(len, static_cast<double>(s.size())))));
    });
    method(I, proto, "toUpperCase", 0, [](Interpreter& I, Value self, Args) {
        std::string s = stringThis(I, self, "toUpperCase");
        for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return I.string(s);
    });
    method(I, proto, "toLowerCase", 0, [](Interpreter& I, Value self, Args) {
        std::string s = stringThis(I, self, "toLowerCase");
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return I.string(s);
    });
    method(I, proto, "trim", 0, [](Interpreter& I, Value self, Args) {
        return I.string(trimWhitespace(stringThis(I, self, "trim")));
    });
    method(I, proto, "trimStart", 0, [](Interpreter& I, Value self, Args) {
        std::string s = stringThis(I, self, "trimStart");
        std::string_view t = trimWhitespace(s);
        return I.string(std::string_view(s).substr(static_cast<std::size_t>(t.data() - s.data())));
    });
    method(I, proto, "trimEnd", 0, [](Interpreter& I, Value self, Args) {
        std::string s = stringThis(I, self, "trimEnd");
        std::string_view t = trimWhitespace(s);
        return I.string(std::string_view(s).substr(0, static_cast<std::size_t>(t.data() - s.data()) + t.size()));
    });
    auto pad = [](Interpreter& I, Value self, Args args, bool atStart) {
        std::string s = stringThis(I, self, atStart ? "padStart" : "padEnd");
        double target = toIntegerOrInfinity(I, arg(args, 0));
        std::string filler = arg(args, 1).isUndefined() ? " " : I.toString(args[1]);
        if (target <= static_cast<double>(s.size()) || filler.empty()) return I.string(s);
        I.heap().charge(static_cast<std::size_t>(std::min(target, 1e12)));
        auto need = static_cast<std::size_t>(target) - s.size();
        std::string padding;
        while (padding.size() < need) padding += filler;
        padding.resize(need);
        return I.string(atStart ? padding + s : s + padding);
    };
    method(I, proto, "padStart", 2, [pad](Interpreter& I, Value self, Args args) { return pad(I, self, args, true); });
    method(I, proto, "padEnd", 2, [pad](Interpreter& I, Value self, Args args) { return pad(I, self, args, false); });
    method(I, proto, "repeat", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "repeat");
        double n = toIntegerOrInfinity(I, arg(args, 0));
        if (n < 0 || std::isinf(n)) I.throwError(ErrorType::RangeError, "Invalid count value: " + numberToString(n));
        I.heap().charge(static_cast<std::size_t>(std::min(n * static_cast<double>(s.size()), 1e12)));
        std::string out;
        out.reserve(static_cast<std::size_t>(n) * s.size());
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) out += s;
        I.tick(out.size() / 64);
        return I.string(out);
    });
    method(I, proto, "concat", 1, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "concat");
        for (Value v : args) s += I.toString(v);
        return I.string(s);
    });
    method(I, proto, "split", 2, [](Interpreter& I, Value self, Args args) {
        std::string s = stringThis(I, self, "split");
        double limitD = arg(args, 1).isUndefined() ? 4294967295.0 : static_cast<double>(toUint32(I.toNumber(args[1])));
        auto limit = static_cast<std::size_t>(limitD);
        ArrayObject* out = I.newArray(0);
        if (limit == 0) return Value::object(out);
        if (arg(args, 0).isUndefined()) {
            I.pushElement(out, I.string(s));
            return Value::object(out);
        }
        std::string sep = I.toString(args[0]);
        I.tick(s.size() / 16);
        if (sep.empty()) {
            for (std::size_t i = 0; i < s.size() && out->elements.size() < limit; ++i) I.pushElement(out, I.string(s.substr(i, 1)));
            return Value::object(out);
        }
        std::size_t pos = 0;
        while (out->elements.size() < limit) {
            auto next = s.find(sep, pos);
            if (next == std::string::npos) {
                I.pushElement(out, I.string(s.substr(pos)));
                break;
            }
            I.pushElement(out, I.string(s.substr(pos, next - pos)));
            pos = next + sep.size();
        }
        return Value::object(out);
    });
    auto replace = [](Interpreter& I, Value self, Args args, bool all) {
        std::string s = stringThis(I, self, all ? "replaceAll" : "replace");
        std::string pattern = I.toString(arg(args, 0));
        Value replacement = arg(args, 1);
        bool fn = I.isCallable(replacement);
        std::string replText = fn ? "" : I.toString(replacement);
        std::string out;
        std::size_t pos = 0;
        I.tick(s.size() / 16);
        while (true) {
            auto next = s.find(pattern, pos);
            if (next == std::string::npos) break;
            out += s.substr(pos, next - pos);
            if (fn) {
                Value callArgs[3] = {I.string(pattern), Value::number(static_cast<double>(next)), I.string(s)};
                out += I.toString(I.callValue(replacement, Value(), callArgs));
            } else {
                out += replText;
            }
            pos = next + pattern.size();
            if (!all) break;
            if (pattern.empty()) {
                if (pos >= s.size()) {
                    pos = s.size() + 1;
                    break;
                }
                out += s[pos];
                ++pos;
            }
            if (out.size() > (1u << 20)) I.heap().charge(out.size());
        }
        if (pos <= s.size()) out += s.substr(pos);
        return I.string(out);
    };
    method(I, proto, "replace", 2, [replace](Interpreter& I, Value self, Args args) { return replace(I, self, args, false); });
    method(I, proto, "replaceAll", 2, [replace](Interpreter& I, Value self, Args args) { return replace(I, self, args, true); });
    method(I, proto, "localeCompare", 1, [](Interpreter& I, Value self, Args args) {
        int c = stringThis(I, self, "localeCompare").compare(I.toString(arg(args, 0)));
        return Value::number(c < 0 ? -1 : c > 0 ? 1 : 0);
    });
}

void installNumber(Interpreter& I, Env* g) {
    Object* proto = I.intrinsics().numberProto;
    NativeObject* ctor = I.newFunction("Number", 1, [](Interpreter& I, Value, Args args) {
        return Value::number(args.empty() ? 0.0 : I.toNumber(args[0]));
    });
    ctor->props.set(I.names.prototype, Value::object(proto));
    proto->props.set(I.names.constructor, Value::object(ctor));
    g->declare(I.atom("Number"), Value::object(ctor), false, true);

    constant(I, ctor, "MAX_SAFE_INTEGER", Value::number(9007199254740991.0));
    constant(I, ctor, "MIN_SAFE_INTEGER", Value::number(-9007199254740991.0));
    constant(I, ctor, "EPSILON", Value::number(std::numeric_limits<double>::epsilon()));
    constant(I, ctor, "MAX_VALUE", Value::number(std::numeric_limits<double>::max()));
    constant(I, ctor, "MIN_VALUE", Value::number(std::numeric_limits<double>::denorm_min()));
    constant(I, ctor, "POSITIVE_INFINITY", Value::number(HUGE_VAL));
    constant(I, ctor, "NEGATIVE_INFINITY", Value::number(-HUGE_VAL));
    constant(I, ctor, "NaN", Value::number(std::nan("")));
    method(I, ctor, "isInteger", 1, [](Interpreter&, Value, Args args) {
        Value v = arg(args, 0);
        return Value::boolean(v.isNumber() && std::isfinite(v.asNumber()) && std::trunc(v.asNumber()) == v.asNumber());
    });
    method(I, ctor, "isSafeInteger", 1, [](Interpreter&, Value, Args args) {
        Value v = arg(args, 0);
        return Value::boolean(v.isNumber() && std::isfinite(v.asNumber()) && std::trunc(v.asNumber()) == v.asNumber() &&
                              std::fabs(v.asNumber()) <= 9007199254740991.0);
    });
    method(I, ctor, "isFinite", 1, [](Interpreter&, Value, Args args) {
        Value v = arg(args, 0);
        return Value::boolean(v.isNumber() && std::isfinite(v.asNumber()));
    });
    method(I, ctor, "isNaN", 1, [](Interpreter&, Value, Args args) {
        Value v = arg(args, 0);
        return Value::boolean(v.isNumber() && std::isnan(v.asNumber()));
    });

    auto thisNumber = [](Interpreter& I, Value self) {
        if (!self.isNumber()) I.throwError(ErrorType::TypeError, "Number.prototype method called on incompatible receiver");
        return self.asNumber();
    };
    method(I, proto, "toString", 1, [thisNumber](Interpreter& I, Value self, Args args) {
        double v = thisNumber(I, self);
        int radix = arg(args, 0).isUndefined() ? 10 : static_cast<int>(toIntegerOrInfinity(I, args[0]));
        if (radix < 2 || radix > 36) I.throwError(ErrorType::RangeError, "toString() radix must be between 2 and 36");
        return I.string(numberToRadixString(v, radix));
    });
    method(I, proto, "toFixed", 1, [thisNumber](Interpreter& I, Value self, Args args) {
        double v = thisNumber(I, self);
        double f = toIntegerOrInfinity(I, arg(args, 0));
        if (f < 0 || f > 100) I.throwError(ErrorType::RangeError, "toFixed() digits argument must be between 0 and 100");
        return I.string(numberToFixed(v, static_cast<int>(f)));
    });
    method(I, proto, "toPrecision", 1, [thisNumber](Interpreter& I, Value self, Args args) {
        double v = thisNumber(I, self);
        if (arg(args, 0).isUndefined()) return I.string(numberToString(v));
        double p = toIntegerOrInfinity(I, args[0]);
        if (p < 1 || p > 100) I.throwError(ErrorType::RangeError, "toPrecision() argument must be between 1 and 100");
        return I.string(numberToPrecision(v, static_cast<int>(p)));
    });
    method(I, proto, "toExponential", 1, [thisNumber](Interpreter& I, Value self, Args args) {
        double v = thisNumber(I, self);
        std::optional<int> f;
        if (!arg(args, 0).isUndefined()) {
            double d = toIntegerOrInfinity(I, args[0]);
            if (d < 0 || d > 100) I.throwError(ErrorType::RangeError, "toExponential() argument must be between 0 and 100");
            f = static_cast<int>(d);
        }
        return I.string(numberToExponential(v, f));
    });
    method(I, proto, "valueOf", 0, [thisNumber](Interpreter& I, Value self, Args) { return Value::number(thisNumber(I, self)); });
    method(I, proto, "toLocaleString", 0, [thisNumber](Interpreter& I, Value self, Args) {
        return I.string(numberToString(thisNumber(I, self)));
    });

    Object* bproto = I.intrinsics().booleanProto;
    NativeObject* bctor = I.newFunction("Boolean", 1, [](Interpreter& I, Value, Args args) {
        return Value::boolean(I.truthy(arg(args, 0)));
    });
    bctor->props.set(I.names.prototype, Value::object(bproto));
    bproto->props.set(I.names.constructor, Value::object(bctor));
    g->declare(I.atom("Boolean"), Value::object(bctor), false, true);
    method(I, bproto, "toString", 0, [](Interpreter& I, Value self, Args) { return I.string(I.truthy(self) ? "true" : "false"); });
    method(I, bproto, "valueOf", 0, [](Interpreter& I, Value self, Args) { return Value::boolean(I.truthy(self)); });

    auto parseIntFn = I.newFunction("parseInt", 2, [](Interpreter& I, Value, Args args) {
        std::string s = I.toString(arg(args, 0));
        int radix = static_cast<int>(toInt32(I.toNumber(arg(args, 1))));
        return Value::number(parseIntPrefix(s, radix));
    });
    auto parseFloatFn = I.newFunction("parseFloat", 1, [](Interpreter& I, Value, Args args) {
        return Value::number(parseFloatPrefix(I.toString(arg(args, 0))));
    });
    ctor->props.set(I.atom("parseInt"), Value::object(parseIntFn));
    ctor->props.set(I.atom("parseFloat"), Value::object(parseFloatFn));
    g->declare(I.atom("parseInt"), Value::object(parseIntFn), false, true);
    g->declare(I.atom("parseFloat"), Value::object(parseFloatFn), false, true);
    g->declare(I.atom("isNaN"), Value::object(I.newFunction("isNaN", 1, [](Interpreter& I, Value, Args args) {
        return Value::boolean(std::isnan(I.toNumber(arg(args, 0))));
    })), false, true);
    g->declare(I.atom("isFinite"), Value::object(I.newFunction("isFinite", 1, [](Interpreter& I, Value, Args args) {
        return Value::boolean(std::isfinite(I.toNumber(arg(args, 0))));
    })), false, true);
    g->declare(I.atom("NaN"), Value::number(std::nan("")), false, true);
    g->declare(I.atom("Infinity"), Value::number(HUGE_VAL), false, true);
    g->declare(I.atom("undefined"), Value(), false, true);
}

void installMath(Interpreter& I, Env* g) {
    Object* math = I.newObject();
    g->declare(I.atom("Math"), Value::object(math), false, true);
    constant(I, math, "PI", Value::number(M_PI));
    constant(I, math, "E", Value::number(M_E));
    constant(I, math, "LN2", Value::number(M_LN2));
    constant(I, math, "LN10", Value::number(M_LN10));
    constant(I, math, "LOG2E", Value::number(M_LOG2E));
    constant(I, math, "LOG10E", Value::number(M_LOG10E));
    constant(I, math, "SQRT2", Value::number(M_SQRT2));
    constant(I, math, "SQRT1_2", Value::number(M_SQRT1_2));

    auto unary = [&](std::string_view name, double (*fn)(double)) {
        method(I, math, name, 1, [fn](Interpreter& I, Value, Args args) {
            return Value::number(fn(I.toNumber(arg(args, 0))));
        });
    };
    unary("abs", [](double x) { return std::fabs(x); });
    unary("acos", [](double x) { return std::acos(x); });
    unary("acosh", [](double x) { return std::acosh(x); });
    unary("asin", [](double x) { return std::asin(x); });
    unary("asinh", [](double x) { return std::asinh(x); });
    unary("atan", [](double x) { return std::atan(x); });
    unary("atanh", [](double x) { return std::atanh(x); });
    unary("cbrt", [](double x) { return std::cbrt(x); });
    unary("ceil", [](double x) { return std::ceil(x); });
    unary("cos", [](double x) { return std::cos(x); });
    unary("cosh", [](double x) { return std::cosh(x); });
    unary("exp", [](double x) { return std::exp(x); });
    unary("expm1", [](double x) { return std::expm1(x); });
    unary("floor", [](double x) { return std::floor(x); });
    unary("fround", [](double x) { return static_cast<double>(static_cast<float>(x)); });
    unary("log", [](double x) { return std::log(x); });
    unary("log10", [](double x) { return std::log10(x); });
    unary("log1p", [](double x) { return std::log1p(x); });
    unary("log2", [](double x) { return std::log2(x); });
    unary("round", [](double x) {
        if (!std::isfinite(x) || x == 0) return x;
        if (x > 0 && x < 0.5) return 0.0;
        if (x < 0 && x >= -0.5) return -0.0;
        return std::floor(x + 0.5);
    });
    unary("sign", [](double x) {
        if (std::isnan(x) || x == 0) return x;
        return x > 0 ? 1.0 : -1.0;
    });
    unary("sin", [](double x) { return std::sin(x); });
    unary("sinh", [](double x) { return std::sinh(x); });
    unary("sqrt", [](double x) { return std::sqrt(x); });
    unary("tan", [](double x) { return std::tan(x); });
    unary("tanh", [](double x) { return std::tanh(x); });
    unary("trunc", [](double x) { return std::trunc(x); });
    unary("clz32", [](double x) {
        std::uint32_t v = toUint32(x);
        return static_cast<double>(v == 0 ? 32 : __builtin_clz(v));
    });
    method(I, math, "atan2", 2, [](Interpreter& I, Value, Args args) {
        return Value::number(std::atan2(I.toNumber(arg(args, 0)), I.toNumber(arg(args, 1))));
    });
    method(I, math, "pow", 2, [](Interpreter& I, Value, Args args) {
        double x = I.toNumber(arg(args, 0));
        double y = I.toNumber(arg(args, 1));
        if (std::isnan(y) || (std::fabs(x) == 1.0 && std::isinf(y))) return Value::number(std::nan(""));
        return Value::number(std::pow(x, y));
    });
    method(I, math, "imul", 2, [](Interpreter& I, Value, Args args) {
        auto a = static_cast<std::uint32_t>(toInt32(I.toNumber(arg(args, 0))));
        auto b = static_cast<std::uint32_t>(toInt32(I.toNumber(arg(args, 1))));
        return Value::number(static_cast<std::int32_t>(a * b));
    });
    method(I, math, "hypot", 2, [](Interpreter& I, Value, Args args) {
        double sum = 0;
        bool inf = false;
        bool nan = false;
        for (Value v : args) {
            double d = I.toNumber(v);
            if (std::isinf(d)) inf = true;
            if (std::isnan(d)) nan = true;
            sum += d * d;
        }
        if (inf) return Value::number(HUGE_VAL);
        if (nan) return Value::number(std::nan(""));
        return Value::number(std::sqrt(sum));
    });
    method(I, math, "max", 2, [](Interpreter& I, Value, Args args) {
        double r = -HUGE_VAL;
        for (Value v : args) {
            double d = I.toNumber(v);
            if (std::isnan(d)) r = d;
            else if (!std::isnan(r) && (d > r || (d == 0 && r == 0 && !std::signbit(d)))) r = d;
        }
        return Value::number(r);
    });
    method(I, math, "min", 2, [](Interpreter& I, Value, Args args) {
        double r = HUGE_VAL;
        for (Value v : args) {
            double d = I.toNumber(v);
            if (std::isnan(d)) r = d;
            else if (!std::isnan(r) && (d < r || (d == 0 && r == 0 && std::signbit(d)))) r = d;
        }
        return Value::number(r);
    });
    method(I, math, "random", 0, [](Interpreter& I, Value, Args) { return Value::number(I.random()); });
}

void installErrors(Interpreter& I, Env* g) {
    const Intrinsics& in = I.intrinsics();
    struct Kind {
        const char* name;
        Object* proto;
        ErrorType type;
    };
    Kind kinds[] = {
        {"Error", in.errorProto, ErrorType::Error},
        {"TypeError", in.typeErrorProto, ErrorType::TypeError},
        {"RangeError", in.rangeErrorProto, ErrorType::RangeError},
        {"ReferenceError", in.referenceErrorProto, ErrorType::ReferenceError},
        {"SyntaxError", in.syntaxErrorProto, ErrorType::SyntaxError},
    };
    NativeObject* base = nullptr;
    for (const Kind& k : kinds) {
        Object* proto = k.proto;
        ErrorType type = k.type;
        NativeObject* ctor = I.newFunction(k.name, 1, [proto, type](Interpreter& I, Value, Args args) {
            Value message = arg(args, 0);
            Value e = I.makeError(type, message.isUndefined() ? "" : I.toString(message));
            Object* o = e.asObject();
            o->proto = I.prototypeFor(I.currentNewTarget(), proto);
            if (message.isUndefined()) o->props.erase(I.names.message);
            Value options = arg(args, 1);
            if (options.isObject()) {
                Value cause = I.get(options, "cause");
                if (!cause.isUndefined()) I.set(e, "cause", cause);
            }
            return e;
        }, true);
        ctor->props.set(I.names.prototype, Value::object(proto));
        proto->props.set(I.names.constructor, Value::object(ctor));
        proto->props.set(I.names.name, I.string(k.name));
        proto->props.set(I.names.message, I.string(""));
        if (base) ctor->proto = base;
        else base = ctor;
        g->declare(I.atom(k.name), Value::object(ctor), false, true);
    }
    method(I, in.errorProto, "toString", 0, [](Interpreter& I, Value self, Args) {
        if (!self.isObject()) I.throwError(ErrorType::TypeError, "Error.prototype.toString called on non-object");
        Value n = I.getProperty(self, I.names.name);
        Value m = I.getProperty(self, I.names.message);
        std::string name = n.isUndefined() ? "Error" : I.toString(n);
        std::string msg = m.isUndefined() ? "" : I.toString(m);
        if (name.empty()) return I.string(msg);
        if (msg.empty()) return I.string(name);
        return I.string(name + ": " + msg);
    });
}

void installCollections(Interpreter& I, Env* g) {
    for (ObjectKind kind : {ObjectKind::Map, ObjectKind::Set}) {
        bool isMap = kind == ObjectKind::Map;
        Object* proto = isMap ? I.intrinsics().mapProto : I.intrinsics().setProto;
        const char* name = isMap ? "Map" : "Set";
        NativeObject* ctor = I.newFunction(name, 0, [kind, proto, isMap](Interpreter& I, Value, Args args) {
            if (!I.currentNewTarget()) {
                I.throwError(ErrorType::TypeError, std::string("Constructor ") + (isMap ? "Map" : "Set") + " requires 'new'");
            }
            auto* c = I.heap().make<CollectionObject>(kind, I.prototypeFor(I.currentNewTarget(), proto));
            Value init = arg(args, 0);
            if (!init.isNullish()) {
                for (Value item : I.iterableToVector(init)) {
                    I.heap().charge(KeyedStore::entryFootprint(item));
                    if (isMap) {
                        if (!item.isObject()) I.throwError(ErrorType::TypeError, "Iterator value is not an entry object");
                        c->store.set(I.getComputed(item, Value::number(0)), I.getComputed(item, Value::number(1)));
                    } else {
                        c->store.set(item, item);
                    }
                }
            }
            return Value::object(c);
        }, true);
        ctor->props.set(I.names.prototype, Value::object(proto));
        proto->props.set(I.names.constructor, Value::object(ctor));
        g->declare(I.atom(name), Value::object(ctor), false, true);

        method(I, proto, "has", 1, [kind](Interpreter& I, Value self, Args args) {
            return Value::boolean(thisCollection(I, self, kind, "has")->store.find(arg(args, 0)) != nullptr);
        });
        method(I, proto, "delete", 1, [kind](Interpreter& I, Value self, Args args) {
            return Value::boolean(thisCollection(I, self, kind, "delete")->store.erase(arg(args, 0)));
        });
        method(I, proto, "clear", 0, [kind](Interpreter& I, Value self, Args) {
            thisCollection(I, self, kind, "clear")->store.clear();
            return Value();
        });
        method(I, proto, "forEach", 1, [kind, isMap](Interpreter& I, Value self, Args args) {
            CollectionObject* c = thisCollection(I, self, kind, "forEach");
            Value fn = requireCallable(I, arg(args, 0), "forEach");
            for (std::size_t i = 0; i < c->store.entries().size(); ++i) {
                if (!c->store.alive()[i]) continue;
                auto [key, value] = c->store.entries()[i];
                Value callArgs[3] = {isMap ? value : key, key, self};
                I.callValue(fn, arg(args, 1), callArgs);
            }
            return Value();
        });
        auto listing = [kind](int which) {
            return [kind, which](Interpreter& I, Value self, Args) {
                CollectionObject* c = thisCollection(I, self, kind, "iterator");
                std::vector<Value> out;
                for (std::size_t i = 0; i < c->store.entries().size(); ++i) {
                    if (!c->store.alive()[i]) continue;
                    const auto& [key, value] = c->store.entries()[i];
                    if (which == 0) out.push_back(key);
                    else if (which == 1) out.push_back(kind == ObjectKind::Map ? value : key);
                    else out.push_back(Value::object(I.newArray(std::vector<Value>{key, kind == ObjectKind::Map ? value : key})));
                }
                return Value::object(I.newArray(std::move(out)));
            };
        };
        method(I, proto, "keys", 0, listing(0));
        method(I, proto, "values", 0, listing(1));
        method(I, proto, "entries", 0, listing(2));
        if (isMap) {
            method(I, proto, "get", 1, [](Interpreter& I, Value self, Args args) {
                Value* v = thisCollection(I, self, ObjectKind::Map, "get")->store.find(arg(args, 0));
                return v ? *v : Value();
            });
            method(I, proto, "set", 2, [](Interpreter& I, Value self, Args args) {
                CollectionObject* c = thisCollection(I, self, ObjectKind::Map, "set");
                std::size_t before = c->store.size();
                c->store.set(arg(args, 0), arg(args, 1));
                if (c->store.size() != before) I.heap().charge(KeyedStore::entryFootprint(arg(args, 0)));
                return self;
            });
        } else {
            method(I, proto, "add", 1, [](Interpreter& I, Value self, Args args) {
                CollectionObject* c = thisCollection(I, self, ObjectKind::Set, "add");
                std::size_t before = c->store.size();
                c->store.set(arg(args, 0), arg(args, 0));
                if (c->store.size() != before) I.heap().charge(KeyedStore::entryFootprint(arg(args, 0)));
                return self;
            });
        }
    }
}

void installJsonAndConsole(Interpreter& I, Env* g) {
    Object* json = I.newObject();
    g->declare(I.atom("JSON"), Value::object(json), false, true);
    method(I, json, "stringify", 3, [](Interpreter& I, Value, Args args) {
        Value space = arg(args, 2);
        std::string gap;
        if (space.isNumber()) gap.assign(static_cast<std::size_t>(std::clamp(toIntegerOrInfinity(I, space), 0.0, 10.0)), ' ');
        else if (space.isString()) gap = space.asString()->text.substr(0, 10);
        JsonWriter writer(I, arg(args, 1), gap);
        Object* holder = I.newObject();
        I.setProperty(Value::object(holder), I.atom(""), arg(args, 0));
        std::string out;
        if (!writer.write(Value::object(holder), I.string(""), arg(args, 0), "", out)) return Value();
        I.heap().charge(out.size());
        return I.string(out);
    });
    method(I, json, "parse", 2, [](Interpreter& I, Value, Args args) {
        std::string text = I.toString(arg(args, 0));
        I.tick(text.size() / 16);
        nlohmann::ordered_json parsed;
        try {
            parsed = nlohmann::ordered_json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            I.throwError(ErrorType::SyntaxError, std::string("Unexpected token in JSON: ") + e.what());
        }
        return fromJson(I, parsed, 0);
    });

    Object* console = I.newObject();
    g->declare(I.atom("console"), Value::object(console), false, true);
    for (const char* level : {"log", "info", "warn", "error", "debug"}) {
        std::string prefix = std::string(level) == "warn" || std::string(level) == "error" ? std::string("[") + level + "] " : "";
        method(I, console, level, 0, [prefix](Interpreter& I, Value, Args args) {
            std::string line = prefix;
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (i) line += ' ';
                std::vector<Object*> seen;
                line += inspect(I, args[i], 0, seen, true);
            }
            I.appendConsole(std::move(line));
            return Value();
        });
    }
}

} // namespace

void installBuiltins(Interpreter& I) {
    Heap& heap = I.heap();
    Intrinsics& in = I.intrinsics_;
    in.objectProto = heap.make<Object>(ObjectKind::Plain, nullptr);
    in.functionProto = heap.make<NativeObject>(in.objectProto, "", [](Interpreter&, Value, Args) { return Value(); }, false);
    in.arrayProto = heap.make<Object>(ObjectKind::Plain, in.objectProto);
    in.stringProto = heap.make<Object>(ObjectKind::Plain, in.objectProto);
    in.numberProto = heap.make<Object>(ObjectKind::Plain, in.objectProto);
    in.booleanProto = heap.make<Object>(ObjectKind::Plain, in.objectProto);
    in.errorProto = heap.make<Object>(ObjectKind::Plain, in.objectProto);
    in.typeErrorProto = heap.make<Object>(ObjectKind::Plain, in.errorProto);
    in.rangeErrorProto = heap.make<Object>(ObjectKind::Plain, in.errorProto);
    in.referenceErrorProto = heap.make<Object>(ObjectKind::Plain, in.errorProto);
    in.syntaxErrorProto = heap.make<Object>(ObjectKind::Plain, in.errorProto);
    in.mapProto = heap.make<Object>(ObjectKind::Plain, in.objectProto);
    in.setProto = heap.make<Object>(ObjectKind::Plain, in.objectProto);

    Env* g = I.builtins_;
    installObject(I, g);
    installFunction(I, g);
    installArray(I, g);
    installString(I, g);
    installNumber(I, g);
    installMath(I, g);
    installErrors(I, g);
    installCollections(I, g);
    installJsonAndConsole(I, g);
}

} // namespace pinauthor::script
