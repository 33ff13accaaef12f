#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pinauthor::script {

using Atom = std::uint32_t;

class Interpreter;
struct Tracer;

// Every heap-resident script entity. Cells are owned by the Heap and only
// reclaimed by an explicit collection between host calls.
struct Cell {
    virtual ~Cell() = default;
    virtual void trace(Tracer&) {}
    // Approximate bytes held, used for the live-heap limit.
    virtual std::size_t footprint() const { return sizeof(Cell); }
    bool marked = false;
};

struct StringCell final : Cell {
    explicit StringCell(std::string s) : text(std::move(s)) {}
    std::size_t footprint() const override { return sizeof(StringCell) + text.capacity(); }
    std::string text;
};

struct Object;

enum class Type : std::uint8_t { Undefined, Null, Boolean, Number, String, Object };

class Value {
public:
    constexpr Value() : type_(Type::Undefined), num_(0.0) {}

    static constexpr Value undefined() { return Value(); }
    static Value null() {
        Value v;
        v.type_ = Type::Null;
        return v;
    }
    static Value boolean(bool b) {
        Value v;
        v.type_ = Type::Boolean;
        v.bool_ = b;
        return v;
    }
    static Value number(double n) {
        Value v;
        v.type_ = Type::Number;
        v.num_ = n;
        return v;
    }
    static Value string(StringCell* s) {
        Value v;
        v.type_ = Type::String;
        v.str_ = s;
        return v;
    }
    static Value object(Object* o) {
        Value v;
        v.type_ = Type::Object;
        v.obj_ = o;
        return v;
    }

    Type type() const { return type_; }
    bool isUndefined() const { return type_ == Type::Undefined; }
    bool isNull() const { return type_ == Type::Null; }
    bool isNullish() const { return type_ == Type::Undefined || type_ == Type::Null; }
    bool isBoolean() const { return type_ == Type::Boolean; }
    bool isNumber() const { return type_ == Type::Number; }
    bool isString() const { return type_ == Type::String; }
    bool isObject() const { return type_ == Type::Object; }

    bool asBoolean() const { return bool_; }
    double asNumber() const { return num_; }
    StringCell* asString() const { return str_; }
    Object* asObject() const { return obj_; }

private:
    Type type_;
    union {
        bool bool_;
        double num_;
        StringCell* str_;
        Object* obj_;
    };
};

struct Tracer {
    std::vector<Cell*> pending;
    void mark(Cell* cell) {
        if (cell && !cell->marked) {
            cell->marked = true;
            pending.push_back(cell);
        }
    }
    void mark(const Value& v);
};

// Insertion-ordered property storage; an index is built lazily for large
// objects so lookups stay O(1).
class PropertyMap {
public:
    Value* find(Atom key);
    const Value* find(Atom key) const;
    void set(Atom key, Value value);
    bool erase(Atom key);
    std::size_t size() const { return slots_.size(); }
    const std::vector<std::pair<Atom, Value>>& slots() const { return slots_; }
    void trace(Tracer& tracer) const;

private:
    void rebuildIndex();

    std::vector<std::pair<Atom, Value>> slots_;
    std::unique_ptr<std::unordered_map<Atom, std::uint32_t>> index_;
};

enum class ObjectKind : std::uint8_t { Plain, Array, Closure, Native, Bound, Error, Map, Set };

struct Object : Cell {
    explicit Object(ObjectKind k, Object* p = nullptr) : kind(k), proto(p) {}
    void trace(Tracer& tracer) override;
    std::size_t footprint() const override {
        return sizeof(Object) + props.size() * sizeof(std::pair<Atom, Value>);
    }
    bool isCallable() const {
        return kind == ObjectKind::Closure || kind == ObjectKind::Native || kind == ObjectKind::Bound;
    }

    ObjectKind kind;
    Object* proto;
    PropertyMap props;
    bool frozen = false;
};

struct ArrayObject final : Object {
    explicit ArrayObject(Object* p) : Object(ObjectKind::Array, p) {}
    void trace(Tracer& tracer) override;
    std::size_t footprint() const override {
        return Object::footprint() + elements.capacity() * sizeof(Value);
    }
    std::vector<Value> elements;
};

struct Env final : Cell {
    struct Binding {
        Atom name;
        Value value;
        bool isMutable;
        bool initialized;
    };

    explicit Env(Env* p) : parent(p) {}
    void trace(Tracer& tracer) override;
    std::size_t footprint() const override {
        return sizeof(Env) + bindings.capacity() * sizeof(Binding);
    }

    Binding* find(Atom name);
    // Re-declaring an existing name in the same scope updates it in place.
    Binding& declare(Atom name, Value value, bool isMutable, bool initialized);
    // Reuse a dead scope for a new activation.
    void reset(Env* p) {
        bindings.clear();
        index_.reset();
        parent = p;
    }

    std::vector<Binding> bindings;
    Env* parent;

private:
    std::unique_ptr<std::unordered_map<Atom, std::uint32_t>> index_;
};

struct FunctionNode;
struct ClassNode;

struct ClosureObject final : Object {
    ClosureObject(Object* p, const FunctionNode* f, Env* s)
        : Object(ObjectKind::Closure, p), fn(f), scope(s) {}
    void trace(Tracer& tracer) override;

    const FunctionNode* fn;
    Env* scope;
    // Class constructors: the class body for field initialisers, and
    // whether the class extends another constructor.
    const ClassNode* classNode = nullptr;
    Object* homeObject = nullptr;
    bool isDerived = false;
};

using NativeFn = std::function<Value(Interpreter&, Value self, std::span<const Value> args)>;

struct NativeObject final : Object {
    NativeObject(Object* p, std::string n, NativeFn f, bool ctor)
        : Object(ObjectKind::Native, p), name(std::move(n)), fn(std::move(f)), constructible(ctor) {}
    std::string name;
    NativeFn fn;
    bool constructible;
};

struct BoundObject final : Object {
    BoundObject(Object* p, Value t, Value self, std::vector<Value> a)
        : Object(ObjectKind::Bound, p), target(t), boundThis(self), boundArgs(std::move(a)) {}
    void trace(Tracer& tracer) override;
    Value target;
    Value boundThis;
    std::vector<Value> boundArgs;
};

// SameValueZero-keyed collection used by both Map and Set.
class KeyedStore {
public:
    struct Key {
        Type type;
        std::uint64_t bits;
        std::string text;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };

    static Key keyOf(const Value& v);
    // Approximate bytes one new entry for `key` occupies.
    static std::size_t entryFootprint(const Value& key);
    Value* find(const Value& key);
    void set(const Value& key, Value value);
    bool erase(const Value& key);
    void clear();
    std::size_t size() const { return live_; }
    // Iteration skips erased slots; entries appended during iteration are
    // visited, matching insertion-order semantics.
    const std::vector<std::pair<Value, Value>>& entries() const { return entries_; }
    const std::vector<bool>& alive() const { return alive_; }
    void trace(Tracer& tracer) const;

private:
    std::vector<std::pair<Value, Value>> entries_;
    std::vector<bool> alive_;
    std::unordered_map<Key, std::size_t, KeyHash> index_;
    std::size_t live_ = 0;
};

struct CollectionObject final : Object {
    CollectionObject(ObjectKind k, Object* p) : Object(k, p) {}
    void trace(Tracer& tracer) override;
    std::size_t footprint() const override {
        return Object::footprint() + store.entries().capacity() * 2 * sizeof(Value);
    }
    KeyedStore store;
};

} // namespace pinauthor::script
