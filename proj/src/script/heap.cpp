#include "pinauthor/script/heap.hpp"

#include <bit>
#include <cmath>
#include <functional>

namespace pinauthor::script {

void Tracer::mark(const Value& v) {
    if (v.isString()) mark(v.asString());
    else if (v.isObject()) mark(v.asObject());
}

Value* PropertyMap::find(Atom key) {
    if (index_) {
        auto it = index_->find(key);
        return it == index_->end() ? nullptr : &slots_[it->second].second;
    }
    for (auto& slot : slots_) {
        if (slot.first == key) return &slot.second;
    }
    return nullptr;
}

const Value* PropertyMap::find(Atom key) const {
    return const_cast<PropertyMap*>(this)->find(key);
}

void PropertyMap::set(Atom key, Value value) {
    if (Value* existing = find(key)) {
        *existing = value;
        return;
    }
    slots_.emplace_back(key, value);
    if (index_) index_->emplace(key, static_cast<std::uint32_t>(slots_.size() - 1));
    else if (slots_.size() > 16) rebuildIndex();
}

bool PropertyMap::erase(Atom key) {
    for (auto it = slots_.begin(); it != slots_.end(); ++it) {
        if (it->first == key) {
            slots_.erase(it);
            if (index_) rebuildIndex();
            return true;
        }
    }
    return false;
}

void PropertyMap::rebuildIndex() {
    index_ = std::make_unique<std::unordered_map<Atom, std::uint32_t>>();
    for (std::uint32_t i = 0; i < slots_.size(); ++i) index_->emplace(slots_[i].first, i);
}

void PropertyMap::trace(Tracer& tracer) const {
    for (const auto& slot : slots_) tracer.mark(slot.second);
}

void Object::trace(Tracer& tracer) {
    tracer.mark(proto);
    props.trace(tracer);
}

void ArrayObject::trace(Tracer& tracer) {
    Object::trace(tracer);
    for (const auto& v : elements) tracer.mark(v);
}

Env::Binding* Env::find(Atom name) {
    if (index_) {
        auto it = index_->find(name);
        return it == index_->end() ? nullptr : &bindings[it->second];
    }
    for (auto& binding : bindings) {
        if (binding.name == name) return &binding;
    }
    return nullptr;
}

Env::Binding& Env::declare(Atom name, Value value, bool isMutable, bool initialized) {
    if (Binding* existing = find(name)) {
        existing->value = value;
        existing->isMutable = isMutable;
        existing->initialized = initialized;
        return *existing;
    }
    bindings.push_back({name, value, isMutable, initialized});
    if (index_) {
        index_->emplace(name, static_cast<std::uint32_t>(bindings.size() - 1));
    } else if (bindings.size() > 12) {
        index_ = std::make_unique<std::unordered_map<Atom, std::uint32_t>>();
        for (std::uint32_t i = 0; i < bindings.size(); ++i) index_->emplace(bindings[i].name, i);
    }
    return bindings.back();
}

void Env::trace(Tracer& tracer) {
    tracer.mark(parent);
    for (const auto& binding : bindings) tracer.mark(binding.value);
}

void ClosureObject::trace(Tracer& tracer) {
    Object::trace(tracer);
    tracer.mark(scope);
    tracer.mark(homeObject);
}

void BoundObject::trace(Tracer& tracer) {
    Object::trace(tracer);
    tracer.mark(target);
    tracer.mark(boundThis);
    for (const auto& v : boundArgs) tracer.mark(v);
}

std::size_t KeyedStore::KeyHash::operator()(const Key& k) const {
    std::size_t h = std::hash<std::uint64_t>{}(k.bits) ^ (static_cast<std::size_t>(k.type) << 1);
    if (k.type == Type::String) h ^= std::hash<std::string>{}(k.text);
    return h;
}

KeyedStore::Key KeyedStore::keyOf(const Value& v) {
    Key key{v.type(), 0, {}};
    switch (v.type()) {
    case Type::Boolean: key.bits = v.asBoolean() ? 1 : 0; break;
    case Type::Number: {
        double n = v.asNumber();
        if (n == 0.0) n = 0.0; // -0 and +0 are the same key
        if (std::isnan(n)) n = std::nan("");
        key.bits = std::bit_cast<std::uint64_t>(n);
        break;
    }
    case Type::String: key.text = v.asString()->text; break;
    case Type::Object: key.bits = reinterpret_cast<std::uintptr_t>(v.asObject()); break;
    default: break;
    }
    return key;
}

std::size_t KeyedStore::entryFootprint(const Value& key) {
    std::size_t bytes = sizeof(std::pair<Value, Value>) + sizeof(Key) + 4 * sizeof(void*);
    if (key.type() == Type::String) bytes += key.asString()->text.size();
    return bytes;
}

Value* KeyedStore::find(const Value& key) {
    auto it = index_.find(keyOf(key));
    return it == index_.end() ? nullptr : &entries_[it->second].second;
}

void KeyedStore::set(const Value& key, Value value) {
    auto k = keyOf(key);
    auto it = index_.find(k);
    if (it != index_.end()) {
        entries_[it->second].second = value;
        return;
    }
    entries_.emplace_back(key, value);
    alive_.push_back(true);
    index_.emplace(std::move(k), entries_.size() - 1);
    ++live_;
}

bool KeyedStore::erase(const Value& key) {
    auto it = index_.find(keyOf(key));
    if (it == index_.end()) return false;
    alive_[it->second] = false;
    entries_[it->second] = {Value(), Value()};
    index_.erase(it);
    --live_;
    return true;
}

void KeyedStore::clear() {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        alive_[i] = false;
        entries_[i] = {Value(), Value()};
    }
    index_.clear();
    live_ = 0;
}

void KeyedStore::trace(Tracer& tracer) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!alive_[i]) continue;
        tracer.mark(entries_[i].first);
        tracer.mark(entries_[i].second);
    }
}

void CollectionObject::trace(Tracer& tracer) {
    Object::trace(tracer);
    store.trace(tracer);
}

Atom AtomTable::intern(std::string_view text) {
    auto it = lookup_.find(std::string(text));
    if (it != lookup_.end()) return it->second;
    auto atom = static_cast<Atom>(names_.size());
    names_.emplace_back(text);
    lookup_.emplace(names_.back(), atom);
    return atom;
}

Heap::~Heap() {
    for (Cell* cell : cells_) delete cell;
}

void Heap::charge(std::size_t bytes) {
    runBytes_ += bytes;
    liveBytes_ += bytes;
    sinceCollect_ += bytes;
    if (runBytes_ > limits_.maxBytesPerRun) {
        throw BudgetExceeded(BudgetExceeded::Kind::Memory,
                             "allocation budget exceeded (" + std::to_string(runBytes_) + " bytes)");
    }
    if (liveBytes_ > limits_.maxLiveBytes) {
        throw BudgetExceeded(BudgetExceeded::Kind::Memory, "live heap limit exceeded");
    }
}

void Heap::collect(Tracer& roots) {
    while (!roots.pending.empty()) {
        Cell* cell = roots.pending.back();
        roots.pending.pop_back();
        cell->trace(roots);
    }
    std::size_t live = 0;
    std::size_t kept = 0;
    for (Cell* cell : cells_) {
        if (cell->marked) {
            cell->marked = false;
            live += cell->footprint();
            cells_[kept++] = cell;
        } else {
            delete cell;
        }
    }
    cells_.resize(kept);
    liveBytes_ = live;
    sinceCollect_ = 0;
}

} // namespace pinauthor::script
