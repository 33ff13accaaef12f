#pragma once

#include "pinauthor/script/value.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pinauthor::script {

// Raised when a script exceeds its instruction, allocation or stack budget.
// Scripts cannot catch it.
class BudgetExceeded : public std::runtime_error {
public:
    enum class Kind { Instructions, Memory };
    BudgetExceeded(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
    Kind kind;
};

class AtomTable {
public:
    Atom intern(std::string_view text);
    const std::string& name(Atom atom) const { return names_[atom]; }
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Atom> lookup_;
};

class Heap {
public:
    struct Limits {
        std::size_t maxBytesPerRun = 8u << 20;
        std::size_t maxLiveBytes = 256u << 20;
    };

    Heap() = default;
    explicit Heap(Limits limits) : limits_(limits) {}
    Heap(const Heap&) = delete;
    Heap& operator=(const Heap&) = delete;
    ~Heap();

    template <class T, class... Args>
    T* make(Args&&... args) {
        charge(sizeof(T));
        auto* cell = new T(std::forward<Args>(args)...);
        cells_.push_back(cell);
        return cell;
    }

    StringCell* makeString(std::string text) {
        charge(text.size());
        return make<StringCell>(std::move(text));
    }

    // Account for `bytes` of growth; throws BudgetExceeded(Memory) when the
    // per-run or live limit would be crossed.
    void charge(std::size_t bytes);
    void beginRun() { runBytes_ = 0; }
    std::size_t runBytes() const { return runBytes_; }
    std::size_t liveBytes() const { return liveBytes_; }
    std::size_t cellCount() const { return cells_.size(); }
    std::size_t bytesSinceCollect() const { return sinceCollect_; }

    // Mark from the roots the tracer already holds, then sweep.
    void collect(Tracer& roots);

    AtomTable& atoms() { return atoms_; }
    const AtomTable& atoms() const { return atoms_; }

private:
    Limits limits_;
    std::vector<Cell*> cells_;
    std::size_t runBytes_ = 0;
    std::size_t liveBytes_ = 0;
    std::size_t sinceCollect_ = 0;
    AtomTable atoms_;
};

} // namespace pinauthor::script
