#pragma once

#include "pinauthor/script/ast.hpp"
#include "pinauthor/script/heap.hpp"
#include "pinauthor/script/parser.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pinauthor::script {

// A script `throw` unwinding through C++ frames. Only script try/catch and
// the host entry points intercept it.
struct ThrowSignal {
    Value value;
};

// An exception that escaped the script, as reported to the host.
class ScriptError : public std::runtime_error {
public:
    ScriptError(std::string errorName, std::string errorMessage, std::uint32_t errorLine)
        : std::runtime_error(errorName + ": " + errorMessage +
                             (errorLine ? " (line " + std::to_string(errorLine) + ")" : "")),
          name(std::move(errorName)), message(std::move(errorMessage)), line(errorLine) {}
    std::string name;
    std::string message;
    std::uint32_t line;
};

enum class ErrorType { Error, TypeError, RangeError, ReferenceError, SyntaxError };

struct RealmOptions {
    Heap::Limits heap;
    std::uint64_t instructionLimit = 5'000'000;
    int maxCallDepth = 256;
    std::uint64_t randomSeed = 0x5eed;
    std::size_t maxConsoleLines = 1000;
};

struct Intrinsics {
    Object* objectProto = nullptr;
    Object* functionProto = nullptr;
    Object* arrayProto = nullptr;
    Object* stringProto = nullptr;
    Object* numberProto = nullptr;
    Object* booleanProto = nullptr;
    Object* errorProto = nullptr;
    Object* typeErrorProto = nullptr;
    Object* rangeErrorProto = nullptr;
    Object* referenceErrorProto = nullptr;
    Object* syntaxErrorProto = nullptr;
    Object* mapProto = nullptr;
    Object* setProto = nullptr;
};

// One realm: a heap, the builtin library and any number of script scopes.
// Not thread-safe; callers serialize access.
class Interpreter {
public:
    explicit Interpreter(RealmOptions options = {});
    ~Interpreter();
    Interpreter(const Interpreter&) = delete;
    Interpreter& operator=(const Interpreter&) = delete;

    // Parses and retains a program for the lifetime of the realm.
    const Program& parse(std::string_view source);

    // A fresh top-level scope whose parent is the builtin scope.
    Env* newGlobalScope();
    void releaseScope(Env* scope);

    // Executes top-level code. Uncaught script exceptions become ScriptError;
    // BudgetExceeded propagates unchanged.
    void run(const Program& program, Env* scope);

    // Host-side call; same error translation as run().
    Value call(Value fn, Value self, std::span<const Value> args);

    Value lookup(Env* scope, std::string_view name);
    void define(Env* scope, std::string_view name, Value value, bool isMutable = true);
    void defineGlobal(std::string_view name, Value value);

    // Budgets -------------------------------------------------------------
    void beginFrame();
    void setInstructionLimit(std::uint64_t limit) { instructionLimit_ = limit; }
    std::uint64_t instructionLimit() const { return instructionLimit_; }
    std::uint64_t instructionsUsed() const { return instructions_; }
    void noteUnwoundFrame() { ++unwoundFrames_; }
    void tick(std::uint64_t n = 1) {
        instructions_ += n;
        if (instructions_ > instructionLimit_) instructionBudgetExceeded();
    }

    // Values --------------------------------------------------------------
    Atom atom(std::string_view text);
    const std::string& atomName(Atom a) const { return heap_.atoms().name(a); }
    Value string(std::string_view text);
    Value atomString(Atom a);
    Object* newObject();
    Object* newObject(Object* proto);
    ArrayObject* newArray(std::size_t size = 0);
    ArrayObject* newArray(std::vector<Value> elements);
    NativeObject* newFunction(std::string name, int arity, NativeFn fn, bool constructible = false);
    void pushElement(ArrayObject* array, Value value);

    Value get(Value base, std::string_view key) { return getProperty(base, atom(key)); }
    void set(Value base, std::string_view key, Value value) { setProperty(base, atom(key), value); }
    Value getProperty(Value base, Atom key);
    void setProperty(Value base, Atom key, Value value);
    Value getComputed(Value base, Value key);
    void setComputed(Value base, Value key, Value value);
    bool hasProperty(Object* object, Atom key);
    Atom toPropertyKey(Value key);
    std::vector<Atom> ownKeys(Object* object);

    bool isCallable(Value v) const { return v.isObject() && v.asObject()->isCallable(); }
    bool isConstructor(Value v) const;
    // Script-level call: ThrowSignal propagates to the caller.
    Value callValue(Value fn, Value self, std::span<const Value> args);
    // Formal parameters including defaulted and rest ones; 0 for non-functions.
    int declaredParameterCount(Value fn);
    Value construct(Value ctor, std::span<const Value> args, Object* newTarget = nullptr);
    // For natives invoked via `new`, the constructor being instantiated.
    Object* currentNewTarget() const { return newTarget_; }
    Object* prototypeFor(Object* newTarget, Object* fallback);

    double toNumber(Value v);
    std::string toString(Value v);
    Value toStringValue(Value v);
    Value toPrimitive(Value v, bool preferString);
    bool truthy(Value v) const;
    std::string typeOf(Value v) const;
    bool strictEquals(Value a, Value b) const;
    bool looseEquals(Value a, Value b);
    static bool sameValueZero(Value a, Value b);
    std::vector<Value> iterableToVector(Value v);

    Value makeError(ErrorType type, const std::string& message);
    [[noreturn]] void throwError(ErrorType type, const std::string& message);
    std::string describe(Value v); // short rendering for diagnostics and console

    // Console output captured from console.* calls.
    const std::vector<std::string>& consoleLines() const { return console_; }
    void clearConsole() { console_.clear(); }
    void appendConsole(std::string line);

    double random();

    // Garbage collection; only call between host calls.
    void collectGarbage(std::span<const Value> extraRoots = {});
    void maybeCollect(std::span<const Value> extraRoots = {});

    Heap& heap() { return heap_; }
    const Intrinsics& intrinsics() const { return intrinsics_; }
    Env* builtinScope() const { return builtins_; }
    const RealmOptions& options() const { return options_; }

    enum class Flow : std::uint8_t { Normal, Return, Break, Continue };
    enum class BindKind : std::uint8_t { Assign, Var, Let, Const };

private:
    friend class ScopeGuard;
    friend void installBuiltins(Interpreter&);

    [[noreturn]] void instructionBudgetExceeded();
    ScriptError toScriptError(const ThrowSignal& signal);

    // evaluation
    Value eval(const Node& node, Env* env);
    Value evalTemplate(const TemplateNode& node, Env* env);
    Value evalArray(const ArrayNode& node, Env* env);
    Value evalObject(const ObjectNode& node, Env* env);
    Value evalClass(const ClassNode& node, Env* env);
    Value evalUnary(const UnaryNode& node, Env* env);
    Value evalUpdate(const UpdateNode& node, Env* env);
    Value evalAssign(const AssignNode& node, Env* env);
    Value evalCall(const CallNode& node, Env* env);
    Value evalNew(const NewNode& node, Env* env);
    Value evalMember(const MemberNode& node, Env* env);
    Value evalSuperCall(const CallNode& node, Env* env);
    Value binaryOp(BinaryOp op, Value a, Value b);
    Value logical(const LogicalNode& node, Env* env);
    void evalArguments(const std::vector<NodePtr>& nodes, Env* env, std::vector<Value>& out);

    Flow exec(const Node& node, Env* env);
    Flow execBlock(const BlockNode& block, Env* env);
    Flow execStatements(const std::vector<NodePtr>& body, Env* env);
    Flow execVarDecl(const VarDeclNode& node, Env* env);
    Flow execFor(const ForNode& node, Env* env);
    Flow execForOf(const ForEachNode& node, Env* env);
    Flow execForIn(const ForEachNode& node, Env* env);
    Flow execWhile(const WhileNode& node, Env* env);
    Flow execTry(const TryNode& node, Env* env);
    Flow execSwitch(const SwitchNode& node, Env* env);
    // Runs a loop body; true when the loop must stop with `flow`.
    bool loopBody(const Node& body, Env* env, Flow& flow);

    void hoist(const std::vector<LexicalDecl>& lexicals, const std::vector<const FunctionNode*>& functions,
               Env* env);
    void bindPattern(const Node& target, Value value, Env* env, BindKind kind);

    Env::Binding* findBinding(Atom name, Env* env);
    Value readBinding(Atom name, Env* env);
    void assignBinding(Atom name, Value value, Env* env);
    Value thisValue(Env* env);
    ClosureObject* currentFunction(Env* env);

    Env* acquireScope(Env* parent, bool captured);
    void recycleScope(Env* scope);

    ClosureObject* makeClosure(const FunctionNode* fn, Env* scope, Object* homeObject = nullptr);
    Value callFunction(Object* fn, Value self, std::span<const Value> args, Object* newTarget);
    Value callClosure(ClosureObject* closure, Value self, std::span<const Value> args, Object* newTarget);
    void bindParameters(const FunctionNode& fn, std::span<const Value> args, Env* env);
    void initializeFields(ClosureObject* ctor, Object* instance);
    Value functionName(Object* fn);
    int functionLength(Object* fn);

    Value getObjectProperty(Object* object, Atom key);
    Value getIndexed(Value base, double index, bool& handled);
    bool setIndexed(Value base, double index, Value value);
    void setArrayLength(ArrayObject* array, double length);
    void setArrayElement(ArrayObject* array, std::uint32_t index, Value value);
    std::optional<std::uint32_t> atomIndex(Atom a);
    std::string describeCallee(const Node& node);

    RealmOptions options_;
    Heap heap_;
    Intrinsics intrinsics_;
    Env* builtins_ = nullptr;
    std::vector<Env*> scopes_;
    std::vector<std::unique_ptr<Program>> programs_;
    std::vector<StringCell*> atomStrings_;
    std::vector<std::int64_t> atomIndexCache_;
    std::vector<Env*> freeScopes_;
    std::vector<std::string> console_;
    std::mt19937_64 rng_;

    std::uint64_t instructions_ = 0;
    std::uint64_t unwoundFrames_ = 0;
    std::uint64_t instructionLimit_;
    int callDepth_ = 0;
    Object* newTarget_ = nullptr;
    Value completion_;
    bool shortCircuit_ = false;
    std::uint32_t line_ = 0;

public:
    struct WellKnown {
        Atom length, prototype, constructor, name, message, thisAtom, funcAtom, newTargetAtom, arguments,
            lineNumber, toStringAtom, valueOf, size, stack;
    } names{};
};

// Installs the standard library into the builtin scope.
void installBuiltins(Interpreter& interp);

} // namespace pinauthor::script
