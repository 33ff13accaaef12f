#pragma once

#include "pinauthor/script/value.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pinauthor::script {

enum class NodeKind : std::uint8_t {
    // expressions
    Number,
    String,
    Template,
    Boolean,
    Null,
    Identifier,
    This,
    Super,
    Array,
    Object,
    Function,
    Class,
    Unary,
    Update,
    Binary,
    Logical,
    Assign,
    Conditional,
    Call,
    New,
    Member,
    OptionalChain,
    Sequence,
    Spread,
    // binding patterns
    ObjectPattern,
    ArrayPattern,
    AssignPattern,
    Rest,
    // statements
    VarDecl,
    FunctionDecl,
    ClassDecl,
    Return,
    If,
    For,
    ForIn,
    ForOf,
    While,
    DoWhile,
    Break,
    Continue,
    Throw,
    Try,
    Switch,
    Block,
    ExprStmt,
    Empty,
};

struct Node {
    explicit Node(NodeKind k, std::uint32_t l) : kind(k), line(l) {}
    virtual ~Node() = default;
    NodeKind kind;
    std::uint32_t line;
};

using NodePtr = std::unique_ptr<Node>;

template <class T>
const T& as(const Node& node) {
    return static_cast<const T&>(node);
}

struct NumberNode final : Node {
    NumberNode(std::uint32_t l, double v) : Node(NodeKind::Number, l), value(v) {}
    double value;
};

struct StringNode final : Node {
    StringNode(std::uint32_t l, std::string v) : Node(NodeKind::String, l), value(std::move(v)) {}
    std::string value;
    Atom atom = 0; // interned form, used when the string is a property key
};

struct TemplateNode final : Node {
    explicit TemplateNode(std::uint32_t l) : Node(NodeKind::Template, l) {}
    std::vector<std::string> quasis; // quasis.size() == expressions.size() + 1
    std::vector<NodePtr> expressions;
};

struct BooleanNode final : Node {
    BooleanNode(std::uint32_t l, bool v) : Node(NodeKind::Boolean, l), value(v) {}
    bool value;
};

struct IdentifierNode final : Node {
    IdentifierNode(std::uint32_t l, Atom n) : Node(NodeKind::Identifier, l), name(n) {}
    Atom name;
};

struct ArrayNode final : Node {
    explicit ArrayNode(std::uint32_t l) : Node(NodeKind::Array, l) {}
    std::vector<NodePtr> elements; // null entries are holes
};

struct PropertyNode {
    enum class Kind { Init, Spread };
    Kind kind = Kind::Init;
    Atom key = 0;
    NodePtr computedKey; // set for [expr]: value
    NodePtr value;
    bool shorthand = false;
};

struct ObjectNode final : Node {
    explicit ObjectNode(std::uint32_t l) : Node(NodeKind::Object, l) {}
    std::vector<PropertyNode> properties;
};

struct BlockNode;

struct LexicalDecl {
    Atom name;
    bool isConst;
};

struct FunctionNode final : Node {
    explicit FunctionNode(std::uint32_t l) : Node(NodeKind::Function, l) {}
    std::optional<Atom> name;
    std::vector<NodePtr> params; // patterns; a trailing Rest node collects the tail
    NodePtr body;                // BlockNode, or an expression for concise arrows
    bool isArrow = false;
    bool expressionBody = false;
    bool usesArguments = false;
    bool simpleParams = true; // all params are plain identifiers
    std::vector<Atom> varNames; // hoisted `var` names (excluding params)
    bool capturesScope = true;  // false when no closure can observe the activation
};

struct MethodNode {
    Atom key = 0;
    NodePtr computedKey;
    std::unique_ptr<FunctionNode> fn;
    bool isStatic = false;
};

struct FieldNode {
    Atom key = 0;
    NodePtr value; // may be null
    bool isStatic = false;
};

struct ClassNode final : Node {
    explicit ClassNode(std::uint32_t l) : Node(NodeKind::Class, l) {}
    std::optional<Atom> name;
    NodePtr superClass;
    std::unique_ptr<FunctionNode> constructor; // may be null
    std::vector<MethodNode> methods;
    std::vector<FieldNode> fields;
};

enum class UnaryOp : std::uint8_t { Minus, Plus, Not, BitNot, Typeof, Void, Delete };

struct UnaryNode final : Node {
    UnaryNode(std::uint32_t l, UnaryOp o, NodePtr a)
        : Node(NodeKind::Unary, l), op(o), argument(std::move(a)) {}
    UnaryOp op;
    NodePtr argument;
};

struct UpdateNode final : Node {
    UpdateNode(std::uint32_t l, bool inc, bool pre, NodePtr a)
        : Node(NodeKind::Update, l), increment(inc), prefix(pre), argument(std::move(a)) {}
    bool increment;
    bool prefix;
    NodePtr argument;
};

enum class BinaryOp : std::uint8_t {
    Add, Sub, Mul, Div, Mod, Exp,
    Eq, NotEq, StrictEq, StrictNotEq,
    Lt, Gt, LtEq, GtEq,
    BitAnd, BitOr, BitXor, Shl, Shr, UShr,
    In, InstanceOf,
};

struct BinaryNode final : Node {
    BinaryNode(std::uint32_t l, BinaryOp o, NodePtr a, NodePtr b)
        : Node(NodeKind::Binary, l), op(o), left(std::move(a)), right(std::move(b)) {}
    BinaryOp op;
    NodePtr left;
    NodePtr right;
};

enum class LogicalOp : std::uint8_t { And, Or, Nullish };

struct LogicalNode final : Node {
    LogicalNode(std::uint32_t l, LogicalOp o, NodePtr a, NodePtr b)
        : Node(NodeKind::Logical, l), op(o), left(std::move(a)), right(std::move(b)) {}
    LogicalOp op;
    NodePtr left;
    NodePtr right;
};

struct AssignNode final : Node {
    AssignNode(std::uint32_t l, NodePtr t, NodePtr v)
        : Node(NodeKind::Assign, l), target(std::move(t)), value(std::move(v)) {}
    // Compound assignment: `op` set when arithmetic; `logical` for &&= ||= ??=.
    std::optional<BinaryOp> op;
    std::optional<LogicalOp> logical;
    NodePtr target;
    NodePtr value;
};

struct ConditionalNode final : Node {
    ConditionalNode(std::uint32_t l, NodePtr t, NodePtr c, NodePtr a)
        : Node(NodeKind::Conditional, l), test(std::move(t)), consequent(std::move(c)),
          alternate(std::move(a)) {}
    NodePtr test;
    NodePtr consequent;
    NodePtr alternate;
};

struct CallNode final : Node {
    CallNode(std::uint32_t l, NodePtr c) : Node(NodeKind::Call, l), callee(std::move(c)) {}
    NodePtr callee;
    std::vector<NodePtr> arguments;
    bool optional = false; // f?.()
};

struct NewNode final : Node {
    NewNode(std::uint32_t l, NodePtr c) : Node(NodeKind::New, l), callee(std::move(c)) {}
    NodePtr callee;
    std::vector<NodePtr> arguments;
};

struct MemberNode final : Node {
    MemberNode(std::uint32_t l, NodePtr o) : Node(NodeKind::Member, l), object(std::move(o)) {}
    NodePtr object;
    Atom property = 0;
    NodePtr computed; // set for obj[expr]
    bool optional = false;
};

struct OptionalChainNode final : Node {
    OptionalChainNode(std::uint32_t l, NodePtr e)
        : Node(NodeKind::OptionalChain, l), expression(std::move(e)) {}
    NodePtr expression;
};

struct SequenceNode final : Node {
    explicit SequenceNode(std::uint32_t l) : Node(NodeKind::Sequence, l) {}
    std::vector<NodePtr> expressions;
};

struct SpreadNode final : Node {
    SpreadNode(std::uint32_t l, NodePtr a) : Node(NodeKind::Spread, l), argument(std::move(a)) {}
    NodePtr argument;
};

struct PatternProperty {
    Atom key = 0;
    NodePtr computedKey;
    NodePtr value; // target pattern (possibly AssignPattern)
};

struct ObjectPatternNode final : Node {
    explicit ObjectPatternNode(std::uint32_t l) : Node(NodeKind::ObjectPattern, l) {}
    std::vector<PatternProperty> properties;
    NodePtr rest;
};

struct ArrayPatternNode final : Node {
    explicit ArrayPatternNode(std::uint32_t l) : Node(NodeKind::ArrayPattern, l) {}
    std::vector<NodePtr> elements; // null entries skip
    NodePtr rest;
};

struct AssignPatternNode final : Node {
    AssignPatternNode(std::uint32_t l, NodePtr t, NodePtr d)
        : Node(NodeKind::AssignPattern, l), target(std::move(t)), fallback(std::move(d)) {}
    NodePtr target;
    NodePtr fallback;
};

struct RestNode final : Node {
    RestNode(std::uint32_t l, NodePtr t) : Node(NodeKind::Rest, l), target(std::move(t)) {}
    NodePtr target;
};

enum class DeclKind : std::uint8_t { Var, Let, Const };

struct Declarator {
    NodePtr target;
    NodePtr init;
};

struct VarDeclNode final : Node {
    VarDeclNode(std::uint32_t l, DeclKind k) : Node(NodeKind::VarDecl, l), declKind(k) {}
    DeclKind declKind;
    std::vector<Declarator> declarations;
};

struct FunctionDeclNode final : Node {
    FunctionDeclNode(std::uint32_t l, std::unique_ptr<FunctionNode> f)
        : Node(NodeKind::FunctionDecl, l), fn(std::move(f)) {}
    std::unique_ptr<FunctionNode> fn;
};

struct ClassDeclNode final : Node {
    ClassDeclNode(std::uint32_t l, std::unique_ptr<ClassNode> c)
        : Node(NodeKind::ClassDecl, l), cls(std::move(c)) {}
    std::unique_ptr<ClassNode> cls;
};

struct ReturnNode final : Node {
    ReturnNode(std::uint32_t l, NodePtr a) : Node(NodeKind::Return, l), argument(std::move(a)) {}
    NodePtr argument;
};

struct IfNode final : Node {
    explicit IfNode(std::uint32_t l) : Node(NodeKind::If, l) {}
    NodePtr test;
    NodePtr consequent;
    NodePtr alternate;
};

struct ForNode final : Node {
    explicit ForNode(std::uint32_t l) : Node(NodeKind::For, l) {}
    NodePtr init;
    NodePtr test;
    NodePtr update;
    NodePtr body;
    std::vector<Atom> perIterationNames; // `let` loop variables copied per iteration
    bool capturesScope = true;
};

// for-in and for-of share a layout.
struct ForEachNode final : Node {
    ForEachNode(NodeKind k, std::uint32_t l) : Node(k, l) {}
    std::optional<DeclKind> declKind; // nullopt: assigns to an existing target
    NodePtr target;
    NodePtr iterable;
    NodePtr body;
    bool capturesScope = true;
};

struct WhileNode final : Node {
    WhileNode(NodeKind k, std::uint32_t l) : Node(k, l) {}
    NodePtr test;
    NodePtr body;
};

// Nodes with no payload: null, this, super, break, continue.
struct LeafNode final : Node {
    LeafNode(NodeKind k, std::uint32_t l) : Node(k, l) {}
};

struct ThrowNode final : Node {
    ThrowNode(std::uint32_t l, NodePtr a) : Node(NodeKind::Throw, l), argument(std::move(a)) {}
    NodePtr argument;
};

struct TryNode final : Node {
    explicit TryNode(std::uint32_t l) : Node(NodeKind::Try, l) {}
    NodePtr block;
    NodePtr param; // may be null (catch without binding)
    NodePtr handler;
    NodePtr finalizer;
    bool capturesScope = true; // for the catch parameter scope
};

struct SwitchCase {
    NodePtr test; // null for default
    std::vector<NodePtr> body;
};

struct SwitchNode final : Node {
    explicit SwitchNode(std::uint32_t l) : Node(NodeKind::Switch, l) {}
    NodePtr discriminant;
    std::vector<SwitchCase> cases;
    std::vector<LexicalDecl> lexicals;
    std::vector<const FunctionNode*> functions;
    bool capturesScope = true;
};

struct BlockNode final : Node {
    explicit BlockNode(std::uint32_t l) : Node(NodeKind::Block, l) {}
    std::vector<NodePtr> body;
    // Hoisted at block entry.
    std::vector<LexicalDecl> lexicals;
    std::vector<const FunctionNode*> functions;
    bool needsScope() const { return !lexicals.empty() || !functions.empty(); }
    bool capturesScope = true;
};

struct ExprStmtNode final : Node {
    ExprStmtNode(std::uint32_t l, NodePtr e) : Node(NodeKind::ExprStmt, l), expression(std::move(e)) {}
    NodePtr expression;
};

struct EmptyNode final : Node {
    explicit EmptyNode(std::uint32_t l) : Node(NodeKind::Empty, l) {}
};

// Appends every identifier bound by a binding pattern.
void collectBoundNames(const Node* pattern, std::vector<Atom>& out);

// A parsed script. The top-level block's `var` names live on `topVarNames`.
struct Program {
    std::unique_ptr<BlockNode> body;
    std::vector<Atom> topVarNames;
};

} // namespace pinauthor::script
