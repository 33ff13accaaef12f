#include "pinauthor/script/parser.hpp"

#include "pinauthor/script/conversions.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

namespace pinauthor::script {

namespace {

constexpr int kMaxNesting = 400;
constexpr int kMaxChain = 1000;

enum class Tok : std::uint8_t {
    End,
    Ident,
    Number,
    String,
    Punct,
    TemplateFull,   // `text` with no substitutions
    TemplateHead,   // `text${
    TemplateMiddle, // }text${
    TemplateTail,   // }text`
};

struct Token {
    Tok type = Tok::End;
    std::string text;
    double number = 0.0;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    bool newlineBefore = false;
};

constexpr std::array<std::string_view, 36> kPunctuators = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?" "?=", "=>",
    "==",   "!=",  "<=",  ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",  "+=",  "-=",
    "*=",   "/=",  "%=",  "&=",  "|=",  "^=",  "**",  "<<",  ">>",  "{",   "}",   "(",
};

constexpr std::string_view kSingleCharPunct = ")[];,<>+-*/%&|^!~?:=.";

void appendUtf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool isIdentStart(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || c == '$' || u >= 0x80;
}

bool isIdentPart(char c) {
    return isIdentStart(c) || std::isdigit(static_cast<unsigned char>(c));
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> tokenize() {
        std::vector<Token> tokens;
        while (true) {
            bool newline = skipTrivia();
            Token tok;
            tok.line = line_;
            tok.column = column();
            tok.newlineBefore = newline;
            if (pos_ >= src_.size()) {
                tok.type = Tok::End;
                tokens.push_back(std::move(tok));
                return tokens;
            }
            lexToken(tok);
            tokens.push_back(std::move(tok));
        }
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw SyntaxError(message, line_, column());
    }

    std::uint32_t column() const { return static_cast<std::uint32_t>(pos_ - lineStart_ + 1); }

    char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            lineStart_ = pos_ + 1;
        }
        ++pos_;
    }

    bool skipTrivia() {
        bool newline = false;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                newline = true;
                advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == '/' && peek(1) == '*') {
                advance();
                advance();
                while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) {
                    if (src_[pos_] == '\n') newline = true;
                    advance();
                }
                if (pos_ >= src_.size()) fail("unterminated comment");
                advance();
                advance();
            } else if (static_cast<unsigned char>(c) == 0xC2 &&
                       static_cast<unsigned char>(peek(1)) == 0xA0) {
                advance(); // NBSP
                advance();
            } else {
                break;
            }
        }
        return newline;
    }

    void lexToken(Token& tok) {
        char c = peek();
        if (isIdentStart(c)) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && isIdentPart(src_[pos_])) advance();
            tok.type = Tok::Ident;
            tok.text = std::string(src_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            lexNumber(tok);
            return;
        }
        if (c == '"' || c == '\'') {
            lexString(tok, c);
            return;
        }
        if (c == '`') {
            advance();
            lexTemplateChunk(tok, true);
            return;
        }
        if (c == '}' && !braces_.empty() && braces_.back()) {
            braces_.pop_back();
            advance();
            lexTemplateChunk(tok, false);
            return;
        }
        for (auto p : kPunctuators) {
            if (src_.substr(pos_, p.size()) == p) {
                if (p == "?." && std::isdigit(static_cast<unsigned char>(peek(2)))) break;
                tok.type = Tok::Punct;
                tok.text = std::string(p);
                for (std::size_t i = 0; i < p.size(); ++i) advance();
                if (p == "{") braces_.push_back(false);
                if (p == "}" && !braces_.empty()) braces_.pop_back();
                return;
            }
        }
        if (kSingleCharPunct.find(c) != std::string_view::npos) {
            tok.type = Tok::Punct;
            tok.text = std::string(1, c);
            advance();
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void lexNumber(Token& tok) {
        tok.type = Tok::Number;
        std::string digits;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' || peek(1) == 'O' ||
                              peek(1) == 'b' || peek(1) == 'B')) {
            char kind = static_cast<char>(std::tolower(static_cast<unsigned char>(peek(1))));
            int base = kind == 'x' ? 16 : kind == 'o' ? 8 : 2;
            advance();
            advance();
            while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_') {
                if (peek() != '_') digits += peek();
                advance();
            }
            if (digits.empty()) fail("malformed numeric literal");
            double value = 0.0;
            for (char d : digits) {
                int v = std::isdigit(static_cast<unsigned char>(d))
                            ? d - '0'
                            : std::tolower(static_cast<unsigned char>(d)) - 'a' + 10;
                if (v >= base) fail("digit out of range for numeric base");
                value = value * base + v;
            }
            tok.number = value;
        } else {
            auto takeDigits = [&] {
                while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') {
                    if (peek() != '_') digits += peek();
                    advance();
                }
            };
            takeDigits();
            if (peek() == '.') {
                digits += '.';
                advance();
                takeDigits();
            }
            if (peek() == 'e' || peek() == 'E') {
                digits += 'e';
                advance();
                if (peek() == '+' || peek() == '-') {
                    digits += peek();
                    advance();
                }
                if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("malformed exponent");
                takeDigits();
            }
            tok.number = std::strtod(digits.c_str(), nullptr);
        }
        if (peek() == 'n') fail("BigInt literals are not supported");
        if (isIdentStart(peek())) fail("identifier directly after number");
    }

    std::uint32_t readHex(int count) {
        std::uint32_t value = 0;
        for (int i = 0; i < count; ++i) {
            char h = peek();
            if (!std::isxdigit(static_cast<unsigned char>(h))) fail("invalid hexadecimal escape");
            value = value * 16 + static_cast<std::uint32_t>(
                                     std::isdigit(static_cast<unsigned char>(h))
                                         ? h - '0'
                                         : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
            advance();
        }
        return value;
    }

    // Consumes the character after a backslash and appends its cooked form.
    void readEscape(std::string& out) {
        char e = peek();
        advance();
        switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'v': out += '\v'; break;
        case '0': out += '\0'; break;
        case '\r':
            if (peek() == '\n') advance();
            break;
        case '\n': break;
        case 'x': appendUtf8(out, readHex(2)); break;
        case 'u': {
            std::uint32_t cp;
            if (peek() == '{') {
                advance();
                cp = 0;
                while (peek() != '}') {
                    cp = cp * 16 + readHex(1);
                    if (cp > 0x10FFFF) fail("code point out of range");
                }
                advance();
            } else {
                cp = readHex(4);
                if (cp >= 0xD800 && cp <= 0xDBFF && peek() == '\\' && peek(1) == 'u') {
                    advance();
                    advance();
                    std::uint32_t low = readHex(4);
                    cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
                }
            }
            appendUtf8(out, cp);
            break;
        }
        default: out += e; break;
        }
    }

    void lexString(Token& tok, char quote) {
        tok.type = Tok::String;
        advance();
        std::string out;
        while (true) {
            if (pos_ >= src_.size() || peek() == '\n') fail("unterminated string literal");
            char c = peek();
            if (c == quote) {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                readEscape(out);
            } else {
                out += c;
                advance();
            }
        }
        tok.text = std::move(out);
    }

    void lexTemplateChunk(Token& tok, bool head) {
        std::string out;
        while (true) {
            if (pos_ >= src_.size()) fail("unterminated template literal");
            char c = peek();
            if (c == '`') {
                advance();
                tok.type = head ? Tok::TemplateFull : Tok::TemplateTail;
                break;
            }
            if (c == '$' && peek(1) == '{') {
                advance();
                advance();
                braces_.push_back(true);
                tok.type = head ? Tok::TemplateHead : Tok::TemplateMiddle;
                break;
            }
            if (c == '\\') {
                advance();
                readEscape(out);
            } else {
                out += c;
                advance();
            }
        }
        tok.text = std::move(out);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::size_t lineStart_ = 0;
    std::vector<bool> braces_; // true entries are template substitutions
};

bool isReservedWord(std::string_view word) {
    static constexpr std::array<std::string_view, 36> kReserved = {
        "break",  "case",    "catch",  "class",  "const",      "continue", "debugger", "default",
        "delete", "do",      "else",   "export", "extends",    "finally",  "for",      "function",
        "if",     "import",  "in",     "instanceof", "new",    "return",   "super",    "switch",
        "this",   "throw",   "try",    "typeof", "var",        "void",     "while",    "with",
        "yield",  "true",    "false",  "null"};
    return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

class Parser {
public:
    Parser(std::vector<Token> tokens, AtomTable& atoms) : tokens_(std::move(tokens)), atoms_(atoms) {
        closer_.assign(tokens_.size(), 0);
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            const Token& t = tokens_[i];
            if (t.type != Tok::Punct) continue;
            if (t.text == "(" || t.text == "[" || t.text == "{") {
                open.push_back(i);
            } else if ((t.text == ")" || t.text == "]" || t.text == "}") && !open.empty()) {
                closer_[open.back()] = i;
                open.pop_back();
            }
        }
    }

    std::unique_ptr<Program> program() {
        auto prog = std::make_unique<Program>();
        prog->body = std::make_unique<BlockNode>(1);
        fnScopes_.push_back({});
        blockScopes_.push_back({&prog->body->lexicals, &prog->body->functions});
        while (cur().type != Tok::End) prog->body->body.push_back(statement());
        prog->topVarNames = std::move(fnScopes_.back().vars);
        return prog;
    }

private:
    struct FunctionScope {
        std::vector<Atom> vars;
        bool usesArguments = false;
        bool isArrow = false;
    };
    struct BlockScope {
        std::vector<LexicalDecl>* lexicals;
        std::vector<const FunctionNode*>* functions;
    };

    struct DepthGuard {
        explicit DepthGuard(Parser& p) : parser(p) {
            if (++parser.depth_ > kMaxNesting) parser.fail("nesting too deep");
        }
        ~DepthGuard() { --parser.depth_; }
        Parser& parser;
    };

    const Token& cur() const { return tokens_[pos_]; }
    const Token& ahead(std::size_t k) const {
        return tokens_[std::min(pos_ + k, tokens_.size() - 1)];
    }
    void next() {
        if (pos_ + 1 < tokens_.size()) ++pos_;
    }

    [[noreturn]] void fail(const std::string& message) const {
        const Token& t = cur();
        std::string near = t.type == Tok::End ? "end of input" : "'" + t.text + "'";
        throw SyntaxError(message + " near " + near, t.line, t.column);
    }

    bool isPunct(std::string_view p) const { return cur().type == Tok::Punct && cur().text == p; }
    bool isWord(std::string_view w) const { return cur().type == Tok::Ident && cur().text == w; }
    bool aheadPunct(std::size_t k, std::string_view p) const {
        return ahead(k).type == Tok::Punct && ahead(k).text == p;
    }

    bool eatPunct(std::string_view p) {
        if (!isPunct(p)) return false;
        next();
        return true;
    }
    bool eatWord(std::string_view w) {
        if (!isWord(w)) return false;
        next();
        return true;
    }
    void expectPunct(std::string_view p) {
        if (!eatPunct(p)) fail("expected '" + std::string(p) + "'");
    }
    void expectWord(std::string_view w) {
        if (!eatWord(w)) fail("expected '" + std::string(w) + "'");
    }

    void consumeSemicolon() {
        if (eatPunct(";")) return;
        if (isPunct("}") || cur().type == Tok::End || cur().newlineBefore) return;
        fail("expected ';'");
    }

    Atom identifierName() {
        if (cur().type != Tok::Ident) fail("expected identifier");
        Atom a = atoms_.intern(cur().text);
        next();
        return a;
    }

    Atom bindingIdentifier() {
        if (cur().type != Tok::Ident || isReservedWord(cur().text)) fail("expected identifier");
        return identifierName();
    }

    void declareVar(Atom name) {
        auto& vars = fnScopes_.back().vars;
        if (std::find(vars.begin(), vars.end(), name) == vars.end()) vars.push_back(name);
    }

    void declareLexical(Atom name, bool isConst) {
        auto* lexicals = blockScopes_.back().lexicals;
        for (const auto& decl : *lexicals) {
            if (decl.name == name) fail("duplicate declaration of '" + atoms_.name(name) + "'");
        }
        lexicals->push_back({name, isConst});
    }

    // ---- statements -------------------------------------------------------

    NodePtr statement() {
        DepthGuard guard(*this);
        const Token& t = cur();
        std::uint32_t line = t.line;
        if (t.type == Tok::Punct) {
            if (t.text == "{") return block();
            if (t.text == ";") {
                next();
                return std::make_unique<EmptyNode>(line);
            }
        }
        if (t.type == Tok::Ident) {
            const std::string& w = t.text;
            if (w == "var" || w == "const" ||
                (w == "let" && (ahead(1).type == Tok::Ident || aheadPunct(1, "[") || aheadPunct(1, "{")))) {
                auto decl = variableDeclaration(false);
                consumeSemicolon();
                return decl;
            }
            if (w == "function") return functionDeclaration();
            if (w == "class") return classDeclaration();
            if (w == "if") return ifStatement();
            if (w == "for") return forStatement();
            if (w == "while") {
                next();
                auto node = std::make_unique<WhileNode>(NodeKind::While, line);
                expectPunct("(");
                node->test = expression();
                expectPunct(")");
                node->body = statement();
                return node;
            }
            if (w == "do") {
                next();
                auto node = std::make_unique<WhileNode>(NodeKind::DoWhile, line);
                node->body = statement();
                expectWord("while");
                expectPunct("(");
                node->test = expression();
                expectPunct(")");
                eatPunct(";");
                return node;
            }
            if (w == "return") {
                next();
                NodePtr arg;
                if (!isPunct(";") && !isPunct("}") && cur().type != Tok::End && !cur().newlineBefore) {
                    arg = expression();
                }
                consumeSemicolon();
                return std::make_unique<ReturnNode>(line, std::move(arg));
            }
            if (w == "break" || w == "continue") {
                next();
                if (cur().type == Tok::Ident && !cur().newlineBefore && !isReservedWord(cur().text)) {
                    fail("labelled jumps are not supported");
                }
                consumeSemicolon();
                return std::make_unique<LeafNode>(w == "break" ? NodeKind::Break : NodeKind::Continue, line);
            }
            if (w == "throw") {
                next();
                if (cur().newlineBefore) fail("illegal newline after throw");
                auto arg = expression();
                consumeSemicolon();
                return std::make_unique<ThrowNode>(line, std::move(arg));
            }
            if (w == "try") return tryStatement();
            if (w == "switch") return switchStatement();
            if (w == "import" || w == "export") fail("modules are not supported");
            if (w == "with") fail("'with' is not supported");
            if (w == "async" && ahead(1).text == "function") fail("async functions are not supported");
            if (w == "debugger") {
                next();
                consumeSemicolon();
                return std::make_unique<EmptyNode>(line);
            }
            if (aheadPunct(1, ":") && !isReservedWord(w)) fail("labelled statements are not supported");
        }
        auto expr = expression();
        consumeSemicolon();
        return std::make_unique<ExprStmtNode>(line, std::move(expr));
    }

    std::unique_ptr<BlockNode> block() {
        auto node = std::make_unique<BlockNode>(cur().line);
        int closuresBefore = closures_;
        expectPunct("{");
        blockScopes_.push_back({&node->lexicals, &node->functions});
        while (!isPunct("}")) {
            if (cur().type == Tok::End) fail("unterminated block");
            node->body.push_back(statement());
        }
        next();
        blockScopes_.pop_back();
        node->capturesScope = closures_ != closuresBefore;
        return node;
    }

    std::unique_ptr<VarDeclNode> variableDeclaration(bool noIn, std::vector<Atom>* names = nullptr) {
        std::uint32_t line = cur().line;
        DeclKind kind = cur().text == "var" ? DeclKind::Var : cur().text == "let" ? DeclKind::Let : DeclKind::Const;
        next();
        auto node = std::make_unique<VarDeclNode>(line, kind);
        do {
            Declarator d;
            d.target = bindingTarget();
            if (eatPunct("=")) d.init = assignment(noIn);
            std::vector<Atom> bound;
            collectBoundNames(d.target.get(), bound);
            for (Atom name : bound) {
                if (kind == DeclKind::Var) declareVar(name);
                else if (names) names->push_back(name);
                else declareLexical(name, kind == DeclKind::Const);
            }
            node->declarations.push_back(std::move(d));
        } while (eatPunct(","));
        return node;
    }

    NodePtr functionDeclaration() {
        std::uint32_t line = cur().line;
        next();
        if (isPunct("*")) fail("generators are not supported");
        Atom name = bindingIdentifier();
        auto fn = functionRest(line, name, false);
        blockScopes_.back().functions->push_back(fn.get());
        return std::make_unique<FunctionDeclNode>(line, std::move(fn));
    }

    NodePtr classDeclaration() {
        std::uint32_t line = cur().line;
        auto cls = classBody(true);
        declareLexical(*cls->name, false);
        return std::make_unique<ClassDeclNode>(line, std::move(cls));
    }

    NodePtr ifStatement() {
        auto node = std::make_unique<IfNode>(cur().line);
        next();
        expectPunct("(");
        node->test = expression();
        expectPunct(")");
        node->consequent = statement();
        if (eatWord("else")) node->alternate = statement();
        return node;
    }

    NodePtr forStatement() {
        std::uint32_t line = cur().line;
        next();
        if (isWord("await")) fail("for-await is not supported");
        expectPunct("(");
        int closuresBefore = closures_;
        NodePtr init;
        std::vector<Atom> loopNames;
        if (isWord("var") || isWord("const") ||
            (isWord("let") && (ahead(1).type == Tok::Ident || aheadPunct(1, "[") || aheadPunct(1, "{")))) {
            DeclKind kind = cur().text == "var" ? DeclKind::Var : cur().text == "let" ? DeclKind::Let : DeclKind::Const;
            // for (decl x of/in y)
            std::size_t save = pos_;
            next();
            auto target = bindingTarget();
            if (isWord("of") || isWord("in")) {
                bool isOf = isWord("of");
                next();
                auto node = std::make_unique<ForEachNode>(isOf ? NodeKind::ForOf : NodeKind::ForIn, line);
                node->declKind = kind;
                if (kind == DeclKind::Var) {
                    std::vector<Atom> bound;
                    collectBoundNames(target.get(), bound);
                    for (Atom a : bound) declareVar(a);
                }
                node->target = std::move(target);
                node->iterable = isOf ? assignment(false) : expression();
                expectPunct(")");
                node->body = statement();
                node->capturesScope = closures_ != closuresBefore;
                return node;
            }
            pos_ = save;
            init = variableDeclaration(true, &loopNames);
            if (kind != DeclKind::Let) loopNames.clear();
        } else if (!isPunct(";")) {
            auto expr = expression(true);
            if (isWord("of") || isWord("in")) {
                bool isOf = isWord("of");
                next();
                auto node = std::make_unique<ForEachNode>(isOf ? NodeKind::ForOf : NodeKind::ForIn, line);
                node->target = toPattern(std::move(expr));
                node->iterable = isOf ? assignment(false) : expression();
                expectPunct(")");
                node->body = statement();
                node->capturesScope = closures_ != closuresBefore;
                return node;
            }
            init = std::make_unique<ExprStmtNode>(line, std::move(expr));
        }
        expectPunct(";");
        auto node = std::make_unique<ForNode>(line);
        node->init = std::move(init);
        node->perIterationNames = std::move(loopNames);
        if (!isPunct(";")) node->test = expression();
        expectPunct(";");
        if (!isPunct(")")) node->update = expression();
        expectPunct(")");
        node->body = statement();
        node->capturesScope = closures_ != closuresBefore;
        if (!node->capturesScope) node->perIterationNames.clear();
        return node;
    }

    NodePtr tryStatement() {
        auto node = std::make_unique<TryNode>(cur().line);
        next();
        node->block = block();
        if (eatWord("catch")) {
            int closuresBefore = closures_;
            if (eatPunct("(")) {
                node->param = bindingTarget();
                expectPunct(")");
            }
            node->handler = block();
            node->capturesScope = closures_ != closuresBefore;
        }
        if (eatWord("finally")) node->finalizer = block();
        if (!node->handler && !node->finalizer) fail("try without catch or finally");
        return node;
    }

    NodePtr switchStatement() {
        auto node = std::make_unique<SwitchNode>(cur().line);
        next();
        expectPunct("(");
        node->discriminant = expression();
        expectPunct(")");
        expectPunct("{");
        int closuresBefore = closures_;
        blockScopes_.push_back({&node->lexicals, &node->functions});
        bool sawDefault = false;
        while (!eatPunct("}")) {
            SwitchCase sc;
            if (eatWord("case")) {
                sc.test = expression();
            } else if (eatWord("default")) {
                if (sawDefault) fail("duplicate default clause");
                sawDefault = true;
            } else {
                fail("expected case or default");
            }
            expectPunct(":");
            while (!isWord("case") && !isWord("default") && !isPunct("}")) {
                if (cur().type == Tok::End) fail("unterminated switch");
                sc.body.push_back(statement());
            }
            node->cases.push_back(std::move(sc));
        }
        blockScopes_.pop_back();
        node->capturesScope = closures_ != closuresBefore;
        return node;
    }

    // ---- functions and classes -------------------------------------------

    std::unique_ptr<FunctionNode> functionRest(std::uint32_t line, std::optional<Atom> name, bool isArrow) {
        int closuresBefore = closures_;
        auto fn = std::make_unique<FunctionNode>(line);
        fn->name = name;
        fn->isArrow = isArrow;
        fnScopes_.push_back({});
        fnScopes_.back().isArrow = isArrow;
        expectPunct("(");
        parseParams(*fn, ")");
        functionBody(*fn);
        fn->capturesScope = closures_ != closuresBefore;
        ++closures_;
        return fn;
    }

    void parseParams(FunctionNode& fn, std::string_view close) {
        while (!eatPunct(close)) {
            std::uint32_t line = cur().line;
            if (eatPunct("...")) {
                fn.params.push_back(std::make_unique<RestNode>(line, bindingTarget()));
                fn.simpleParams = false;
                if (!isPunct(close)) fail("rest parameter must be last");
                continue;
            }
            auto target = bindingTarget();
            if (target->kind != NodeKind::Identifier) fn.simpleParams = false;
            if (eatPunct("=")) {
                target = std::make_unique<AssignPatternNode>(line, std::move(target), assignment(false));
                fn.simpleParams = false;
            }
            fn.params.push_back(std::move(target));
            if (!isPunct(close)) expectPunct(",");
        }
    }

    // Expects fnScopes_ to already hold the function's scope; pops it.
    void functionBody(FunctionNode& fn) {
        auto body = std::make_unique<BlockNode>(cur().line);
        int closuresBefore = closures_;
        expectPunct("{");
        blockScopes_.push_back({&body->lexicals, &body->functions});
        while (!isPunct("}")) {
            if (cur().type == Tok::End) fail("unterminated function body");
            body->body.push_back(statement());
        }
        next();
        blockScopes_.pop_back();
        body->capturesScope = closures_ != closuresBefore;
        fn.body = std::move(body);
        finishFunctionScope(fn);
    }

    void finishFunctionScope(FunctionNode& fn) {
        FunctionScope scope = std::move(fnScopes_.back());
        fnScopes_.pop_back();
        fn.varNames = std::move(scope.vars);
        fn.usesArguments = scope.usesArguments;
        if (scope.usesArguments && fn.isArrow) markArgumentsUse();
    }

    void markArgumentsUse() {
        for (auto it = fnScopes_.rbegin(); it != fnScopes_.rend(); ++it) {
            it->usesArguments = true;
            if (!it->isArrow) return;
        }
    }

    std::unique_ptr<ClassNode> classBody(bool requireName) {
        auto cls = std::make_unique<ClassNode>(cur().line);
        ++closures_;
        next(); // class
        if (cur().type == Tok::Ident && !isWord("extends")) cls->name = bindingIdentifier();
        else if (requireName) fail("class declaration requires a name");
        if (eatWord("extends")) cls->superClass = leftHandSide();
        expectPunct("{");
        while (!eatPunct("}")) {
            if (eatPunct(";")) continue;
            bool isStatic = false;
            if (isWord("static") && !aheadPunct(1, "(") && !aheadPunct(1, "=")) {
                next();
                isStatic = true;
            }
            if ((isWord("get") || isWord("set") || isWord("async")) && !aheadPunct(1, "(") &&
                !aheadPunct(1, "=") && !aheadPunct(1, ";")) {
                fail("accessors and async methods are not supported");
            }
            if (isPunct("*")) fail("generator methods are not supported");
            if (isPunct("#")) fail("private members are not supported");
            std::uint32_t line = cur().line;
            NodePtr computed;
            Atom key = 0;
            propertyKey(key, computed);
            if (isPunct("(")) {
                auto fn = functionRest(line, computed ? std::nullopt : std::optional<Atom>(key), false);
                if (!isStatic && !computed && atoms_.name(key) == "constructor") {
                    if (cls->constructor) fail("duplicate constructor");
                    cls->constructor = std::move(fn);
                } else {
                    cls->methods.push_back({key, std::move(computed), std::move(fn), isStatic});
                }
            } else {
                if (computed) fail("computed class fields are not supported");
                FieldNode field;
                field.key = key;
                field.isStatic = isStatic;
                if (eatPunct("=")) {
                    // field initialisers behave like methods for `this` and `arguments`
                    fnScopes_.push_back({});
                    field.value = assignment(false);
                    fnScopes_.pop_back();
                }
                consumeSemicolon();
                cls->fields.push_back(std::move(field));
            }
        }
        return cls;
    }

    void propertyKey(Atom& key, NodePtr& computed) {
        const Token& t = cur();
        if (t.type == Tok::Ident || t.type == Tok::String) {
            key = atoms_.intern(t.text);
            next();
        } else if (t.type == Tok::Number) {
            key = atoms_.intern(numberToString(t.number));
            next();
        } else if (eatPunct("[")) {
            computed = assignment(false);
            expectPunct("]");
        } else {
            fail("expected property name");
        }
    }

    // ---- binding patterns -------------------------------------------------

    NodePtr bindingTarget() {
        DepthGuard guard(*this);
        std::uint32_t line = cur().line;
        if (eatPunct("[")) {
            auto node = std::make_unique<ArrayPatternNode>(line);
            while (!eatPunct("]")) {
                if (eatPunct(",")) {
                    node->elements.push_back(nullptr);
                    continue;
                }
                if (eatPunct("...")) {
                    node->rest = bindingTarget();
                    expectPunct("]");
                    break;
                }
                node->elements.push_back(bindingElement());
                if (!isPunct("]")) expectPunct(",");
            }
            return node;
        }
        if (eatPunct("{")) {
            auto node = std::make_unique<ObjectPatternNode>(line);
            while (!eatPunct("}")) {
                if (eatPunct("...")) {
                    node->rest = std::make_unique<IdentifierNode>(cur().line, bindingIdentifier());
                    expectPunct("}");
                    break;
                }
                PatternProperty prop;
                std::uint32_t propLine = cur().line;
                bool shorthandCandidate = cur().type == Tok::Ident;
                propertyKey(prop.key, prop.computedKey);
                if (eatPunct(":")) {
                    prop.value = bindingElement();
                } else {
                    if (!shorthandCandidate || prop.computedKey) fail("expected ':' in object pattern");
                    if (isReservedWord(atoms_.name(prop.key))) fail("reserved word in object pattern");
                    NodePtr target = std::make_unique<IdentifierNode>(propLine, prop.key);
                    if (eatPunct("=")) {
                        target = std::make_unique<AssignPatternNode>(propLine, std::move(target), assignment(false));
                    }
                    prop.value = std::move(target);
                }
                node->properties.push_back(std::move(prop));
                if (!isPunct("}")) expectPunct(",");
            }
            return node;
        }
        return std::make_unique<IdentifierNode>(line, bindingIdentifier());
    }

    NodePtr bindingElement() {
        std::uint32_t line = cur().line;
        auto target = bindingTarget();
        if (eatPunct("=")) {
            return std::make_unique<AssignPatternNode>(line, std::move(target), assignment(false));
        }
        return target;
    }

    // Reinterpret an expression as an assignment target.
    NodePtr toPattern(NodePtr expr) {
        switch (expr->kind) {
        case NodeKind::Identifier:
        case NodeKind::Member: return expr;
        case NodeKind::Array: {
            auto& arr = static_cast<ArrayNode&>(*expr);
            auto node = std::make_unique<ArrayPatternNode>(expr->line);
            for (std::size_t i = 0; i < arr.elements.size(); ++i) {
                auto& el = arr.elements[i];
                if (!el) {
                    node->elements.push_back(nullptr);
                } else if (el->kind == NodeKind::Spread) {
                    if (i + 1 != arr.elements.size()) fail("rest element must be last");
                    node->rest = toPattern(std::move(static_cast<SpreadNode&>(*el).argument));
                } else {
                    node->elements.push_back(toPattern(std::move(el)));
                }
            }
            return node;
        }
        case NodeKind::Object: {
            auto& obj = static_cast<ObjectNode&>(*expr);
            auto node = std::make_unique<ObjectPatternNode>(expr->line);
            for (auto& prop : obj.properties) {
                if (prop.kind == PropertyNode::Kind::Spread) {
                    node->rest = toPattern(std::move(prop.value));
                    continue;
                }
                PatternProperty pp;
                pp.key = prop.key;
                pp.computedKey = std::move(prop.computedKey);
                pp.value = toPattern(std::move(prop.value));
                node->properties.push_back(std::move(pp));
            }
            return node;
        }
        case NodeKind::Assign: {
            auto& assign = static_cast<AssignNode&>(*expr);
            if (assign.op || assign.logical) fail("invalid destructuring target");
            return std::make_unique<AssignPatternNode>(expr->line, toPattern(std::move(assign.target)),
                                                       std::move(assign.value));
        }
        case NodeKind::AssignPattern: return expr;
        default: fail("invalid assignment target");
        }
    }

    // ---- expressions ------------------------------------------------------

    NodePtr expression(bool noIn = false) {
        std::uint32_t line = cur().line;
        auto first = assignment(noIn);
        if (!isPunct(",")) return first;
        auto seq = std::make_unique<SequenceNode>(line);
        seq->expressions.push_back(std::move(first));
        while (eatPunct(",")) seq->expressions.push_back(assignment(noIn));
        return seq;
    }

    bool arrowAhead() const {
        if (cur().type == Tok::Ident && !isReservedWord(cur().text) && aheadPunct(1, "=>")) return true;
        if (!isPunct("(")) return false;
        std::size_t close = closer_[pos_];
        if (close == 0 || close + 1 >= tokens_.size()) return false;
        const Token& after = tokens_[close + 1];
        return after.type == Tok::Punct && after.text == "=>" && !after.newlineBefore;
    }

    NodePtr arrowFunction() {
        std::uint32_t line = cur().line;
        int closuresBefore = closures_;
        auto fn = std::make_unique<FunctionNode>(line);
        fn->isArrow = true;
        fnScopes_.push_back({});
        fnScopes_.back().isArrow = true;
        if (cur().type == Tok::Ident) {
            fn->params.push_back(std::make_unique<IdentifierNode>(line, bindingIdentifier()));
        } else {
            expectPunct("(");
            parseParams(*fn, ")");
        }
        expectPunct("=>");
        if (isPunct("{")) {
            functionBody(*fn);
        } else {
            fn->expressionBody = true;
            fn->body = assignment(false);
            finishFunctionScope(*fn);
        }
        fn->capturesScope = closures_ != closuresBefore;
        ++closures_;
        return fn;
    }

    NodePtr assignment(bool noIn) {
        DepthGuard guard(*this);
        if (isWord("async") && (aheadPunct(1, "(") || ahead(1).type == Tok::Ident) && !ahead(1).newlineBefore) {
            fail("async functions are not supported");
        }
        if (isWord("yield")) fail("generators are not supported");
        if (arrowAhead()) return arrowFunction();
        std::uint32_t line = cur().line;
        auto left = conditional(noIn);
        if (cur().type != Tok::Punct) return left;
        const std::string& op = cur().text;
        if (op == "=") {
            next();
            auto target = (left->kind == NodeKind::Array || left->kind == NodeKind::Object) ? toPattern(std::move(left))
                                                                                         : std::move(left);
            checkSimpleTarget(*target, true);
            return std::make_unique<AssignNode>(line, std::move(target), assignment(noIn));
        }
        static const std::array<std::pair<std::string_view, BinaryOp>, 12> kCompound = {{
            {"+=", BinaryOp::Add}, {"-=", BinaryOp::Sub}, {"*=", BinaryOp::Mul}, {"/=", BinaryOp::Div},
            {"%=", BinaryOp::Mod}, {"**=", BinaryOp::Exp}, {"<<=", BinaryOp::Shl}, {">>=", BinaryOp::Shr},
            {">>>=", BinaryOp::UShr}, {"&=", BinaryOp::BitAnd}, {"|=", BinaryOp::BitOr}, {"^=", BinaryOp::BitXor},
        }};
        for (const auto& [text, bop] : kCompound) {
            if (op == text) {
                next();
                checkSimpleTarget(*left, false);
                auto node = std::make_unique<AssignNode>(line, std::move(left), assignment(noIn));
                node->op = bop;
                return node;
            }
        }
        std::optional<LogicalOp> logical;
        if (op == "&&=") logical = LogicalOp::And;
        else if (op == "||=") logical = LogicalOp::Or;
        else if (op == "?" "?=") logical = LogicalOp::Nullish;
        if (logical) {
            next();
            checkSimpleTarget(*left, false);
            auto node = std::make_unique<AssignNode>(line, std::move(left), assignment(noIn));
            node->logical = logical;
            return node;
        }
        return left;
    }

    void checkSimpleTarget(const Node& target, bool allowPattern) {
        switch (target.kind) {
        case NodeKind::Identifier:
        case NodeKind::Member: return;
        case NodeKind::ArrayPattern:
        case NodeKind::ObjectPattern:
            if (allowPattern) return;
            break;
        default: break;
        }
        fail("invalid assignment target");
    }

    NodePtr conditional(bool noIn) {
        std::uint32_t line = cur().line;
        auto test = binary(1, noIn);
        if (!eatPunct("?")) return test;
        auto consequent = assignment(false);
        expectPunct(":");
        auto alternate = assignment(noIn);
        return std::make_unique<ConditionalNode>(line, std::move(test), std::move(consequent), std::move(alternate));
    }

    struct BinaryInfo {
        int precedence;
        bool logical;
        BinaryOp op;
        LogicalOp lop;
    };

    std::optional<BinaryInfo> binaryInfo(bool noIn) const {
        const Token& t = cur();
        if (t.type == Tok::Ident) {
            if (t.text == "instanceof") return BinaryInfo{8, false, BinaryOp::InstanceOf, LogicalOp::And};
            if (t.text == "in" && !noIn) return BinaryInfo{8, false, BinaryOp::In, LogicalOp::And};
            return std::nullopt;
        }
        if (t.type != Tok::Punct) return std::nullopt;
        const std::string& s = t.text;
        if (s == "??") return BinaryInfo{1, true, BinaryOp::Add, LogicalOp::Nullish};
        if (s == "||") return BinaryInfo{2, true, BinaryOp::Add, LogicalOp::Or};
        if (s == "&&") return BinaryInfo{3, true, BinaryOp::Add, LogicalOp::And};
        if (s == "|") return BinaryInfo{4, false, BinaryOp::BitOr, LogicalOp::And};
        if (s == "^") return BinaryInfo{5, false, BinaryOp::BitXor, LogicalOp::And};
        if (s == "&") return BinaryInfo{6, false, BinaryOp::BitAnd, LogicalOp::And};
        if (s == "==") return BinaryInfo{7, false, BinaryOp::Eq, LogicalOp::And};
        if (s == "!=") return BinaryInfo{7, false, BinaryOp::NotEq, LogicalOp::And};
        if (s == "===") return BinaryInfo{7, false, BinaryOp::StrictEq, LogicalOp::And};
        if (s == "!==") return BinaryInfo{7, false, BinaryOp::StrictNotEq, LogicalOp::And};
        if (s == "<") return BinaryInfo{8, false, BinaryOp::Lt, LogicalOp::And};
        if (s == ">") return BinaryInfo{8, false, BinaryOp::Gt, LogicalOp::And};
        if (s == "<=") return BinaryInfo{8, false, BinaryOp::LtEq, LogicalOp::And};
        if (s == ">=") return BinaryInfo{8, false, BinaryOp::GtEq, LogicalOp::And};
        if (s == "<<") return BinaryInfo{9, false, BinaryOp::Shl, LogicalOp::And};
        if (s == ">>") return BinaryInfo{9, false, BinaryOp::Shr, LogicalOp::And};
        if (s == ">>>") return BinaryInfo{9, false, BinaryOp::UShr, LogicalOp::And};
        if (s == "+") return BinaryInfo{10, false, BinaryOp::Add, LogicalOp::And};
        if (s == "-") return BinaryInfo{10, false, BinaryOp::Sub, LogicalOp::And};
        if (s == "*") return BinaryInfo{11, false, BinaryOp::Mul, LogicalOp::And};
        if (s == "/") return BinaryInfo{11, false, BinaryOp::Div, LogicalOp::And};
        if (s == "%") return BinaryInfo{11, false, BinaryOp::Mod, LogicalOp::And};
        if (s == "**") return BinaryInfo{12, false, BinaryOp::Exp, LogicalOp::And};
        return std::nullopt;
    }

    NodePtr binary(int minPrecedence, bool noIn) {
        DepthGuard guard(*this);
        auto left = unary();
        int chain = 0;
        while (true) {
            auto info = binaryInfo(noIn);
            if (!info || info->precedence < minPrecedence) break;
            if (++chain > kMaxChain) fail("expression too long");
            std::uint32_t line = cur().line;
            next();
            // ** is right-associative
            int nextMin = info->precedence == 12 ? info->precedence : info->precedence + 1;
            auto right = binary(nextMin, noIn);
            if (info->logical) {
                left = std::make_unique<LogicalNode>(line, info->lop, std::move(left), std::move(right));
            } else {
                left = std::make_unique<BinaryNode>(line, info->op, std::move(left), std::move(right));
            }
        }
        return left;
    }

    NodePtr unary() {
        DepthGuard guard(*this);
        const Token& t = cur();
        std::uint32_t line = t.line;
        if (t.type == Tok::Punct) {
            std::optional<UnaryOp> op;
            if (t.text == "-") op = UnaryOp::Minus;
            else if (t.text == "+") op = UnaryOp::Plus;
            else if (t.text == "!") op = UnaryOp::Not;
            else if (t.text == "~") op = UnaryOp::BitNot;
            if (op) {
                next();
                return std::make_unique<UnaryNode>(line, *op, unary());
            }
            if (t.text == "++" || t.text == "--") {
                bool inc = t.text == "++";
                next();
                auto arg = unary();
                checkSimpleTarget(*arg, false);
                return std::make_unique<UpdateNode>(line, inc, true, std::move(arg));
            }
        } else if (t.type == Tok::Ident) {
            std::optional<UnaryOp> op;
            if (t.text == "typeof") op = UnaryOp::Typeof;
            else if (t.text == "void") op = UnaryOp::Void;
            else if (t.text == "delete") op = UnaryOp::Delete;
            else if (t.text == "await") fail("await is not supported");
            if (op) {
                next();
                return std::make_unique<UnaryNode>(line, *op, unary());
            }
        }
        auto expr = leftHandSide();
        if (cur().type == Tok::Punct && (cur().text == "++" || cur().text == "--") && !cur().newlineBefore) {
            bool inc = cur().text == "++";
            next();
            checkSimpleTarget(*expr, false);
            return std::make_unique<UpdateNode>(line, inc, false, std::move(expr));
        }
        return expr;
    }

    void arguments(std::vector<NodePtr>& out) {
        expectPunct("(");
        while (!eatPunct(")")) {
            std::uint32_t line = cur().line;
            if (eatPunct("...")) out.push_back(std::make_unique<SpreadNode>(line, assignment(false)));
            else out.push_back(assignment(false));
            if (!isPunct(")")) expectPunct(",");
        }
    }

    NodePtr leftHandSide() {
        DepthGuard guard(*this);
        std::uint32_t line = cur().line;
        NodePtr expr;
        if (isWord("new")) {
            next();
            if (isPunct(".")) fail("new.target is not supported");
            // callee: member expression without calls
            auto callee = primary();
            while (true) {
                if (eatPunct(".")) {
                    auto member = std::make_unique<MemberNode>(cur().line, std::move(callee));
                    member->property = identifierName();
                    callee = std::move(member);
                } else if (isPunct("[")) {
                    next();
                    auto member = std::make_unique<MemberNode>(cur().line, std::move(callee));
                    member->computed = expression();
                    expectPunct("]");
                    callee = std::move(member);
                } else {
                    break;
                }
            }
            auto node = std::make_unique<NewNode>(line, std::move(callee));
            if (isPunct("(")) arguments(node->arguments);
            expr = std::move(node);
        } else {
            expr = primary();
        }
        bool optionalChain = false;
        int chain = 0;
        while (true) {
            if (++chain > kMaxChain) fail("expression too long");
            std::uint32_t l = cur().line;
            if (eatPunct(".")) {
                auto member = std::make_unique<MemberNode>(l, std::move(expr));
                if (isPunct("#")) fail("private members are not supported");
                member->property = identifierName();
                expr = std::move(member);
            } else if (isPunct("?.")) {
                next();
                optionalChain = true;
                if (isPunct("(")) {
                    auto call = std::make_unique<CallNode>(l, std::move(expr));
                    call->optional = true;
                    arguments(call->arguments);
                    expr = std::move(call);
                } else if (eatPunct("[")) {
                    auto member = std::make_unique<MemberNode>(l, std::move(expr));
                    member->computed = expression();
                    member->optional = true;
                    expectPunct("]");
                    expr = std::move(member);
                } else {
                    auto member = std::make_unique<MemberNode>(l, std::move(expr));
                    member->property = identifierName();
                    member->optional = true;
                    expr = std::move(member);
                }
            } else if (isPunct("[")) {
                next();
                auto member = std::make_unique<MemberNode>(l, std::move(expr));
                member->computed = expression();
                expectPunct("]");
                expr = std::move(member);
            } else if (isPunct("(")) {
                auto call = std::make_unique<CallNode>(l, std::move(expr));
                arguments(call->arguments);
                expr = std::move(call);
            } else if (cur().type == Tok::TemplateFull || cur().type == Tok::TemplateHead) {
                fail("tagged templates are not supported");
            } else {
                break;
            }
        }
        if (optionalChain) return std::make_unique<OptionalChainNode>(line, std::move(expr));
        return expr;
    }

    NodePtr primary() {
        DepthGuard guard(*this);
        const Token& t = cur();
        std::uint32_t line = t.line;
        switch (t.type) {
        case Tok::Number: {
            double v = t.number;
            next();
            return std::make_unique<NumberNode>(line, v);
        }
        case Tok::String: {
            auto node = std::make_unique<StringNode>(line, t.text);
            node->atom = atoms_.intern(t.text);
            next();
            return node;
        }
        case Tok::TemplateFull: {
            auto node = std::make_unique<TemplateNode>(line);
            node->quasis.push_back(t.text);
            next();
            return node;
        }
        case Tok::TemplateHead: {
            auto node = std::make_unique<TemplateNode>(line);
            node->quasis.push_back(t.text);
            next();
            while (true) {
                node->expressions.push_back(expression());
                if (cur().type == Tok::TemplateMiddle) {
                    node->quasis.push_back(cur().text);
                    next();
                } else if (cur().type == Tok::TemplateTail) {
                    node->quasis.push_back(cur().text);
                    next();
                    break;
                } else {
                    fail("unterminated template substitution");
                }
            }
            return node;
        }
        case Tok::Punct: {
            if (t.text == "(") {
                next();
                auto expr = expression();
                expectPunct(")");
                return expr;
            }
            if (t.text == "[") return arrayLiteral();
            if (t.text == "{") return objectLiteral();
            if (t.text == "/" || t.text == "/=") fail("regular expressions are not supported");
            fail("unexpected token");
        }
        case Tok::Ident: {
            const std::string& w = t.text;
            if (w == "true" || w == "false") {
                next();
                return std::make_unique<BooleanNode>(line, w == "true");
            }
            if (w == "null") {
                next();
                return std::make_unique<LeafNode>(NodeKind::Null, line);
            }
            if (w == "this") {
                next();
                return std::make_unique<LeafNode>(NodeKind::This, line);
            }
            if (w == "super") {
                next();
                if (!isPunct("(") && !isPunct(".") && !isPunct("[")) fail("unexpected super");
                return std::make_unique<LeafNode>(NodeKind::Super, line);
            }
            if (w == "function") {
                next();
                if (isPunct("*")) fail("generators are not supported");
                std::optional<Atom> name;
                if (cur().type == Tok::Ident && !isPunct("(")) name = bindingIdentifier();
                return functionRest(line, name, false);
            }
            if (w == "class") return classBody(false);
            if (isReservedWord(w)) fail("unexpected keyword");
            Atom name = atoms_.intern(w);
            if (w == "arguments") markArgumentsUse();
            next();
            return std::make_unique<IdentifierNode>(line, name);
        }
        default: fail("unexpected end of input");
        }
    }

    NodePtr arrayLiteral() {
        auto node = std::make_unique<ArrayNode>(cur().line);
        next();
        while (!eatPunct("]")) {
            if (isPunct(",")) {
                next();
                node->elements.push_back(nullptr);
                continue;
            }
            std::uint32_t line = cur().line;
            if (eatPunct("...")) node->elements.push_back(std::make_unique<SpreadNode>(line, assignment(false)));
            else node->elements.push_back(assignment(false));
            if (!isPunct("]")) expectPunct(",");
        }
        return node;
    }

    NodePtr objectLiteral() {
        auto node = std::make_unique<ObjectNode>(cur().line);
        next();
        while (!eatPunct("}")) {
            std::uint32_t line = cur().line;
            PropertyNode prop;
            if (eatPunct("...")) {
                prop.kind = PropertyNode::Kind::Spread;
                prop.value = assignment(false);
                node->properties.push_back(std::move(prop));
                if (!isPunct("}")) expectPunct(",");
                continue;
            }
            if ((isWord("get") || isWord("set") || isWord("async")) && !aheadPunct(1, ":") &&
                !aheadPunct(1, "(") && !aheadPunct(1, ",") && !aheadPunct(1, "}")) {
                fail("accessors and async methods are not supported");
            }
            if (isPunct("*")) fail("generator methods are not supported");
            bool shorthandCandidate = cur().type == Tok::Ident;
            propertyKey(prop.key, prop.computedKey);
            if (eatPunct(":")) {
                prop.value = assignment(false);
            } else if (isPunct("(")) {
                prop.value = functionRest(line, prop.computedKey ? std::nullopt : std::optional<Atom>(prop.key), false);
            } else {
                if (!shorthandCandidate || prop.computedKey) fail("expected ':' after property name");
                prop.shorthand = true;
                const std::string& name = atoms_.name(prop.key);
                if (isReservedWord(name)) fail("reserved word used as shorthand property");
                if (name == "arguments") markArgumentsUse();
                NodePtr value = std::make_unique<IdentifierNode>(line, prop.key);
                if (isPunct("=")) {
                    // Only valid once the literal is reinterpreted as a pattern.
                    next();
                    value = std::make_unique<AssignNode>(line, std::move(value), assignment(false));
                }
                prop.value = std::move(value);
            }
            node->properties.push_back(std::move(prop));
            if (!isPunct("}")) expectPunct(",");
        }
        return node;
    }

    std::vector<Token> tokens_;
    std::vector<std::size_t> closer_; // index of the matching close bracket, 0 if none
    std::size_t pos_ = 0;
    AtomTable& atoms_;
    std::vector<FunctionScope> fnScopes_;
    std::vector<BlockScope> blockScopes_;
    int depth_ = 0;
    int closures_ = 0;
};

} // namespace

void collectBoundNames(const Node* pattern, std::vector<Atom>& out) {
    if (!pattern) return;
    switch (pattern->kind) {
    case NodeKind::Identifier: out.push_back(as<IdentifierNode>(*pattern).name); break;
    case NodeKind::AssignPattern: collectBoundNames(as<AssignPatternNode>(*pattern).target.get(), out); break;
    case NodeKind::Rest: collectBoundNames(as<RestNode>(*pattern).target.get(), out); break;
    case NodeKind::ArrayPattern: {
        const auto& arr = as<ArrayPatternNode>(*pattern);
        for (const auto& el : arr.elements) collectBoundNames(el.get(), out);
        collectBoundNames(arr.rest.get(), out);
        break;
    }
    case NodeKind::ObjectPattern: {
        const auto& obj = as<ObjectPatternNode>(*pattern);
        for (const auto& prop : obj.properties) collectBoundNames(prop.value.get(), out);
        collectBoundNames(obj.rest.get(), out);
        break;
    }
    default: break;
    }
}

std::unique_ptr<Program> parseProgram(std::string_view source, AtomTable& atoms) {
    Lexer lexer(source);
    Parser parser(lexer.tokenize(), atoms);
    return parser.program();
}

} // namespace pinauthor::script
