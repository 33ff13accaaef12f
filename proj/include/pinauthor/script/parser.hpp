#pragma once

#include "pinauthor/script/ast.hpp"
#include "pinauthor/script/heap.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pinauthor::script {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(const std::string& message, std::uint32_t line, std::uint32_t column)
        : std::runtime_error("SyntaxError: " + message + " (line " + std::to_string(line) +
                             ", column " + std::to_string(column) + ")"),
          line(line), column(column) {}
    std::uint32_t line;
    std::uint32_t column;
};

// Parses an ECMAScript-syntax script into an AST. Identifiers and property
// names are interned into `atoms`, so the program is only meaningful for
// the realm that owns that table.
std::unique_ptr<Program> parseProgram(std::string_view source, AtomTable& atoms);

} // namespace pinauthor::script
