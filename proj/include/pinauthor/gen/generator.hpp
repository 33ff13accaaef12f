#pragma once

#include "pinauthor/core/errors.hpp"
#include "pinauthor/core/session.hpp"
#include "pinauthor/core/types.hpp"
#include "pinauthor/llm/gateway.hpp"
#include "pinauthor/rag/store.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pinauthor::gen {

class StructuredOutputError : public SchemaError {
public:
    using SchemaError::SchemaError;
};

class CategoryError : public Error {
public:
    CategoryError(ScriptCategory wanted, ScriptCategory got)
        : Error("generator for " + std::string(toString(wanted)) + " returned a " + std::string(toString(got)) +
                " script"),
          wanted(wanted), got(got) {}
    ScriptCategory wanted;
    ScriptCategory got;
};

struct GeneratorRequest {
    ScriptCategory category = ScriptCategory::Primitive;
    std::string instruction;
    std::vector<std::string> parameterNames; // primitive: names the initializer must define
    std::optional<ParamMap> parentParams;    // required for animation and interaction
    std::optional<std::string> shortTermMemory;
    std::optional<std::string> compileError;

    // Throws ValidationError.
    void validate() const;
};

struct StructuredOutput {
    ScriptCategory category = ScriptCategory::Primitive;
    std::string message;
    std::string source;
    std::optional<std::string> explanation;
};

// Accepts {type, message, content}, optionally fenced or surrounded by
// prose. The five-field form {category, explanation, code, ...} is mapped
// onto the same result. Throws StructuredOutputError.
StructuredOutput parseStructuredOutput(std::string_view raw);

class ScriptGenerator {
public:
    ScriptGenerator(llm::Gateway& gateway, const rag::ExampleStore& examples, std::string model,
                    std::size_t k = rag::kDefaultTopK)
        : gateway_(gateway), examples_(examples), model_(std::move(model)), k_(k) {}

    // Category prompt, retrieved examples as user/assistant pairs, then the
    // request itself as a JSON object.
    std::vector<llm::ChatMessage> assemblePrompt(const GeneratorRequest& req) const;

    // Parses the reply, extracts parameters by running the initializer and
    // stores the source as the category's short-term memory in `session`.
    ScriptArtifact generateScript(const GeneratorRequest& req, Session& session);

    // Re-asks with the remembered source and the compile error. Throws
    // InvalidStateError when the category has no memory.
    ScriptArtifact regenerateOnError(const GeneratorRequest& original, const std::string& compileError,
                                     Session& session);

    const std::string& model() const { return model_; }

private:
    llm::Gateway& gateway_;
    const rag::ExampleStore& examples_;
    std::string model_;
    std::size_t k_;
};

} // namespace pinauthor::gen
