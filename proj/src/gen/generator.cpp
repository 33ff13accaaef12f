#include "pinauthor/gen/generator.hpp"

#include "pinauthor/helper/prompts.hpp"
#include "pinauthor/llm/structured.hpp"
#include "pinauthor/sim/runtime.hpp"

namespace pinauthor::gen {

using llm::Json;

namespace {

const Json* firstOf(const Json& obj, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        auto it = obj.find(k);
        if (it != obj.end()) return &*it;
    }
    return nullptr;
}

Json exampleReply(const rag::ExampleRecord& r) {
    Json j = Json::object();
    j["type"] = toString(r.category);
    j["message"] = r.message.empty() ? r.instruction : r.message;
    j["content"] = r.code;
    return j;
}

} // namespace

void GeneratorRequest::validate() const {
    if (instruction.empty()) throw ValidationError("generator instruction must be non-empty");
    if (category != ScriptCategory::Primitive && !parentParams) {
        throw ValidationError(std::string(toString(category)) + " generation requires parent parameters");
    }
    if (compileError && !shortTermMemory) throw ValidationError("a compile error requires the previous script");
}

StructuredOutput parseStructuredOutput(std::string_view raw) {
    std::string text(raw);
    Json j;
    try {
        j = llm::extractJsonObject(raw);
    } catch (const SchemaError&) {
        throw StructuredOutputError("no JSON object in generator output", text);
    }
    const Json* type = firstOf(j, {"type", "category"});
    const Json* content = firstOf(j, {"content", "code"});
    const Json* message = firstOf(j, {"message"});
    const Json* explanation = firstOf(j, {"explanation"});
    if (!type || !type->is_string()) throw StructuredOutputError("generator output lacks 'type'", text);
    if (!content || !content->is_string()) throw StructuredOutputError("generator output lacks 'content'", text);
    if (!message && !explanation) throw StructuredOutputError("generator output lacks 'message'", text);
    if (message && !message->is_string()) throw StructuredOutputError("'message' must be a string", text);

    auto category = parseCategory(type->get<std::string>());
    if (!category) throw StructuredOutputError("unknown script type '" + type->get<std::string>() + "'", text);
    StructuredOutput out;
    out.category = *category;
    out.source = content->get<std::string>();
    if (explanation && explanation->is_string()) out.explanation = explanation->get<std::string>();
    out.message = message ? message->get<std::string>() : *out.explanation;
    if (out.source.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw StructuredOutputError("generator output has empty 'content'", text);
    }
    return out;
}

std::vector<llm::ChatMessage> ScriptGenerator::assemblePrompt(const GeneratorRequest& req) const {
    req.validate();
    std::vector<llm::ChatMessage> messages;
    messages.push_back({llm::Role::System, std::string(helper::promptText(helper::generatorPrompt(req.category)))});
    for (const auto& example : examples_.topK(req.category, req.instruction, k_)) {
        messages.push_back({llm::Role::User, Json{{"Prompt", example.instruction}}.dump(2)});
        messages.push_back({llm::Role::Assistant, exampleReply(example).dump(2)});
    }
    Json input = Json::object();
    input["Prompt"] = req.instruction;
    if (req.category == ScriptCategory::Primitive) input["parameters"] = req.parameterNames;
    if (req.parentParams) {
        Json parent = Json::object();
        for (const auto& [name, value] : *req.parentParams) parent[name] = value;
        input["parentparams"] = parent;
    }
    if (req.shortTermMemory) input["previousScript"] = *req.shortTermMemory;
    if (req.compileError) input["compileError"] = *req.compileError;
    messages.push_back({llm::Role::User, input.dump(2)});
    return messages;
}

ScriptArtifact ScriptGenerator::generateScript(const GeneratorRequest& req, Session& session) {
    std::string raw = gateway_.complete(model_, assemblePrompt(req));
    StructuredOutput out = parseStructuredOutput(raw);
    if (out.category != req.category) throw CategoryError(req.category, out.category);

    ScriptArtifact artifact;
    artifact.category = out.category;
    artifact.message = out.message;
    artifact.source = out.source;
    artifact.explanation = out.explanation;
    artifact.originPrompt = req.instruction;
    try {
        artifact.parameters = sim::extractParameters(out.source, out.category);
    } catch (const Error&) {
        // Left empty; the compile check reports the underlying failure.
    }
    session.setGeneratorMemory(req.category, artifact.source);
    return artifact;
}

ScriptArtifact ScriptGenerator::regenerateOnError(const GeneratorRequest& original, const std::string& compileError,
                                                  Session& session) {
    const auto& memory = session.generatorMemory(original.category);
    if (!memory) {
        throw InvalidStateError("no previous " + std::string(toString(original.category)) + " script to repair");
    }
    GeneratorRequest req = original;
    req.shortTermMemory = *memory;
    req.compileError = compileError;
    return generateScript(req, session);
}

} // namespace pinauthor::gen
