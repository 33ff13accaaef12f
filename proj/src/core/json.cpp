#include "pinauthor/core/json.hpp"

#include "pinauthor/core/errors.hpp"

namespace pinauthor {

namespace {

Json optionalText(const std::optional<std::string>& text) {
    return text ? Json(*text) : Json(nullptr);
}

std::optional<std::string> readOptionalText(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

} // namespace

void to_json(Json& j, ScriptCategory c) { j = std::string(toString(c)); }

void from_json(const Json& j, ScriptCategory& c) {
    auto parsed = parseCategory(j.get<std::string>());
    if (!parsed) throw ValidationError("unknown script category '" + j.get<std::string>() + "'");
    c = *parsed;
}

// Ordered maps are written as [[name, value], ...] so order survives.
void to_json(Json& j, const ParamMap& m) {
    j = Json::array();
    for (const auto& [name, value] : m) j.push_back(Json::array({name, value}));
}

void from_json(const Json& j, ParamMap& m) {
    m = ParamMap{};
    for (const auto& entry : j) m.set(entry.at(0).get<std::string>(), entry.at(1).get<double>());
}

void to_json(Json& j, const ScriptArtifact& a) {
    j = Json{{"category", a.category},
             {"message", a.message},
             {"source", a.source},
             {"parameters", a.parameters},
             {"explanation", optionalText(a.explanation)},
             {"originPrompt", a.originPrompt}};
}

void from_json(const Json& j, ScriptArtifact& a) {
    a.category = j.at("category").get<ScriptCategory>();
    a.message = j.at("message").get<std::string>();
    a.source = j.at("source").get<std::string>();
    a.parameters = j.at("parameters").get<ParamMap>();
    a.explanation = readOptionalText(j, "explanation");
    a.originPrompt = j.value("originPrompt", "");
}

void to_json(Json& j, const SegmentPlan& p) {
    j = Json{{"isFollowup", p.isFollowup},
             {"primitive", optionalText(p.primitive)},
             {"animation", optionalText(p.animation)},
             {"interaction", optionalText(p.interaction)}};
}

void from_json(const Json& j, SegmentPlan& p) {
    p.isFollowup = j.at("isFollowup").get<bool>();
    p.primitive = readOptionalText(j, "primitive");
    p.animation = readOptionalText(j, "animation");
    p.interaction = readOptionalText(j, "interaction");
}

void to_json(Json& j, const ParameterSet& p) { j = p.names(); }

void from_json(const Json& j, ParameterSet& p) {
    p = ParameterSet(j.get<std::vector<std::string>>());
}

void to_json(Json& j, const InstructionBundle& b) {
    j = Json{{"primitive", optionalText(b.primitive)},
             {"animation", optionalText(b.animation)},
             {"interaction", optionalText(b.interaction)}};
}

void from_json(const Json& j, InstructionBundle& b) {
    b.primitive = readOptionalText(j, "primitive");
    b.animation = readOptionalText(j, "animation");
    b.interaction = readOptionalText(j, "interaction");
}

void to_json(Json& j, const HistoryCard& c) {
    j = Json{{"id", c.id},
             {"parentId", optionalText(c.parentId)},
             {"userInput", c.userInput},
             {"plan", c.plan},
             {"params", c.params},
             {"instructions", c.instructions},
             {"artifacts", c.artifacts},
             {"enabled", c.enabled},
             {"createdAt", c.createdAt}};
}

void from_json(const Json& j, HistoryCard& c) {
    c.id = j.at("id").get<std::string>();
    c.parentId = readOptionalText(j, "parentId");
    c.userInput = j.at("userInput").get<std::string>();
    c.plan = j.at("plan").get<SegmentPlan>();
    c.params = j.at("params").get<ParameterSet>();
    c.instructions = j.at("instructions").get<InstructionBundle>();
    c.artifacts = j.at("artifacts").get<std::vector<ScriptArtifact>>();
    c.enabled = j.at("enabled").get<std::vector<bool>>();
    c.createdAt = j.at("createdAt").get<std::int64_t>();
}

void to_json(Json& j, const SliderSpec& s) {
    j = Json{{"name", s.name}, {"initial", s.initial}, {"min", s.min}, {"max", s.max}};
}

void to_json(Json& j, const HeightField& f) {
    j = Json::array();
    for (double h : f.heights()) j.push_back(h);
}

} // namespace pinauthor
