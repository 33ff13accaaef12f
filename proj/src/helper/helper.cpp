#include "pinauthor/helper/helper.hpp"

#include "pinauthor/core/json.hpp"
#include "pinauthor/helper/prompts.hpp"
#include "pinauthor/llm/structured.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace pinauthor::helper {

using llm::Json;

namespace {

constexpr const char* kPrimitiveKey = "Authoring Primitive Shape/Motion";
constexpr const char* kAnimationKey = "Authoring Animation";
constexpr const char* kInteractionKey = "Authoring Interaction";

std::string lowerAlnum(std::string_view s) {
    std::string out;
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) out += static_cast<char>(std::tolower(u));
    }
    return out;
}

// Finds the field whose normalized name contains `needle`.
const Json* field(const Json& obj, std::string_view needle) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (lowerAlnum(it.key()).find(needle) != std::string::npos) return &it.value();
    }
    return nullptr;
}

std::optional<std::string> segmentText(const Json& value, const std::string& raw) {
    if (value.is_null()) return std::nullopt;
    if (!value.is_string()) throw SchemaError("segment value must be a string or null", raw);
    std::string text = value.get<std::string>();
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::nullopt;
    text = text.substr(first, text.find_last_not_of(" \t\r\n") - first + 1);
    std::string key = lowerAlnum(text);
    if (key == "none" || key == "null" || key == "na") return std::nullopt;
    return text;
}

bool booleanField(const Json& value, const std::string& name, const std::string& raw) {
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_string()) {
        std::string v = lowerAlnum(value.get<std::string>());
        if (v == "true") return true;
        if (v == "false") return false;
    }
    throw SchemaError("field '" + name + "' must be a boolean", raw);
}

std::vector<std::string> nameList(const Json& value, const std::string& name, const std::string& raw) {
    if (!value.is_array()) throw SchemaError("field '" + name + "' must be a list", raw);
    std::vector<std::string> out;
    for (const auto& item : value) {
        std::string n;
        if (item.is_string()) n = item.get<std::string>();
        else if (item.is_object() && item.contains("name") && item["name"].is_string()) n = item["name"].get<std::string>();
        else throw SchemaError("field '" + name + "' must list parameter names", raw);
        n.erase(0, n.find_first_not_of(" \t"));
        n.erase(n.find_last_not_of(" \t") + 1);
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
    return out;
}

ParameterSet toParameterSet(const std::vector<std::string>& names) {
    for (const auto& n : names) {
        if (!isIdentifier(n)) throw ValidationError("parameter name '" + n + "' is not a valid identifier");
    }
    return ParameterSet(names);
}

Json segmentsOf(const InstructionBundle& b) {
    auto text = [](const std::optional<std::string>& s) { return s ? Json(*s) : Json("None"); };
    return {{kPrimitiveKey, text(b.primitive)}, {kAnimationKey, text(b.animation)}, {kInteractionKey, text(b.interaction)}};
}

Json parseObject(const std::string& raw) { return llm::extractJsonObject(raw); }

} // namespace

std::vector<std::string> bracketedNames(std::string_view text) {
    static const std::regex pattern(R"(\[([A-Za-z_][A-Za-z0-9_]*)\])");
    std::vector<std::string> out;
    std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator(); ++it) {
        std::string name = (*it)[1];
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    return out;
}

bool hasHeightParameter(const ParameterSet& params) {
    return std::any_of(params.names().begin(), params.names().end(),
                       [](const std::string& n) { return lowerAlnum(n).find("height") != std::string::npos; });
}

Json segmentsJson(const SegmentPlan& plan) {
    auto text = [](const std::optional<std::string>& s) { return s ? Json(*s) : Json("None"); };
    Json j = Json::object();
    j[kPrimitiveKey] = text(plan.primitive);
    j[kAnimationKey] = text(plan.animation);
    j[kInteractionKey] = text(plan.interaction);
    return j;
}

std::string PromptHelper::ask(std::string_view systemPrompt, std::vector<llm::ChatMessage> messages) {
    messages.insert(messages.begin(), {llm::Role::System, std::string(systemPrompt)});
    return gateway_.complete(model_, messages);
}

SegmentPlan PromptHelper::segment(const std::string& userInput, const HelperContext& ctx) {
    if (userInput.empty()) throw ValidationError("user input must be non-empty");
    std::vector<llm::ChatMessage> messages;
    for (const HelperTurn& turn : ctx.priorTurns) {
        messages.push_back({llm::Role::User, turn.userInput});
        messages.push_back({llm::Role::Assistant, segmentsOf(turn.instructions).dump(2)});
    }
    messages.push_back({llm::Role::User, userInput});
    std::string raw = ask(promptText(PromptId::Segmentation), messages);

    Json j = parseObject(raw);
    const Json* followup = field(j, "followup");
    const Json* primitive = field(j, "primitive");
    const Json* animation = field(j, "animation");
    const Json* interaction = field(j, "interaction");
    if (!followup || !primitive || !animation || !interaction) {
        throw SchemaError("segmentation output lacks a required field", raw);
    }
    SegmentPlan plan;
    plan.isFollowup = booleanField(*followup, "is_followup", raw);
    plan.primitive = segmentText(*primitive, raw);
    plan.animation = segmentText(*animation, raw);
    plan.interaction = segmentText(*interaction, raw);
    try {
        plan.validate();
    } catch (const ValidationError& e) {
        throw SchemaError(e.what(), raw);
    }
    return plan;
}

ParameterSet PromptHelper::generateParameters(const SegmentPlan& plan) {
    if (!plan.primitive) throw ValidationError("parameter generation requires a primitive segment");
    std::string raw = ask(promptText(PromptId::ParameterGeneration), {{llm::Role::User, segmentsJson(plan).dump(2)}});
    Json j = parseObject(raw);
    const Json* list = field(j, "parameters");
    if (!list) throw SchemaError("parameter output lacks 'parameters'", raw);
    ParameterSet params = toParameterSet(nameList(*list, "parameters", raw));
    if (params.empty()) throw ValidationError("parameter generation returned no parameters");
    if (!hasHeightParameter(params)) throw ValidationError("parameter generation returned no height parameter");
    return params;
}

ValidationVerdict PromptHelper::validateParameters(const ParameterSet& params, const SegmentPlan& plan) {
    if (params.empty()) throw ValidationError("validation requires at least one parameter");
    std::vector<std::string> goals;
    if (plan.animation) goals.push_back("Animation: " + *plan.animation);
    if (plan.interaction) goals.push_back("Interaction: " + *plan.interaction);
    if (goals.empty()) return {true, "no animation or interaction to accommodate", std::nullopt};

    std::string prompt;
    for (const auto& g : goals) prompt += (prompt.empty() ? "" : "\n") + g;
    Json input = {{"parentparam", params.names()}, {"prompt", prompt}};
    std::string raw = ask(promptText(PromptId::ParameterInference), {{llm::Role::User, input.dump(2)}});

    Json j = parseObject(raw);
    const Json* success = field(j, "success");
    if (!success) throw SchemaError("validation output lacks 'success'", raw);
    ValidationVerdict verdict;
    verdict.success = booleanField(*success, "success", raw);
    if (const Json* message = field(j, "message"); message && message->is_string()) {
        verdict.message = message->get<std::string>();
    }
    if (!verdict.success) {
        const Json* updated = field(j, "updatedparams");
        if (!updated) throw SchemaError("failed validation must carry 'updatedParams'", raw);
        verdict.updatedParams = params.unionWith(toParameterSet(nameList(*updated, "updatedParams", raw)));
    }
    return verdict;
}

InstructionBundle PromptHelper::buildInstructions(const SegmentPlan& plan, const ParameterSet& params) {
    if (!plan.primitive) throw ValidationError("instruction building requires a primitive segment");
    Json input = segmentsJson(plan);
    input["parameters"] = params.names();
    std::string raw = ask(promptText(PromptId::CodeInstruction), {{llm::Role::User, input.dump(2)}});

    Json j = parseObject(raw);
    InstructionBundle bundle;
    for (ScriptCategory category : kAllCategories) {
        const auto& wanted = plan.segment(category);
        const Json* value = field(j, std::string(toString(category)));
        if (!wanted) continue; // segments absent from the plan stay absent
        if (!value) throw SchemaError("instruction output lacks the " + std::string(toString(category)) + " segment", raw);
        auto text = segmentText(*value, raw);
        if (!text) throw SchemaError("instruction output dropped the " + std::string(toString(category)) + " segment", raw);
        bundle.instruction(category) = *text;
    }

    std::vector<std::string> covered;
    for (ScriptCategory category : kAllCategories) {
        if (const auto& text = bundle.instruction(category)) {
            for (auto& n : bracketedNames(*text)) covered.push_back(n);
        }
    }
    std::vector<std::string> missing;
    for (const auto& n : params.names()) {
        if (std::find(covered.begin(), covered.end(), n) == covered.end()) missing.push_back(n);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& n : missing) list += (list.empty() ? "" : ", ") + n;
        throw SchemaError("instructions do not reference [" + list + "]", raw);
    }
    return bundle;
}

HelperResult PromptHelper::run(const std::string& userInput, const HelperContext& ctx, const FeedbackSink& sink) {
    auto emit = [&](FeedbackPhase phase, const std::string& detail) {
        if (sink) sink(phase, detail);
    };
    HelperResult result;
    result.plan = segment(userInput, ctx);
    emit(FeedbackPhase::Segmented, pinauthor::Json(result.plan).dump());

    std::optional<ParameterSet> inherited;
    if (result.plan.isFollowup && !ctx.priorTurns.empty()) {
        const InstructionBundle& previous = ctx.priorTurns.back().instructions;
        if (!result.plan.primitive) result.plan.primitive = previous.primitive;
        if (previous.primitive) {
            auto names = bracketedNames(*previous.primitive);
            if (!names.empty()) inherited = ParameterSet(names);
        }
    }
    result.params = inherited ? *inherited : generateParameters(result.plan);
    emit(FeedbackPhase::Parameters, pinauthor::Json(result.params).dump());

    for (int round = 0;; ++round) {
        ValidationVerdict verdict = validateParameters(result.params, result.plan);
        result.verdicts.push_back(verdict);
        if (verdict.success) {
            emit(FeedbackPhase::Validated, verdict.message);
            break;
        }
        if (round == kMaxValidationRounds) throw ValidationExhaustedError(kMaxValidationRounds);
        result.params = *verdict.updatedParams;
    }

    result.instructions = buildInstructions(result.plan, result.params);
    emit(FeedbackPhase::Instructed, pinauthor::Json(result.instructions).dump());
    return result;
}

} // namespace pinauthor::helper
