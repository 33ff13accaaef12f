#include "pinauthor/helper/prompts.hpp"

namespace pinauthor::helper::resources {
std::string_view segmentation();
std::string_view parameter_generation();
std::string_view parameter_inference();
std::string_view code_instruction();
std::string_view primitive_agent();
std::string_view animation_agent();
std::string_view interaction_agent();
} // namespace pinauthor::helper::resources

namespace pinauthor::helper {

std::string_view promptName(PromptId id) {
    switch (id) {
    case PromptId::Segmentation: return "segmentation";
    case PromptId::ParameterGeneration: return "parameter_generation";
    case PromptId::ParameterInference: return "parameter_inference";
    case PromptId::CodeInstruction: return "code_instruction";
    case PromptId::PrimitiveAgent: return "primitive_agent";
    case PromptId::AnimationAgent: return "animation_agent";
    case PromptId::InteractionAgent: return "interaction_agent";
    }
    return "segmentation";
}

std::string_view promptText(PromptId id) {
    switch (id) {
    case PromptId::Segmentation: return resources::segmentation();
    case PromptId::ParameterGeneration: return resources::parameter_generation();
    case PromptId::ParameterInference: return resources::parameter_inference();
    case PromptId::CodeInstruction: return resources::code_instruction();
    case PromptId::PrimitiveAgent: return resources::primitive_agent();
    case PromptId::AnimationAgent: return resources::animation_agent();
    case PromptId::InteractionAgent: return resources::interaction_agent();
    }
    return {};
}

PromptId generatorPrompt(ScriptCategory category) {
    switch (category) {
    case ScriptCategory::Primitive: return PromptId::PrimitiveAgent;
    case ScriptCategory::Animation: return PromptId::AnimationAgent;
    case ScriptCategory::Interaction: return PromptId::InteractionAgent;
    }
    return PromptId::PrimitiveAgent;
}

} // namespace pinauthor::helper
