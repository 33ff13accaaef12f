#pragma once

#include "pinauthor/core/types.hpp"

#include <array>
#include <string_view>

namespace pinauthor::helper {

enum class PromptId {
    Segmentation,
    ParameterGeneration,
    ParameterInference,
    CodeInstruction,
    PrimitiveAgent,
    AnimationAgent,
    InteractionAgent,
};

inline constexpr std::array<PromptId, 7> kAllPrompts = {
    PromptId::Segmentation,   PromptId::ParameterGeneration, PromptId::ParameterInference,
    PromptId::CodeInstruction, PromptId::PrimitiveAgent,     PromptId::AnimationAgent,
    PromptId::InteractionAgent};

// Resource file stem under data/prompts, e.g. "segmentation".
std::string_view promptName(PromptId id);

// Exact bytes of the resource file, compiled into the binary.
std::string_view promptText(PromptId id);

PromptId generatorPrompt(ScriptCategory category);

} // namespace pinauthor::helper
