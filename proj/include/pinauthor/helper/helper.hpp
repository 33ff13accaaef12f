#pragma once

#include "pinauthor/core/errors.hpp"
#include "pinauthor/core/types.hpp"
#include "pinauthor/llm/gateway.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pinauthor::helper {

inline constexpr int kMaxValidationRounds = 2;

struct HelperContext {
    std::vector<HelperTurn> priorTurns; // oldest first
};

class ValidationExhaustedError : public Error {
public:
    explicit ValidationExhaustedError(int rounds)
        : Error("parameter validation still failing after " + std::to_string(rounds) + " adjustment rounds"),
          rounds(rounds) {}
    int rounds;
};

using FeedbackSink = std::function<void(FeedbackPhase, const std::string& detail)>;

struct HelperResult {
    SegmentPlan plan; // follow-ups carry the previous primitive instruction when none was given
    ParameterSet params;
    InstructionBundle instructions;
    std::vector<ValidationVerdict> verdicts;
};

// Identifier names written as `[name]`, in order of first appearance.
std::vector<std::string> bracketedNames(std::string_view text);

// Height-like: the name contains "height" in any case.
bool hasHeightParameter(const ParameterSet& params);

// JSON object fed to the chains: the three segment keys with "None" for
// absent segments.
llm::Json segmentsJson(const SegmentPlan& plan);

class PromptHelper {
public:
    PromptHelper(llm::Gateway& gateway, std::string model) : gateway_(gateway), model_(std::move(model)) {}

    // Each chain throws SchemaError for unusable model output and
    // ValidationError for violated preconditions.
    SegmentPlan segment(const std::string& userInput, const HelperContext& ctx);
    ParameterSet generateParameters(const SegmentPlan& plan);
    ValidationVerdict validateParameters(const ParameterSet& params, const SegmentPlan& plan);
    InstructionBundle buildInstructions(const SegmentPlan& plan, const ParameterSet& params);

    // segment -> parameters -> validate (adjusting up to kMaxValidationRounds
    // times) -> instructions, reporting each step to `sink`.
    HelperResult run(const std::string& userInput, const HelperContext& ctx, const FeedbackSink& sink = {});

private:
    std::string ask(std::string_view systemPrompt, std::vector<llm::ChatMessage> messages);

    llm::Gateway& gateway_;
    std::string model_;
};

} // namespace pinauthor::helper
