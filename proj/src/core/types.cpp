#include "pinauthor/core/types.hpp"

#include "pinauthor/core/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace pinauthor {

std::string_view toString(ScriptCategory category) {
    switch (category) {
    case ScriptCategory::Primitive: return "primitive";
    case ScriptCategory::Animation: return "animation";
    case ScriptCategory::Interaction: return "interaction";
    }
    return "primitive";
}

std::optional<ScriptCategory> parseCategory(std::string_view label) {
    std::string lower(label);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto category : kAllCategories) {
        if (lower == toString(category)) return category;
    }
    return std::nullopt;
}

std::string_view toString(FeedbackPhase phase) {
    switch (phase) {
    case FeedbackPhase::Segmented: return "segmented";
    case FeedbackPhase::Parameters: return "parameters";
    case FeedbackPhase::Validated: return "validated";
    case FeedbackPhase::Instructed: return "instructed";
    case FeedbackPhase::GeneratedPrimitive: return "generated:primitive";
    case FeedbackPhase::GeneratedAnimation: return "generated:animation";
    case FeedbackPhase::GeneratedInteraction: return "generated:interaction";
    case FeedbackPhase::Loaded: return "loaded";
    case FeedbackPhase::Error: return "error";
    }
    return "error";
}

std::optional<FeedbackPhase> parseFeedbackPhase(std::string_view label) {
    for (int i = 0; i <= static_cast<int>(FeedbackPhase::Error); ++i) {
        auto phase = static_cast<FeedbackPhase>(i);
        if (label == toString(phase)) return phase;
    }
    return std::nullopt;
}

FeedbackPhase generatedPhase(ScriptCategory category) {
    switch (category) {
    case ScriptCategory::Primitive: return FeedbackPhase::GeneratedPrimitive;
    case ScriptCategory::Animation: return FeedbackPhase::GeneratedAnimation;
    case ScriptCategory::Interaction: return FeedbackPhase::GeneratedInteraction;
    }
    return FeedbackPhase::GeneratedPrimitive;
}

bool isIdentifier(std::string_view name) {
    if (name.empty()) return false;
    auto first = static_cast<unsigned char>(name.front());
    if (!(std::isalpha(first) || first == '_')) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_';
    });
}

ParamMap::ParamMap(std::initializer_list<Entry> entries) {
    for (const auto& [name, value] : entries) set(name, value);
}

void ParamMap::set(const std::string& name, double value) {
    for (auto& entry : entries_) {
        if (entry.first == name) {
            entry.second = value;
            return;
        }
    }
    entries_.emplace_back(name, value);
}

std::optional<double> ParamMap::get(std::string_view name) const {
    for (const auto& entry : entries_) {
        if (entry.first == name) return entry.second;
    }
    return std::nullopt;
}

void ScriptArtifact::validate() const {
    std::set<std::string_view> seen;
    for (const auto& [name, value] : parameters) {
        if (name.empty()) throw ValidationError("artifact parameter with empty name");
        if (!seen.insert(name).second) {
            throw ValidationError("duplicate artifact parameter '" + name + "'");
        }
        if (!std::isfinite(value)) {
            throw ValidationError("artifact parameter '" + name + "' is not finite");
        }
    }
}

const std::optional<std::string>& SegmentPlan::segment(ScriptCategory category) const {
    switch (category) {
    case ScriptCategory::Primitive: return primitive;
    case ScriptCategory::Animation: return animation;
    case ScriptCategory::Interaction: return interaction;
    }
    return primitive;
}

std::size_t SegmentPlan::segmentCount() const {
    return static_cast<std::size_t>(primitive.has_value()) + animation.has_value() +
           interaction.has_value();
}

void SegmentPlan::validate() const {
    if (!isFollowup && !primitive) {
        throw ValidationError("a new (non-follow-up) request must carry a primitive segment");
    }
}

ParameterSet::ParameterSet(std::vector<std::string> names) : names_(std::move(names)) {
    std::set<std::string_view> seen;
    for (const auto& name : names_) {
        if (!isIdentifier(name)) {
            throw ValidationError("parameter name '" + name + "' is not a valid identifier");
        }
        if (!seen.insert(name).second) {
            throw ValidationError("duplicate parameter name '" + name + "'");
        }
    }
}

bool ParameterSet::contains(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

ParameterSet ParameterSet::unionWith(const ParameterSet& other) const {
    auto merged = names_;
    for (const auto& name : other.names_) {
        if (!contains(name)) merged.push_back(name);
    }
    return ParameterSet(std::move(merged));
}

void ValidationVerdict::validate() const {
    if (success && updatedParams) {
        throw ValidationError("successful verdict must not carry updatedParams");
    }
    if (!success && !updatedParams) {
        throw ValidationError("failed verdict must carry updatedParams");
    }
}

const std::optional<std::string>& InstructionBundle::instruction(ScriptCategory category) const {
    switch (category) {
    case ScriptCategory::Primitive: return primitive;
    case ScriptCategory::Animation: return animation;
    case ScriptCategory::Interaction: return interaction;
    }
    return primitive;
}

std::optional<std::string>& InstructionBundle::instruction(ScriptCategory category) {
    switch (category) {
    case ScriptCategory::Primitive: return primitive;
    case ScriptCategory::Animation: return animation;
    case ScriptCategory::Interaction: return interaction;
    }
    return primitive;
}

} // namespace pinauthor
