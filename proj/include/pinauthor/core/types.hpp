#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pinauthor {

enum class ScriptCategory { Primitive, Animation, Interaction };

inline constexpr std::array<ScriptCategory, 3> kAllCategories = {
    ScriptCategory::Primitive, ScriptCategory::Animation, ScriptCategory::Interaction};

// Lowercase wire label: "primitive", "animation", "interaction".
std::string_view toString(ScriptCategory category);
// Case-insensitive; nullopt for anything outside the three labels.
std::optional<ScriptCategory> parseCategory(std::string_view label);

bool isIdentifier(std::string_view name);

// Ordered name -> value map that remembers insertion order, which is what
// sliders and prompts present to the user.
class ParamMap {
public:
    using Entry = std::pair<std::string, double>;

    ParamMap() = default;
    ParamMap(std::initializer_list<Entry> entries);

    void set(const std::string& name, double value);
    std::optional<double> get(std::string_view name) const;
    bool contains(std::string_view name) const { return get(name).has_value(); }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    const std::vector<Entry>& entries() const { return entries_; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    friend bool operator==(const ParamMap&, const ParamMap&) = default;

private:
    std::vector<Entry> entries_;
};

struct ScriptArtifact {
    ScriptCategory category = ScriptCategory::Primitive;
    std::string message;
    std::string source;
    ParamMap parameters;
    std::optional<std::string> explanation;
    std::string originPrompt;

    // Throws ValidationError when parameter names are empty/duplicated or
    // values are not finite.
    void validate() const;

    friend bool operator==(const ScriptArtifact&, const ScriptArtifact&) = default;
};

struct SegmentPlan {
    bool isFollowup = false;
    std::optional<std::string> primitive;
    std::optional<std::string> animation;
    std::optional<std::string> interaction;

    const std::optional<std::string>& segment(ScriptCategory category) const;
    std::size_t segmentCount() const;
    void validate() const;

    friend bool operator==(const SegmentPlan&, const SegmentPlan&) = default;
};

// Unique identifier names, in the order the model produced them.
class ParameterSet {
public:
    ParameterSet() = default;
    explicit ParameterSet(std::vector<std::string> names);

    const std::vector<std::string>& names() const { return names_; }
    bool contains(std::string_view name) const;
    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }

    // Names of `this` followed by names of `other` not already present.
    ParameterSet unionWith(const ParameterSet& other) const;

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

private:
    std::vector<std::string> names_;
};

struct ValidationVerdict {
    bool success = false;
    std::string message;
    std::optional<ParameterSet> updatedParams;

    void validate() const;
};

struct InstructionBundle {
    std::optional<std::string> primitive;
    std::optional<std::string> animation;
    std::optional<std::string> interaction;

    const std::optional<std::string>& instruction(ScriptCategory category) const;
    std::optional<std::string>& instruction(ScriptCategory category);

    friend bool operator==(const InstructionBundle&, const InstructionBundle&) = default;
};

using CardId = std::string;

struct HistoryCard {
    CardId id;
    std::optional<CardId> parentId;
    std::string userInput;
    SegmentPlan plan;
    ParameterSet params;
    InstructionBundle instructions;
    std::vector<ScriptArtifact> artifacts;
    std::vector<bool> enabled;
    std::int64_t createdAt = 0; // ms since epoch

    friend bool operator==(const HistoryCard&, const HistoryCard&) = default;
};

struct HelperTurn {
    std::string userInput;
    InstructionBundle instructions;

    friend bool operator==(const HelperTurn&, const HelperTurn&) = default;
};

// Pipeline progress reported to clients, in canonical order.
enum class FeedbackPhase {
    Segmented,
    Parameters,
    Validated,
    Instructed,
    GeneratedPrimitive,
    GeneratedAnimation,
    GeneratedInteraction,
    Loaded,
    Error,
};

// "segmented", ..., "generated:primitive", ..., "loaded", "error".
std::string_view toString(FeedbackPhase phase);
std::optional<FeedbackPhase> parseFeedbackPhase(std::string_view label);
FeedbackPhase generatedPhase(ScriptCategory category);

struct SliderSpec {
    std::string name;
    double initial = 0.0;
    double min = 0.0;
    double max = 0.0;
};

} // namespace pinauthor
