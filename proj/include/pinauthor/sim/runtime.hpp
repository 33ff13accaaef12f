#pragma once

#include "pinauthor/core/errors.hpp"
#include "pinauthor/core/height_field.hpp"
#include "pinauthor/core/types.hpp"
#include "pinauthor/sim/sandbox.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pinauthor::sim {

inline constexpr double kPressDepthRatio = 0.5;
inline constexpr double kTickRate = 30.0;
inline constexpr std::size_t kMaxSourceBytes = 256u * 1024;

enum class CompilePhase { Parse, Instantiate, Entrypoint, TrialFrame };

std::string_view toString(CompilePhase phase);

struct CompileError {
    CompilePhase phase = CompilePhase::Parse;
    std::string message;

    std::string describe() const;
};

class SceneError : public Error {
public:
    using Error::Error;
};

// A script fault during step(). The frame is still committed; `category`
// names the first stage that faulted.
class StepError : public Error {
public:
    StepError(ScriptCategory c, const std::string& message)
        : Error(std::string(pinauthor::toString(c)) + ": " + message), category(c) {}
    ScriptCategory category;
};

// Names of the initializer and per-frame entry points for a category.
struct EntryPoints {
    const char* initializer;
    const char* frame;
    int minFrameParams;
};
EntryPoints entryPointsFor(ScriptCategory category);

// Headless load check: parse, instantiate with the host surface, verify the
// entry points and run one guarded trial frame. `parentParams` seeds the
// parent map seen by animation and interaction scripts.
std::optional<CompileError> compileCheck(const std::string& source, ScriptCategory category,
                                         const ParamMap& parentParams = {});

// Evaluates the category's initializer and keeps its finite numeric entries,
// in declaration order. Throws SceneError when the script cannot be loaded.
ParamMap extractParameters(const std::string& source, ScriptCategory category);

class Scene {
public:
    // Exactly one primitive, at most one animation and one interaction.
    // Throws SceneError.
    static std::unique_ptr<Scene> load(const std::vector<ScriptArtifact>& artifacts);

    // Advance one frame. Throws StepError after committing the frame when a
    // stage faulted; the scene remains usable.
    const HeightField& step(double deltaTime);

    // Throws NotFoundError for names outside the primitive's parameters.
    void setParameter(const std::string& name, double value);
    // Throws NotFoundError for an unknown group.
    void pressButton(int groupId, bool pressed);
    void setPinPressing(std::size_t index, bool pressed);

    // Throws NotFoundError when the scene has no artifact of that category.
    void setEnabled(ScriptCategory category, bool enabled);
    bool enabled(ScriptCategory category) const;
    bool has(ScriptCategory category) const;

    ParamMap parentParams();
    ParamMap params(ScriptCategory category);
    const std::vector<SliderSpec>& sliders() const { return sliders_; }
    const std::vector<ButtonSpec>& buttons() const { return sandbox_.buttons(); }
    const std::vector<PinState>& pins() const { return sandbox_.pins(); }
    const HeightField& field() const { return field_; }
    std::uint64_t frame() const { return frame_; }

private:
    Scene() = default;

    struct Stage {
        bool present = false;
        bool enabled = true;
        script::Env* scope = nullptr;
        script::Value frameFn;
        script::Value params;
    };

    Stage& stage(ScriptCategory category) { return stages_[static_cast<std::size_t>(category)]; }
    const Stage& stage(ScriptCategory category) const { return stages_[static_cast<std::size_t>(category)]; }
    std::vector<script::Value> roots() const;

    Sandbox sandbox_;
    std::array<Stage, 3> stages_;
    std::vector<std::string> parentNames_;
    std::vector<SliderSpec> sliders_;
    HeightField field_;
    std::uint64_t frame_ = 0;
};

} // namespace pinauthor::sim
