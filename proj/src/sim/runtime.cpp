#include "pinauthor/sim/runtime.hpp"

#include "pinauthor/core/slider.hpp"

#include <cmath>

namespace pinauthor::sim {

using script::Value;

namespace {

constexpr double kTrialDeltaTime = 1.0 / kTickRate;

ParamMap numericEntries(script::Interpreter& I, Value object) {
    ParamMap out;
    if (!object.isObject()) return out;
    for (script::Atom key : I.ownKeys(object.asObject())) {
        Value v = I.getProperty(object, key);
        if (v.isNumber() && std::isfinite(v.asNumber())) out.set(I.atomName(key), v.asNumber());
    }
    return out;
}

Value objectFrom(script::Interpreter& I, const ParamMap& params) {
    script::Object* o = I.newObject();
    for (const auto& [name, value] : params) I.set(Value::object(o), name, Value::number(value));
    return Value::object(o);
}

// Runs `body`, turning every script-side failure into a message.
template <typename Fn>
std::optional<std::string> guarded(Fn&& body) {
    try {
        body();
        return std::nullopt;
    } catch (const script::SyntaxError& e) {
        return std::string(e.what());
    } catch (const script::ScriptError& e) {
        return std::string(e.what());
    } catch (const script::BudgetExceeded& e) {
        return std::string(e.what());
    } catch (const script::ThrowSignal&) {
        return std::string("uncaught exception during host conversion");
    } catch (const Error& e) {
        return std::string(e.what());
    }
}

std::optional<std::string> checkEntryPoints(Sandbox& sandbox, script::Env* scope, ScriptCategory category) {
    EntryPoints names = entryPointsFor(category);
    script::Interpreter& I = sandbox.interp();
    if (!I.isCallable(sandbox.lookup(scope, names.initializer))) {
        return std::string("missing entry point '") + names.initializer + "'";
    }
    Value frame = sandbox.lookup(scope, names.frame);
    if (!I.isCallable(frame)) return std::string("missing entry point '") + names.frame + "'";
    if (I.declaredParameterCount(frame) < names.minFrameParams) {
        return std::string("'") + names.frame + "' must accept (deltaTime, params, parentParams)";
    }
    return std::nullopt;
}

Value callInitializer(Sandbox& sandbox, script::Env* scope, ScriptCategory category) {
    script::Interpreter& I = sandbox.interp();
    EntryPoints names = entryPointsFor(category);
    I.beginFrame();
    Value params = I.call(sandbox.lookup(scope, names.initializer), Value(), {});
    if (!params.isObject()) throw ValidationError(std::string(names.initializer) + " must return an object");
    return params;
}

} // namespace

std::string_view toString(CompilePhase phase) {
    switch (phase) {
    case CompilePhase::Parse: return "parse";
    case CompilePhase::Instantiate: return "instantiate";
    case CompilePhase::Entrypoint: return "entrypoint";
    case CompilePhase::TrialFrame: return "trial-frame";
    }
    return "parse";
}

std::string CompileError::describe() const { return std::string(toString(phase)) + ": " + message; }

EntryPoints entryPointsFor(ScriptCategory category) {
    switch (category) {
    case ScriptCategory::Primitive: return {"initializeParams", "dynamicScript", 0};
    case ScriptCategory::Animation: return {"initializeParams", "dynamicScript", 3};
    case ScriptCategory::Interaction: return {"initializeInteractionParameters", "dynamicInteraction", 0};
    }
    return {"initializeParams", "dynamicScript", 0};
}

std::optional<CompileError> compileCheck(const std::string& source, ScriptCategory category,
                                         const ParamMap& parentParams) {
    if (source.size() > kMaxSourceBytes) {
        return CompileError{CompilePhase::Parse, "script exceeds " + std::to_string(kMaxSourceBytes) + " bytes"};
    }
    Sandbox sandbox;
    script::Interpreter& I = sandbox.interp();

    const script::Program* program = nullptr;
    try {
        program = &I.parse(source);
    } catch (const script::SyntaxError& e) {
        return CompileError{CompilePhase::Parse, e.what()};
    }

    script::Env* scope = I.newGlobalScope();
    if (auto failure = guarded([&] {
            I.beginFrame();
            I.run(*program, scope);
        })) {
        return CompileError{CompilePhase::Instantiate, *failure};
    }

    if (auto missing = checkEntryPoints(sandbox, scope, category)) {
        return CompileError{CompilePhase::Entrypoint, *missing};
    }

    if (auto failure = guarded([&] {
            Value params = callInitializer(sandbox, scope, category);
            Value parent = category == ScriptCategory::Primitive ? params : objectFrom(I, parentParams);
            if (category == ScriptCategory::Interaction) {
                sandbox.realizeButtons(sandbox.parseButtons(params));
                sandbox.syncPins();
            }
            I.beginFrame();
            sandbox.clearNonButtonPins();
            Value frame = sandbox.lookup(scope, entryPointsFor(category).frame);
            if (category == ScriptCategory::Primitive) {
                Value args[2] = {Value::number(kTrialDeltaTime), params};
                I.call(frame, Value(), args);
            } else {
                Value args[3] = {Value::number(kTrialDeltaTime), params, parent};
                I.call(frame, Value(), args);
            }
        })) {
        return CompileError{CompilePhase::TrialFrame, *failure};
    }
    return std::nullopt;
}

ParamMap extractParameters(const std::string& source, ScriptCategory category) {
    Sandbox sandbox;
    ParamMap out;
    if (auto failure = guarded([&] {
            script::Env* scope = sandbox.instantiate(source);
            if (auto missing = checkEntryPoints(sandbox, scope, category)) throw SceneError(*missing);
            out = numericEntries(sandbox.interp(), callInitializer(sandbox, scope, category));
        })) {
        throw SceneError("cannot extract " + std::string(pinauthor::toString(category)) + " parameters: " + *failure);
    }
    return out;
}

std::unique_ptr<Scene> Scene::load(const std::vector<ScriptArtifact>& artifacts) {
    std::array<const ScriptArtifact*, 3> byCategory{};
    for (const ScriptArtifact& a : artifacts) {
        auto& slot = byCategory[static_cast<std::size_t>(a.category)];
        if (slot) throw SceneError("scene has more than one " + std::string(pinauthor::toString(a.category)) + " script");
        slot = &a;
    }
    if (!byCategory[0]) throw SceneError("scene requires a primitive script");

    std::unique_ptr<Scene> scene(new Scene());
    script::Interpreter& I = scene->sandbox_.interp();
    for (ScriptCategory category : kAllCategories) {
        const ScriptArtifact* artifact = byCategory[static_cast<std::size_t>(category)];
        if (!artifact) continue;
        Stage& stage = scene->stage(category);
        if (auto failure = guarded([&] {
                if (artifact->source.size() > kMaxSourceBytes) throw SceneError("script too large");
                I.beginFrame();
                stage.scope = scene->sandbox_.instantiate(artifact->source);
                if (auto missing = checkEntryPoints(scene->sandbox_, stage.scope, category)) throw SceneError(*missing);
                stage.frameFn = scene->sandbox_.lookup(stage.scope, entryPointsFor(category).frame);
                stage.params = callInitializer(scene->sandbox_, stage.scope, category);
                if (category == ScriptCategory::Interaction) {
                    scene->sandbox_.realizeButtons(scene->sandbox_.parseButtons(stage.params));
                }
            })) {
            throw SceneError(std::string(pinauthor::toString(category)) + " script failed to load: " + *failure);
        }
        stage.present = true;
    }
    ParamMap parent = scene->parentParams();
    for (const auto& [name, value] : parent) scene->parentNames_.push_back(name);
    scene->sliders_ = slidersFor(parent);
    scene->sandbox_.syncPins();
    auto roots = scene->roots();
    I.collectGarbage(roots);
    return scene;
}

std::vector<Value> Scene::roots() const {
    std::vector<Value> out;
    for (const Stage& s : stages_) {
        out.push_back(s.frameFn);
        out.push_back(s.params);
    }
    return out;
}

const HeightField& Scene::step(double deltaTime) {
    if (!(deltaTime > 0) || !std::isfinite(deltaTime)) throw ValidationError("deltaTime must be positive and finite");
    script::Interpreter& I = sandbox_.interp();
    I.beginFrame();
    sandbox_.clearNonButtonPins();
    sandbox_.syncPins();

    std::optional<StepError> fault;
    Value parent = stage(ScriptCategory::Primitive).params;
    auto runStage = [&](ScriptCategory category) {
        Stage& s = stage(category);
        if (!s.present || !s.enabled) return;
        auto failure = guarded([&] {
            if (category == ScriptCategory::Primitive) {
                Value args[2] = {Value::number(deltaTime), parent};
                I.call(s.frameFn, Value(), args);
            } else {
                Value args[3] = {Value::number(deltaTime), s.params, parent};
                I.call(s.frameFn, Value(), args);
            }
        });
        if (failure && !fault) fault.emplace(category, *failure);
    };
    runStage(ScriptCategory::Interaction);
    runStage(ScriptCategory::Animation);
    runStage(ScriptCategory::Primitive);

    sandbox_.renderButtons(kPressDepthRatio);
    field_ = sandbox_.snapshot();
    ++frame_;
    auto r = roots();
    sandbox_.collect(r);
    if (fault) throw *fault;
    return field_;
}

void Scene::setParameter(const std::string& name, double value) {
    if (std::find(parentNames_.begin(), parentNames_.end(), name) == parentNames_.end()) {
        throw NotFoundError("unknown parameter '" + name + "'");
    }
    sandbox_.interp().set(stage(ScriptCategory::Primitive).params, name, Value::number(value));
}

void Scene::pressButton(int groupId, bool pressed) { sandbox_.setGroupPressing(groupId, pressed); }

void Scene::setPinPressing(std::size_t index, bool pressed) { sandbox_.setPinPressing(index, pressed); }

void Scene::setEnabled(ScriptCategory category, bool enabled) {
    Stage& s = stage(category);
    if (!s.present) throw NotFoundError("scene has no " + std::string(pinauthor::toString(category)) + " script");
    s.enabled = enabled;
}

bool Scene::enabled(ScriptCategory category) const { return stage(category).present && stage(category).enabled; }

bool Scene::has(ScriptCategory category) const { return stage(category).present; }

ParamMap Scene::parentParams() { return params(ScriptCategory::Primitive); }

ParamMap Scene::params(ScriptCategory category) {
    const Stage& s = stage(category);
    if (!s.present) return {};
    return numericEntries(sandbox_.interp(), s.params);
}

} // namespace pinauthor::sim
