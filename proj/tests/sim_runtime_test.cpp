#include "pinauthor/sim/runtime.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

using namespace pinauthor;
using namespace pinauthor::sim;
using testing_support::readFile;

namespace {

ScriptArtifact artifact(ScriptCategory category, const std::string& file) {
    ScriptArtifact a;
    a.category = category;
    a.source = readFile("data/scripts/" + file);
    return a;
}

ScriptArtifact square() { return artifact(ScriptCategory::Primitive, "square_primitive.js"); }
ScriptArtifact bounce() { return artifact(ScriptCategory::Animation, "bounce_animation.js"); }
ScriptArtifact twoButtons() { return artifact(ScriptCategory::Interaction, "two_button_interaction.js"); }

ScriptArtifact inlineScript(ScriptCategory category, std::string source) {
    ScriptArtifact a;
    a.category = category;
    a.source = std::move(source);
    return a;
}

// Independent re-implementation of the square's rotation/bounds math.
HeightField squareOracle(double scale, double posX, double posY, double rotation, double height) {
    HeightField field;
    double halfX = kGridX * scale / 2;
    double halfY = kGridY * scale / 2;
    for (int row = 0; row < kGridY; ++row) {
        for (int col = 0; col < kGridX; ++col) {
            double dx = col - posX;
            double dy = row - posY;
            double rx = dx * std::cos(-rotation) - dy * std::sin(-rotation);
            double ry = dx * std::sin(-rotation) + dy * std::cos(-rotation);
            bool inside = rx >= -halfX && rx <= halfX && ry >= -halfY && ry <= halfY;
            field.set(col, row, inside ? height : 0.0);
        }
    }
    return field;
}

int countAt(const HeightField& f, double h) {
    int n = 0;
    for (double v : f.heights()) n += v == h;
    return n;
}

} // namespace

TEST(CompileCheck, ReferenceScriptsPass) {
    EXPECT_FALSE(compileCheck(square().source, ScriptCategory::Primitive));
    ParamMap parent{{"squarePosX", 12}};
    EXPECT_FALSE(compileCheck(bounce().source, ScriptCategory::Animation, parent));
    EXPECT_FALSE(compileCheck(twoButtons().source, ScriptCategory::Interaction, parent));
}

TEST(CompileCheck, Phases) {
    auto parse = compileCheck("function initializeParams( {", ScriptCategory::Primitive);
    ASSERT_TRUE(parse);
    EXPECT_EQ(parse->phase, CompilePhase::Parse);

    auto instantiate = compileCheck("undefinedHelper();", ScriptCategory::Primitive);
    ASSERT_TRUE(instantiate);
    EXPECT_EQ(instantiate->phase, CompilePhase::Instantiate);
    EXPECT_NE(instantiate->message.find("ReferenceError"), std::string::npos);

    auto entry = compileCheck("function initializeParams() { return { h: 1 }; }", ScriptCategory::Primitive);
    ASSERT_TRUE(entry);
    EXPECT_EQ(entry->phase, CompilePhase::Entrypoint);
    EXPECT_NE(entry->message.find("dynamicScript"), std::string::npos);

    auto arity = compileCheck("function initializeParams() { return {}; } function dynamicScript(dt, p) {}",
                              ScriptCategory::Animation);
    ASSERT_TRUE(arity);
    EXPECT_EQ(arity->phase, CompilePhase::Entrypoint);

    auto trial = compileCheck("function initializeParams() { return {}; } function dynamicScript(dt, p) { p.a.b = 1; }",
                              ScriptCategory::Primitive);
    ASSERT_TRUE(trial);
    EXPECT_EQ(trial->phase, CompilePhase::TrialFrame);
    EXPECT_NE(trial->message.find("TypeError"), std::string::npos);

    auto loop = compileCheck("function initializeParams() { return {}; } function dynamicScript() { for (;;) {} }",
                             ScriptCategory::Primitive);
    ASSERT_TRUE(loop);
    EXPECT_EQ(loop->phase, CompilePhase::TrialFrame);

    auto wrongCategory = compileCheck(square().source, ScriptCategory::Interaction);
    ASSERT_TRUE(wrongCategory);
    EXPECT_EQ(wrongCategory->phase, CompilePhase::Entrypoint);
}

TEST(Scene, SquareMatchesOracle) {
    auto start = std::chrono::steady_clock::now();
    auto scene = Scene::load({square()});
    const HeightField& f = scene->step(1.0 / 30);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
    EXPECT_EQ(f, squareOracle(0.5, 12, 12, 0, 25));
    EXPECT_EQ(countAt(f, 25), 13 * 13);
    EXPECT_EQ(scene->parentParams().size(), 5u);
    EXPECT_EQ(*scene->parentParams().get("squarePosX"), 12);
}

TEST(Scene, SquareOracleUnderParameterSweep) {
    auto scene = Scene::load({square()});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pos(-4, 28), rot(-3.2, 3.2), scale(0.05, 1.2), h(-20, 140);
    for (int trial = 0; trial < 40; ++trial) {
        double s = scale(rng), x = pos(rng), y = pos(rng), r = rot(rng), ht = h(rng);
        scene->setParameter("squareScale", s);
        scene->setParameter("squarePosX", x);
        scene->setParameter("squarePosY", y);
        scene->setParameter("squareRotation", r);
        scene->setParameter("squareHeight", ht);
        EXPECT_EQ(scene->step(0.1), squareOracle(s, x, y, r, ht)) << "trial " << trial;
    }
}

TEST(Scene, SetParameterCases) {
    auto scene = Scene::load({square()});
    scene->setParameter("squareHeight", 60);
    EXPECT_EQ(scene->step(0.1), squareOracle(0.5, 12, 12, 0, 60));
    scene->setParameter("squarePosX", 0);
    const HeightField& f = scene->step(0.1);
    EXPECT_EQ(f, squareOracle(0.5, 0, 12, 0, 60));
    EXPECT_EQ(countAt(f, 60), 7 * 13);
    EXPECT_THROW(scene->setParameter("nope", 1), NotFoundError);
}

TEST(Scene, BounceTrajectory) {
    auto scene = Scene::load({square(), bounce()});
    double x = 12;
    int direction = 1;
    for (int i = 0; i < 100; ++i) {
        scene->step(1.0 / 30);
        if (x >= kGridX || x <= 0) direction *= -1;
        x += direction * 2 * (1.0 / 30);
        EXPECT_NEAR(*scene->parentParams().get("squarePosX"), x, 1e-9) << "step " << i;
    }
}

TEST(Scene, BounceFlipsAtBounds) {
    auto scene = Scene::load({square(), bounce()});
    scene->setParameter("squarePosX", 23);
    double x = 23;
    int direction = 1;
    int flips = 0;
    for (int i = 0; i < 100; ++i) {
        scene->step(1.0 / 30);
        if (x >= kGridX || x <= 0) {
            direction *= -1;
            ++flips;
        }
        x += direction * 2 * (1.0 / 30);
        ASSERT_NEAR(*scene->parentParams().get("squarePosX"), x, 1e-9) << "step " << i;
    }
    EXPECT_GE(flips, 1);
}

TEST(Scene, ButtonsFromInteractionExample) {
    auto scene = Scene::load({square(), twoButtons()});
    const auto& pins = scene->pins();
    int buttons = 0;
    for (const auto& p : pins) buttons += p.isButton;
    EXPECT_EQ(buttons, 2);
    EXPECT_TRUE(pins[pinIndex(16, 20)].isButton);
    EXPECT_EQ(pins[pinIndex(16, 20)].buttonGroupId, 1);
    EXPECT_TRUE(pins[pinIndex(8, 20)].isButton);
    EXPECT_EQ(pins[pinIndex(8, 20)].buttonGroupId, 2);

    const HeightField& f = scene->step(1.0 / 30);
    EXPECT_EQ(f.at(16, 20), 50);
    EXPECT_EQ(f.at(8, 20), 50);
}

TEST(Scene, PressMovesSquare) {
    for (int k : {1, 3, 10}) {
        auto scene = Scene::load({square(), twoButtons()});
        scene->pressButton(1, true);
        double expected = 12;
        for (int i = 0; i < k; ++i) {
            scene->step(1.0 / 30);
            expected += 0.1;
        }
        EXPECT_EQ(*scene->parentParams().get("squarePosX"), expected);
        EXPECT_NEAR(*scene->parentParams().get("squarePosX") - 12, k * 0.1, 1e-12);
        EXPECT_EQ(scene->field().at(16, 20), 25); // pressed at half depth
        scene->pressButton(1, false);
        scene->step(1.0 / 30);
        EXPECT_EQ(scene->field().at(16, 20), 50);
        EXPECT_EQ(*scene->parentParams().get("squarePosX"), expected);
    }
}

TEST(Scene, PressUnknownGroup) {
    auto scene = Scene::load({square(), twoButtons()});
    EXPECT_THROW(scene->pressButton(9, true), NotFoundError);
}

TEST(Scene, LoadErrors) {
    EXPECT_THROW(Scene::load({}), SceneError);
    EXPECT_THROW(Scene::load({bounce()}), SceneError);
    EXPECT_THROW(Scene::load({square(), square()}), SceneError);
    EXPECT_THROW(Scene::load({square(), bounce(), bounce()}), SceneError);
}

TEST(Scene, DisabledAnimationFreezesParams) {
    auto scene = Scene::load({square(), bounce(), twoButtons()});
    scene->setEnabled(ScriptCategory::Animation, false);
    scene->setEnabled(ScriptCategory::Interaction, false);
    ParamMap before = scene->parentParams();
    for (int i = 0; i < 10; ++i) scene->step(1.0 / 30);
    EXPECT_EQ(scene->parentParams(), before);
    scene->setEnabled(ScriptCategory::Animation, true);
    scene->step(1.0 / 30);
    EXPECT_NE(scene->parentParams(), before);
}

TEST(Scene, StepErrorDoesNotPoisonScene) {
    auto faulty = inlineScript(ScriptCategory::Animation, R"(
        function initializeParams() { return { n: 0 }; }
        function dynamicScript(dt, params, parent) {
            params.n += 1;
            if (params.n === 2) throw new Error('second frame');
            parent.squareHeight = 30;
        }
    )");
    auto scene = Scene::load({square(), faulty});
    scene->step(0.1);
    try {
        scene->step(0.1);
        FAIL() << "expected StepError";
    } catch (const StepError& e) {
        EXPECT_EQ(e.category, ScriptCategory::Animation);
        EXPECT_NE(std::string(e.what()).find("second frame"), std::string::npos);
    }
    EXPECT_EQ(countAt(scene->field(), 30), 169); // primitive still rendered
    EXPECT_EQ(scene->step(0.1), squareOracle(0.5, 12, 12, 0, 30));
}

TEST(Scene, HostileHeightsAreClamped) {
    auto hostile = inlineScript(ScriptCategory::Primitive, R"(
        function initializeParams() { return { k: 1 }; }
        function dynamicScript(dt, params) {
            const values = [-1e308, 1e308, NaN, Infinity, -Infinity, 'abc', {}, 55.5, 1e9, -3];
            ShapeDisplay.Pins.forEach((pin, i) => pin.setPos(values[i % values.length] * params.k));
        }
    )");
    auto scene = Scene::load({hostile});
    for (int i = 0; i < 5; ++i) {
        const HeightField& f = scene->step(0.1);
        EXPECT_GE(f.minHeight(), 0.0);
        EXPECT_LE(f.maxHeight(), 100.0);
        EXPECT_EQ(f.at(7, 0), 55.5);
    }
}

TEST(Scene, ButtonFootprints) {
    auto inter = inlineScript(ScriptCategory::Interaction, R"(
        function initializeInteractionParameters() {
            return { buttons: [
                { id: 4, size: 2, position: { x: 0, y: 0 }, init_height: 40 },
                { id: 7, size: 1, position: [23, 23], init_height: 80 },
            ] };
        }
        function dynamicInteraction(dt, params, parentParams) { initializeButtons(params); }
    )");
    auto scene = Scene::load({square(), inter});
    int buttons = 0;
    for (const auto& p : scene->pins()) buttons += p.isButton;
    EXPECT_EQ(buttons, 4 + 1);
    scene->pressButton(4, true);
    const HeightField& f = scene->step(0.1);
    EXPECT_EQ(f.at(0, 0), 20);
    EXPECT_EQ(f.at(1, 1), 20);
    EXPECT_EQ(f.at(23, 23), 80);

    auto outside = inlineScript(ScriptCategory::Interaction, R"(
        function initializeInteractionParameters() { return { buttons: [{ id: 1, size: 2, position: [23, 0], init_height: 40 }] }; }
        function dynamicInteraction(dt, params, parentParams) { initializeButtons(params); }
    )");
    EXPECT_THROW(Scene::load({square(), outside}), SceneError);
}

TEST(Scene, Determinism) {
    auto run = [] {
        auto scene = Scene::load({square(), bounce(), twoButtons()});
        std::vector<HeightField> frames;
        for (int i = 0; i < 300; ++i) {
            if (i == 50) scene->pressButton(2, true);
            if (i == 80) scene->pressButton(2, false);
            if (i == 120) scene->setParameter("squareRotation", 0.7);
            frames.push_back(scene->step(1.0 / 30));
        }
        return frames;
    };
    EXPECT_EQ(run(), run());
}

TEST(Scene, IsolationBetweenLoads) {
    auto leaky = inlineScript(ScriptCategory::Primitive, R"(
        var counter = (typeof counter === 'number') ? counter + 1 : 0;
        leaked = (typeof leaked === 'number') ? leaked + 1 : 100;
        function initializeParams() { return { h: 10 + counter + leaked }; }
        function dynamicScript(dt, params) { ShapeDisplay.getPin(0).setPos(params.h); }
    )");
    auto a = Scene::load({leaky});
    auto b = Scene::load({leaky});
    EXPECT_EQ(a->step(0.1).at(0, 0), 100);
    EXPECT_EQ(b->step(0.1).at(0, 0), 100);
}

TEST(Scene, HostSurfaceIsMinimal) {
    auto probe = inlineScript(ScriptCategory::Primitive, R"(
        function initializeParams() { return { h: 1 }; }
        function dynamicScript(dt, params) {
            const names = ['require', 'process', 'globalThis', 'window', 'Date', 'setTimeout', 'fetch', 'eval', 'XMLHttpRequest', 'performance'];
            const found = names.filter(n => { try { return eval_probe(n); } catch (e) { return false; } });
            ShapeDisplay.getPin(0).setPos(found.length);
            ShapeDisplay.getPin(1).setPos(typeof Date === 'undefined' && typeof require === 'undefined' ? 1 : 0);
            ShapeDisplay.getPin(2).setPos(Object.keys(ShapeDisplay).length);
            try { ShapeDisplay.Pins.push(1); } catch (e) { ShapeDisplay.getPin(4).setPos(e instanceof TypeError ? 9 : 0); }
            ShapeDisplay.grid_x = 5;
            ShapeDisplay.getPin(3).setPos(ShapeDisplay.grid_x + ShapeDisplay.Pins.length - 576);
        }
    )");
    auto scene = Scene::load({probe});
    const HeightField& f = scene->step(0.1);
    EXPECT_EQ(f.at(std::size_t{0}), 0);
    EXPECT_EQ(f.at(std::size_t{1}), 1);
    EXPECT_EQ(f.at(std::size_t{2}), 4);
    EXPECT_EQ(f.at(std::size_t{3}), 24);
    EXPECT_EQ(f.at(std::size_t{4}), 9);
}

TEST(Parameters, ExtractFromInitializers) {
    ParamMap prim = extractParameters(square().source, ScriptCategory::Primitive);
    ASSERT_EQ(prim.size(), 5u);
    EXPECT_EQ(prim.entries()[0].first, "squareScale");
    EXPECT_EQ(prim.entries()[4].first, "squareHeight");
    ParamMap inter = extractParameters(twoButtons().source, ScriptCategory::Interaction);
    ASSERT_EQ(inter.size(), 1u);
    EXPECT_EQ(*inter.get("moveSpeed"), 0.1);
    EXPECT_EQ(*extractParameters(bounce().source, ScriptCategory::Animation).get("speed"), 2);
    EXPECT_THROW(extractParameters("function nope() {}", ScriptCategory::Primitive), SceneError);
}

TEST(Scene, SlidersFollowBoundsRule) {
    auto scene = Scene::load({square()});
    ASSERT_EQ(scene->sliders().size(), 5u);
    for (const auto& s : scene->sliders()) {
        EXPECT_LE(s.min, s.initial);
        EXPECT_LE(s.initial, s.max);
    }
    EXPECT_EQ(scene->sliders()[1].name, "squarePosX");
    EXPECT_EQ(scene->sliders()[1].min, 4);
    EXPECT_EQ(scene->sliders()[1].max, 36);
}

TEST(Sandbox, HostileCorpusFailsFast) {
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(testing_support::sourcePath("data/hostile"))) {
        ++count;
        std::string source = readFile("data/hostile/" + entry.path().filename().string());
        auto start = std::chrono::steady_clock::now();
        auto error = compileCheck(source, ScriptCategory::Primitive);
        auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        ASSERT_TRUE(error) << entry.path();
        EXPECT_EQ(error->phase, CompilePhase::TrialFrame) << entry.path();
        EXPECT_LT(ms, 100.0) << entry.path();
    }
    EXPECT_GE(count, 20u);
}

TEST(Sandbox, ScriptTurningHostileLaterLeavesTheSceneUsable) {
    auto late = inlineScript(ScriptCategory::Primitive, R"(
        function initializeParams() { return { frame: 0 }; }
        function dynamicScript(dt, params) {
            params.frame += 1;
            if (params.frame === 3) { for (;;) {} }
            ShapeDisplay.getPin(0).setPos(40);
        }
    )");
    ASSERT_FALSE(compileCheck(late.source, ScriptCategory::Primitive));
    auto scene = Scene::load({late});
    scene->step(1.0 / 30);
    scene->step(1.0 / 30);
    auto start = std::chrono::steady_clock::now();
    EXPECT_THROW(scene->step(1.0 / 30), StepError);
    std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    EXPECT_LT(elapsed.count(), 100.0);
    EXPECT_EQ(scene->step(1.0 / 30).at(0), 40);
}
