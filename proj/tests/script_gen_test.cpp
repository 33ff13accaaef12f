#include "pinauthor/gen/generator.hpp"
#include "pinauthor/helper/prompts.hpp"
#include "pinauthor/sim/runtime.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace pinauthor;
using namespace pinauthor::gen;
using llm::Json;

namespace {

struct Rig {
    std::shared_ptr<llm::ScriptedTransport> transport = std::make_shared<llm::ScriptedTransport>();
    llm::Gateway gateway{[] {
                             llm::ModelConfig c;
                             c.mode = llm::Mode::Live;
                             return c;
                         }(),
                         transport};
    rag::ExampleStore examples{gateway};
    ScriptGenerator generator{gateway, examples, "generator-model"};
    Session session;

    Rig() { examples.load(testing_support::sourcePath("data/rag")); }

    void reply(ScriptCategory category, const std::string& source, const std::string& message = "done") {
        transport->enqueueChat(Json{{"type", toString(category)}, {"message", message}, {"content", source}}.dump());
    }
    const Json& messages(std::size_t i) const { return transport->requests().at(i)["body"]["messages"]; }
};

const std::string kSquare = testing_support::readFile("data/scripts/square_primitive.js");
const std::string kBounce = testing_support::readFile("data/scripts/bounce_animation.js");
const std::string kButtons = testing_support::readFile("data/scripts/two_button_interaction.js");

const ParamMap& squareParams() {
    static const ParamMap params = sim::extractParameters(kSquare, ScriptCategory::Primitive);
    return params;
}

GeneratorRequest primitiveRequest() {
    GeneratorRequest r;
    r.category = ScriptCategory::Primitive;
    r.instruction = "Create a square using [squarePosX], [squarePosY], [squareScale], [squareRotation], [squareHeight]";
    r.parameterNames = {"squareScale", "squarePosX", "squarePosY", "squareRotation", "squareHeight"};
    return r;
}

GeneratorRequest childRequest(ScriptCategory c, std::string instruction) {
    GeneratorRequest r;
    r.category = c;
    r.instruction = std::move(instruction);
    r.parentParams = squareParams();
    return r;
}

} // namespace

TEST(StructuredOutput, ParsesExactFencedAndFiveFieldForms) {
    auto exact = parseStructuredOutput(R"({"type":"animation","message":"bounce","content":"function f(){}"})");
    EXPECT_EQ(exact.category, ScriptCategory::Animation);
    EXPECT_EQ(exact.message, "bounce");
    EXPECT_EQ(exact.source, "function f(){}");

    auto fenced = parseStructuredOutput("Here you go:\n```json\n{\"type\": \"primitive\", \"message\": \"m\", "
                                        "\"content\": \"let a = 1;\\nlet b = 2;\"}\n```\nEnjoy.");
    EXPECT_EQ(fenced.category, ScriptCategory::Primitive);
    EXPECT_EQ(fenced.source, "let a = 1;\nlet b = 2;");

    auto five = parseStructuredOutput(
        R"({"category":"interaction","explanation":"two buttons","code":"x","parameters":[],"buttons":[]})");
    EXPECT_EQ(five.category, ScriptCategory::Interaction);
    EXPECT_EQ(five.message, "two buttons");
    EXPECT_EQ(five.explanation, "two buttons");
}

TEST(StructuredOutput, RejectsUnusableReplies) {
    for (const char* bad : {"no json here", R"({"type":"colorize","message":"m","content":"x"})",
                            R"({"type":"primitive","message":"m"})", R"({"type":"primitive","content":"x"})",
                            R"({"type":"primitive","message":"m","content":"  \n"})",
                            R"({"message":"m","content":"x"})"}) {
        try {
            parseStructuredOutput(bad);
            ADD_FAILURE() << bad;
        } catch (const StructuredOutputError& e) {
            EXPECT_EQ(e.raw, bad);
        }
    }
}

TEST(GeneratorRequest, Preconditions) {
    GeneratorRequest r = primitiveRequest();
    EXPECT_NO_THROW(r.validate());
    r.instruction.clear();
    EXPECT_THROW(r.validate(), ValidationError);
    GeneratorRequest anim = childRequest(ScriptCategory::Animation, "bounce");
    anim.parentParams.reset();
    EXPECT_THROW(anim.validate(), ValidationError);
    GeneratorRequest repair = primitiveRequest();
    repair.compileError = "boom";
    EXPECT_THROW(repair.validate(), ValidationError);
}

TEST(ScriptGenerator, PromptLayout) {
    Rig rig;
    auto msgs = rig.generator.assemblePrompt(primitiveRequest());
    ASSERT_EQ(msgs.size(), 1 + 2 * rag::kDefaultTopK + 1);
    EXPECT_EQ(msgs[0].role, llm::Role::System);
    EXPECT_EQ(msgs[0].content, helper::promptText(helper::PromptId::PrimitiveAgent));
    for (std::size_t i = 0; i < rag::kDefaultTopK; ++i) {
        EXPECT_EQ(msgs[1 + 2 * i].role, llm::Role::User);
        EXPECT_EQ(msgs[2 + 2 * i].role, llm::Role::Assistant);
        Json example = Json::parse(msgs[2 + 2 * i].content);
        EXPECT_EQ(example["type"], "primitive");
    }
    Json input = Json::parse(msgs.back().content);
    EXPECT_EQ(input["parameters"].size(), 5u);
    EXPECT_FALSE(input.contains("parentparams"));
    EXPECT_FALSE(input.contains("previousScript"));

    auto anim = rig.generator.assemblePrompt(childRequest(ScriptCategory::Animation, "bounce the square"));
    EXPECT_EQ(anim[0].content, helper::promptText(helper::PromptId::AnimationAgent));
    Json animInput = Json::parse(anim.back().content);
    EXPECT_EQ(animInput["parentparams"]["squarePosX"], *squareParams().get("squarePosX"));
    EXPECT_FALSE(animInput.contains("parameters"));
}

TEST(ScriptGenerator, GeneratesEachCategory) {
    Rig rig;
    rig.reply(ScriptCategory::Primitive, kSquare, "a square");
    ScriptArtifact prim = rig.generator.generateScript(primitiveRequest(), rig.session);
    EXPECT_EQ(prim.category, ScriptCategory::Primitive);
    EXPECT_EQ(prim.source, kSquare);
    EXPECT_EQ(prim.message, "a square");
    EXPECT_EQ(prim.parameters, squareParams());
    EXPECT_FALSE(sim::compileCheck(prim.source, prim.category));

    rig.reply(ScriptCategory::Animation, kBounce);
    ScriptArtifact anim =
        rig.generator.generateScript(childRequest(ScriptCategory::Animation, "bounce left and right"), rig.session);
    EXPECT_EQ(anim.category, ScriptCategory::Animation);
    EXPECT_FALSE(anim.parameters.empty());
    EXPECT_FALSE(sim::compileCheck(anim.source, anim.category, prim.parameters));

    rig.reply(ScriptCategory::Interaction, kButtons);
    ScriptArtifact inter =
        rig.generator.generateScript(childRequest(ScriptCategory::Interaction, "two buttons"), rig.session);
    EXPECT_EQ(inter.category, ScriptCategory::Interaction);
    EXPECT_FALSE(sim::compileCheck(inter.source, inter.category, prim.parameters));

    for (ScriptCategory c : kAllCategories) EXPECT_TRUE(rig.session.generatorMemory(c));
    EXPECT_EQ(rig.transport->requests().at(0)["body"]["model"], "generator-model");
}

TEST(ScriptGenerator, CategoryMismatchIsRejected) {
    Rig rig;
    rig.reply(ScriptCategory::Animation, kBounce);
    try {
        rig.generator.generateScript(primitiveRequest(), rig.session);
        FAIL();
    } catch (const CategoryError& e) {
        EXPECT_EQ(e.wanted, ScriptCategory::Primitive);
        EXPECT_EQ(e.got, ScriptCategory::Animation);
    }
    EXPECT_FALSE(rig.session.generatorMemory(ScriptCategory::Primitive));
}

TEST(ScriptGenerator, MemoryHoldsOnlyTheLatestSource) {
    Rig rig;
    rig.reply(ScriptCategory::Primitive, "function initializeParams(){return {h:1};}\nfunction dynamicScript(){}");
    rig.generator.generateScript(primitiveRequest(), rig.session);
    rig.reply(ScriptCategory::Primitive, kSquare);
    rig.generator.generateScript(primitiveRequest(), rig.session);
    EXPECT_EQ(rig.session.generatorMemory(ScriptCategory::Primitive), kSquare);
    EXPECT_FALSE(rig.session.generatorMemory(ScriptCategory::Animation));
}

TEST(ScriptGenerator, TokenEconomyKeepsOnlyOnePreviousScript) {
    Rig rig;
    for (int i = 0; i < 3; ++i) {
        rig.reply(ScriptCategory::Primitive, kSquare + "\n// revision " + std::to_string(i));
        rig.generator.generateScript(primitiveRequest(), rig.session);
    }
    GeneratorRequest repair = primitiveRequest();
    rig.reply(ScriptCategory::Primitive, kSquare);
    rig.generator.regenerateOnError(repair, "SyntaxError: boom", rig.session);
    std::string prompt = rig.messages(3).dump();
    EXPECT_NE(prompt.find("revision 2"), std::string::npos);
    EXPECT_EQ(prompt.find("revision 1"), std::string::npos);
    EXPECT_EQ(prompt.find("revision 0"), std::string::npos);
}

TEST(ScriptGenerator, RegenerateWithoutMemoryIsInvalidState) {
    Rig rig;
    EXPECT_THROW(rig.generator.regenerateOnError(primitiveRequest(), "err", rig.session), InvalidStateError);
    EXPECT_EQ(rig.transport->calls(), 0);
}

TEST(ScriptGenerator, RegenerationRepairsABrokenScript) {
    Rig rig;
    std::string broken = kSquare.substr(0, kSquare.size() / 2);
    rig.reply(ScriptCategory::Primitive, broken);
    ScriptArtifact first = rig.generator.generateScript(primitiveRequest(), rig.session);
    auto error = sim::compileCheck(first.source, first.category);
    ASSERT_TRUE(error);

    rig.reply(ScriptCategory::Primitive, kSquare);
    ScriptArtifact fixed = rig.generator.regenerateOnError(primitiveRequest(), error->describe(), rig.session);
    EXPECT_FALSE(sim::compileCheck(fixed.source, fixed.category));

    Json input = Json::parse(rig.messages(1).back()["content"].get<std::string>());
    EXPECT_EQ(input["previousScript"], broken);
    EXPECT_EQ(input["compileError"], error->describe());
    EXPECT_EQ(rig.session.generatorMemory(ScriptCategory::Primitive), kSquare);
}

TEST(ScriptGenerator, SuccessiveRepairsProduceDistinctFixtureKeys) {
    Rig rig;
    rig.reply(ScriptCategory::Primitive, "function initializeParams( {");
    rig.generator.generateScript(primitiveRequest(), rig.session);
    rig.reply(ScriptCategory::Primitive, "function initializeParams() { return {");
    rig.generator.regenerateOnError(primitiveRequest(), "first error", rig.session);
    rig.reply(ScriptCategory::Primitive, kSquare);
    rig.generator.regenerateOnError(primitiveRequest(), "second error", rig.session);
    std::set<std::string> keys;
    for (int i = 0; i < 3; ++i) {
        keys.insert(llm::fixtureKey("generator-model", llm::messagesFromJson(rig.messages(i))));
    }
    EXPECT_EQ(keys.size(), 3u);
}
