#include "pinauthor/service/pipeline.hpp"

#include <chrono>

namespace pinauthor::service {

namespace {

std::int64_t nowMs() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

thread_local std::vector<std::string>* tlsKeys = nullptr;

struct KeyCapture {
    explicit KeyCapture(std::vector<std::string>& keys) { tlsKeys = &keys; }
    ~KeyCapture() { tlsKeys = nullptr; }
};

} // namespace

std::unique_ptr<sim::Scene> buildScene(const HistoryCard& card) {
    auto scene = sim::Scene::load(card.artifacts);
    for (std::size_t i = 0; i < card.artifacts.size(); ++i) {
        if (i < card.enabled.size() && !card.enabled[i]) scene->setEnabled(card.artifacts[i].category, false);
    }
    return scene;
}

AuthoringPipeline::AuthoringPipeline(llm::Gateway& gateway, const rag::ExampleStore& examples, PipelineConfig config)
    : gateway_(gateway),
      helper_(gateway, config.helperModel),
      generator_(gateway, examples, config.generatorModel),
      config_(std::move(config)) {
    if (config_.maxRegens < 0) throw ValidationError("maxRegens must be non-negative");
    gateway_.setListener([](const llm::CallRecord& record) {
        if (tlsKeys && record.kind == llm::CallRecord::Kind::Chat) tlsKeys->push_back(record.key);
    });
}

ScriptArtifact AuthoringPipeline::generateChecked(gen::GeneratorRequest req, Session& scratch,
                                                  const helper::FeedbackSink& sink, int& regenerations) {
    const ParamMap parent = req.parentParams.value_or(ParamMap{});
    ScriptArtifact artifact = generator_.generateScript(req, scratch);
    for (int attempt = 1;; ++attempt) {
        auto error = sim::compileCheck(artifact.source, req.category, parent);
        if (!error) break;
        std::string detail = std::string(toString(req.category)) + ": " + error->describe();
        if (sink) sink(FeedbackPhase::Error, detail);
        if (attempt > config_.maxRegens) throw GenerationFailedError(req.category, attempt, error->describe());
        ++regenerations;
        artifact = generator_.regenerateOnError(req, error->describe(), scratch);
    }
    if (sink) sink(generatedPhase(req.category), artifact.message);
    return artifact;
}

Submission AuthoringPipeline::submit(const Session& session, const std::string& text,
                                     const helper::FeedbackSink& sink) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ValidationError("prompt text must be non-empty");
    try {
        Submission out;
        KeyCapture capture(out.fixtureKeys);
        helper::HelperContext ctx{session.helperMemory()};
        helper::HelperResult helped = helper_.run(text, ctx, sink);

        Session scratch = session;
        HistoryCard& card = out.card;
        card.userInput = text;
        card.plan = helped.plan;
        card.params = helped.params;
        card.instructions = helped.instructions;

        const HistoryCard* previous = helped.plan.isFollowup ? session.activeCard() : nullptr;
        ParamMap parentParams;
        for (ScriptCategory category : kAllCategories) {
            const auto& instruction = card.instructions.instruction(category);
            if (!instruction) {
                if (!previous || category == ScriptCategory::Primitive) continue;
                for (const auto& old : previous->artifacts) {
                    if (old.category == category && !sim::compileCheck(old.source, category, parentParams)) {
                        card.artifacts.push_back(old);
                    }
                }
                continue;
            }
            gen::GeneratorRequest req;
            req.category = category;
            req.instruction = *instruction;
            if (category == ScriptCategory::Primitive) {
                req.parameterNames = card.params.names();
            } else {
                req.parentParams = parentParams;
            }
            if (helped.plan.isFollowup) req.shortTermMemory = scratch.generatorMemory(category);
            ScriptArtifact artifact = generateChecked(req, scratch, sink, out.regenerations);
            if (category == ScriptCategory::Primitive) parentParams = artifact.parameters;
            card.artifacts.push_back(std::move(artifact));
        }
        if (card.artifacts.empty() || card.artifacts.front().category != ScriptCategory::Primitive) {
            throw ValidationError("the prompt produced no primitive script");
        }
        card.enabled.assign(card.artifacts.size(), true);
        card.createdAt = nowMs();
        try {
            out.scene = buildScene(card);
        } catch (const sim::SceneError& e) {
            throw InvalidStateError(std::string("generated scripts do not load together: ") + e.what());
        }
        if (sink) sink(FeedbackPhase::Loaded, std::to_string(card.artifacts.size()) + " scripts");
        return out;
    } catch (const Error& e) {
        if (sink) sink(FeedbackPhase::Error, e.what());
        throw;
    }
}

} // namespace pinauthor::service
