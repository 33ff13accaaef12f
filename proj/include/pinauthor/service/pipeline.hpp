#pragma once

#include "pinauthor/core/errors.hpp"
#include "pinauthor/core/session.hpp"
#include "pinauthor/gen/generator.hpp"
#include "pinauthor/helper/helper.hpp"
#include "pinauthor/sim/runtime.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pinauthor::service {

inline constexpr int kMaxRegens = 3;

class GenerationFailedError : public Error {
public:
    GenerationFailedError(ScriptCategory c, int attempts, const std::string& lastError)
        : Error(std::string(pinauthor::toString(c)) + " script still fails to compile after " +
                std::to_string(attempts) + " attempts: " + lastError),
          category(c), attempts(attempts) {}
    ScriptCategory category;
    int attempts;
};

struct PipelineConfig {
    std::string helperModel = "gpt-4-turbo";
    std::string generatorModel = "gpt-3.5-turbo-0125";
    int maxRegens = kMaxRegens;
};

struct Submission {
    HistoryCard card; // id and parent are assigned when appended
    std::unique_ptr<sim::Scene> scene;
    int regenerations = 0;
    std::vector<std::string> fixtureKeys; // chat calls made for this prompt, in order
};

// Instantiates every artifact of `card` and applies its enabled flags.
std::unique_ptr<sim::Scene> buildScene(const HistoryCard& card);

class AuthoringPipeline {
public:
    // Installs itself as the gateway's call listener to collect fixture keys.
    AuthoringPipeline(llm::Gateway& gateway, const rag::ExampleStore& examples, PipelineConfig config = {});

    // Helper chains, one generator per present instruction with compile-error
    // repair, then a scene load. `session` is only read; generator memory is
    // tracked on a scratch copy. Failures are reported to `sink` as an error
    // phase before being rethrown.
    Submission submit(const Session& session, const std::string& text, const helper::FeedbackSink& sink = {});

    llm::Gateway& gateway() { return gateway_; }
    const PipelineConfig& config() const { return config_; }

private:
    ScriptArtifact generateChecked(gen::GeneratorRequest req, Session& scratch, const helper::FeedbackSink& sink,
                                   int& regenerations);

    llm::Gateway& gateway_;
    helper::PromptHelper helper_;
    gen::ScriptGenerator generator_;
    PipelineConfig config_;
};

} // namespace pinauthor::service
