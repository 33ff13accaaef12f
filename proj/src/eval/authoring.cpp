#include "pinauthor/eval/authoring.hpp"

#include <fstream>

namespace pinauthor::eval {

bool isEvalScenario(const service::Scenario& scenario) {
    return scenario.expect.is_object() && scenario.expect.contains("variant");
}

std::vector<SampleResult> authorEvalScenario(const service::Scenario& scenario, const std::filesystem::path& fixtureDir,
                                             const std::filesystem::path& ragDir) {
    auto variant = parseVariant(scenario.expect.value("variant", ""));
    if (!variant) throw ValidationError("scenario " + scenario.name + " has no valid expect.variant");

    auto transport = std::make_shared<llm::ScriptedTransport>();
    llm::ModelConfig config;
    config.mode = llm::Mode::Record;
    config.fixtureDir = fixtureDir;
    llm::Gateway gateway(config, transport);
    rag::ExampleStore examples(gateway);
    examples.load(ragDir);

    std::vector<SampleResult> samples;
    std::ofstream corpus(fixtureDir / "corpus.txt");
    for (const auto& turn : scenario.turns) {
        for (const auto& r : turn.responses) transport->enqueueChat(r);
        EvalReport one = runCorpus({turn.prompt}, *variant, gateway, examples);
        if (transport->pending() != 0) {
            throw ValidationError("scenario " + scenario.name + ": " + std::to_string(transport->pending()) +
                                  " responses left unused after '" + turn.prompt + "'");
        }
        samples.push_back(std::move(one.perSample.front()));
        corpus << turn.prompt << "\n";
    }
    if (scenario.expect.contains("s")) {
        auto expected = scenario.expect["s"].get<std::vector<std::vector<int>>>();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (i >= expected.size() || samples[i].s != expected[i]) {
                std::string detail = samples[i].errors.empty() ? "" : " (" + samples[i].errors.front() + ")";
                throw ValidationError("scenario " + scenario.name + ": outcome of '" + samples[i].prompt +
                                      "' differs from expect.s" + detail);
            }
        }
    }
    return samples;
}

} // namespace pinauthor::eval
