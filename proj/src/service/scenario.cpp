#include "pinauthor/service/scenario.hpp"

#include "pinauthor/service/http_server.hpp"
#include "pinauthor/service/session_host.hpp"

#include <fstream>
#include <sstream>

namespace pinauthor::service {

namespace {

std::string readText(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string responseText(const Json& r, const std::filesystem::path& baseDir) {
    if (r.is_string()) return r.get<std::string>();
    if (r.is_object() && r.contains("script")) {
        const Json& s = r["script"];
        Json reply = {{"type", s.at("type")},
                      {"message", s.at("message")},
                      {"content", readText(baseDir / s.at("file").get<std::string>())}};
        return reply.dump(2);
    }
    if (r.is_object()) return r.dump(2);
    throw ValidationError("scenario responses must be strings or objects");
}

} // namespace

Scenario loadScenario(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(readText(path));
    } catch (const Json::parse_error& e) {
        throw ValidationError("scenario " + path.string() + " is not JSON: " + e.what());
    }
    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        s.description = j.value("description", "");
        s.expect = j.value("expect", Json::object());
        for (const Json& t : j.at("turns")) {
            ScenarioTurn turn;
            turn.prompt = t.at("prompt").get<std::string>();
            if (t.contains("expectError")) turn.expectError = t["expectError"].get<std::string>();
            for (const Json& r : t.at("responses")) turn.responses.push_back(responseText(r, path.parent_path()));
            s.turns.push_back(std::move(turn));
        }
    } catch (const Json::exception& e) {
        throw ValidationError("scenario " + path.string() + " is malformed: " + e.what());
    }
    if (s.turns.empty()) throw ValidationError("scenario " + path.string() + " has no turns");
    return s;
}

std::vector<TurnOutcome> authorScenario(const Scenario& scenario, const std::filesystem::path& fixtureDir,
                                        const std::filesystem::path& ragDir) {
    auto transport = std::make_shared<llm::ScriptedTransport>();
    llm::ModelConfig config;
    config.mode = llm::Mode::Record;
    config.fixtureDir = fixtureDir;
    llm::Gateway gateway(config, transport);
    rag::ExampleStore examples(gateway);
    examples.load(ragDir);
    AuthoringPipeline pipeline(gateway, examples, {config.helperModel, config.generatorModel});
    SessionHost host(scenario.name, pipeline, {0.0, std::nullopt});

    std::vector<TurnOutcome> outcomes;
    for (const ScenarioTurn& turn : scenario.turns) {
        for (const auto& r : turn.responses) transport->enqueueChat(r);
        TurnOutcome outcome;
        try {
            outcome.card = host.submitPrompt(turn.prompt);
        } catch (const std::exception& e) {
            outcome.errorKind = describeError(e).body["error"]["kind"].get<std::string>();
            if (!turn.expectError) {
                throw ValidationError("scenario " + scenario.name + ": prompt '" + turn.prompt + "' failed: " + e.what());
            }
        }
        if (turn.expectError && outcome.errorKind != turn.expectError) {
            throw ValidationError("scenario " + scenario.name + ": expected " + *turn.expectError + " for '" +
                                  turn.prompt + "'");
        }
        if (transport->pending() != 0) {
            throw ValidationError("scenario " + scenario.name + ": " + std::to_string(transport->pending()) +
                                  " responses left unused after '" + turn.prompt + "'");
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

} // namespace pinauthor::service
