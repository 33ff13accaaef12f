#pragma once

#include "pinauthor/core/json.hpp"
#include "pinauthor/core/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pinauthor::service {

// A scripted conversation used to author replay fixtures. Each response is
// either literal text, a JSON object (sent serialized) or
// {"script": {"type", "message", "file"}} naming a script beside the
// scenario file.
struct ScenarioTurn {
    std::string prompt;
    std::vector<std::string> responses;
    std::optional<std::string> expectError; // error kind, e.g. "generation-failed"
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<ScenarioTurn> turns;
    Json expect = Json::object();
};

// Throws NotFoundError or ValidationError.
Scenario loadScenario(const std::filesystem::path& path);

struct TurnOutcome {
    std::optional<HistoryCard> card;
    std::optional<std::string> errorKind;
};

// Runs every turn through a fresh session whose gateway records to
// `fixtureDir` while a scripted transport plays the responses. Throws
// ValidationError when a turn's outcome differs from its expectation or a
// response is left unused.
std::vector<TurnOutcome> authorScenario(const Scenario& scenario, const std::filesystem::path& fixtureDir,
                                        const std::filesystem::path& ragDir);

} // namespace pinauthor::service
