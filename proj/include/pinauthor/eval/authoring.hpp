#pragma once

#include "pinauthor/eval/eval.hpp"
#include "pinauthor/service/scenario.hpp"

namespace pinauthor::eval {

// True when the scenario names an eval variant under expect.variant.
bool isEvalScenario(const service::Scenario& scenario);

// Records replay fixtures for an eval scenario: each turn is one corpus
// prompt whose responses are served in call order. Also writes the prompts
// to <fixtureDir>/corpus.txt. Throws ValidationError when a turn leaves
// responses unused or the outcomes differ from expect.s (when given).
std::vector<SampleResult> authorEvalScenario(const service::Scenario& scenario, const std::filesystem::path& fixtureDir,
                                             const std::filesystem::path& ragDir);

} // namespace pinauthor::eval
