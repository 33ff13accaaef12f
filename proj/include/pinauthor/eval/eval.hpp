#pragma once

#include "pinauthor/core/errors.hpp"
#include "pinauthor/core/json.hpp"
#include "pinauthor/llm/gateway.hpp"
#include "pinauthor/rag/store.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pinauthor::eval {

enum class PipelineVariant { Baseline, BaselineRag, Segmentation, Full };

std::string_view toString(PipelineVariant variant);
std::optional<PipelineVariant> parseVariant(std::string_view text);

struct SampleResult {
    std::string prompt;
    std::vector<int> s;                  // one 0/1 outcome per scored segment
    std::vector<std::string> categories; // parallel to s; "combined" for baseline variants
    std::vector<std::string> errors;
    std::vector<double> latencies;       // seconds per gateway call

    std::size_t m() const { return s.size(); }
    friend bool operator==(const SampleResult&, const SampleResult&) = default;
};

struct EvalReport {
    PipelineVariant variant = PipelineVariant::Full;
    std::vector<SampleResult> perSample;
    double successRate = 0.0;
    std::vector<double> latencies;
    double meanLatency = 0.0;
    bool latencyPhysical = true; // false when calls were served from fixtures

    std::size_t n() const { return perSample.size(); }

    Json toJson() const;
    // Throws ValidationError.
    static EvalReport fromJson(const Json& j);
    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// (1/n) sum_i (1/m_i) sum_j s_ij. Throws ValidationError for an empty list,
// a sample with no outcomes, or an outcome other than 0 and 1.
double successRate(const std::vector<std::vector<int>>& outcomes);
double successRate(const std::vector<SampleResult>& samples);

// One prompt per non-blank line, trailing whitespace removed. Throws
// NotFoundError for a missing file and ValidationError for an empty corpus.
std::vector<std::string> loadCorpus(const std::filesystem::path& path);

struct RunOptions {
    unsigned jobs = 1;
};

// Runs each prompt through the variant and compile-checks what comes back.
// Gateway failures are scored 0 for the affected sample or segment and the
// run continues. Installs its own gateway listener for the duration.
EvalReport runCorpus(const std::vector<std::string>& prompts, PipelineVariant variant, llm::Gateway& gateway,
                     const rag::ExampleStore& examples, RunOptions options = {});

} // namespace pinauthor::eval
