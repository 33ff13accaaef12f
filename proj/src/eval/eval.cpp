#include "pinauthor/eval/eval.hpp"

#include "pinauthor/gen/generator.hpp"
#include "pinauthor/helper/helper.hpp"
#include "pinauthor/helper/prompts.hpp"
#include "pinauthor/sim/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

namespace pinauthor::eval {

namespace {

constexpr std::array<std::pair<PipelineVariant, std::string_view>, 4> kVariantNames = {{
    {PipelineVariant::Baseline, "baseline"},
    {PipelineVariant::BaselineRag, "baseline-rag"},
    {PipelineVariant::Segmentation, "segmentation"},
    {PipelineVariant::Full, "full"},
}};

thread_local std::vector<double>* tlsLatencies = nullptr;

struct LatencyCapture {
    explicit LatencyCapture(std::vector<double>& into) { tlsLatencies = &into; }
    ~LatencyCapture() { tlsLatencies = nullptr; }
};

Json exampleReply(const rag::ExampleRecord& r) {
    Json j = Json::object();
    j["type"] = toString(r.category);
    j["message"] = r.message.empty() ? r.instruction : r.message;
    j["content"] = r.code;
    return j;
}

void score(SampleResult& out, std::string category, const std::optional<sim::CompileError>& error) {
    out.categories.push_back(std::move(category));
    out.s.push_back(error ? 0 : 1);
    if (error) out.errors.push_back(out.categories.back() + ": " + error->describe());
}

void fail(SampleResult& out, std::string category, const std::string& message) {
    out.errors.push_back(category + ": " + message);
    out.categories.push_back(std::move(category));
    out.s.push_back(0);
}

class Runner {
public:
    Runner(PipelineVariant variant, llm::Gateway& gateway, const rag::ExampleStore& examples)
        : variant_(variant), gateway_(gateway), examples_(examples) {}

    SampleResult run(const std::string& prompt) {
        SampleResult out;
        out.prompt = prompt;
        LatencyCapture capture(out.latencies);
        switch (variant_) {
        case PipelineVariant::Baseline:
        case PipelineVariant::BaselineRag: baseline(prompt, out); break;
        case PipelineVariant::Segmentation: segmentation(prompt, out); break;
        case PipelineVariant::Full: full(prompt, out); break;
        }
        return out;
    }

private:
    void baseline(const std::string& prompt, SampleResult& out) {
        std::vector<rag::ExampleRecord> shots;
        if (variant_ == PipelineVariant::BaselineRag) {
            shots = examples_.topKMerged(prompt);
        } else {
            for (ScriptCategory c : kAllCategories) {
                auto records = examples_.records(c);
                if (!records.empty()) shots.push_back(records.front());
            }
        }
        std::vector<llm::ChatMessage> messages;
        messages.push_back({llm::Role::System,
                            std::string(helper::promptText(helper::generatorPrompt(ScriptCategory::Primitive)))});
        for (const auto& shot : shots) {
            messages.push_back({llm::Role::User, Json{{"Prompt", shot.instruction}}.dump(2)});
            messages.push_back({llm::Role::Assistant, exampleReply(shot).dump(2)});
        }
        messages.push_back({llm::Role::User, Json{{"Prompt", prompt}}.dump(2)});
        try {
            auto output = gen::parseStructuredOutput(gateway_.complete(gateway_.config().generatorModel, messages));
            score(out, "combined", sim::compileCheck(output.source, output.category));
        } catch (const Error& e) {
            fail(out, "combined", e.what());
        }
    }

    // Generates and checks every category that has an instruction, feeding
    // the primitive's parameters to the later scripts.
    void generateAll(const InstructionBundle& instructions, const std::vector<std::string>& parameterNames,
                     SampleResult& out) {
        gen::ScriptGenerator generator(gateway_, examples_, gateway_.config().generatorModel);
        Session session;
        ParamMap parentParams;
        for (ScriptCategory category : kAllCategories) {
            const auto& instruction = instructions.instruction(category);
            if (!instruction) continue;
            std::string name(toString(category));
            gen::GeneratorRequest req;
            req.category = category;
            req.instruction = *instruction;
            if (category == ScriptCategory::Primitive) {
                req.parameterNames = parameterNames;
            } else {
                req.parentParams = parentParams;
            }
            try {
                ScriptArtifact artifact = generator.generateScript(req, session);
                score(out, name, sim::compileCheck(artifact.source, category, parentParams));
                if (category == ScriptCategory::Primitive) parentParams = artifact.parameters;
            } catch (const Error& e) {
                fail(out, name, e.what());
            }
        }
    }

    void segmentation(const std::string& prompt, SampleResult& out) {
        helper::PromptHelper helper(gateway_, gateway_.config().helperModel);
        SegmentPlan plan;
        try {
            plan = helper.segment(prompt, {});
        } catch (const Error& e) {
            fail(out, "segmentation", e.what());
            return;
        }
        if (plan.segmentCount() == 0) {
            fail(out, "segmentation", "no segments");
            return;
        }
        InstructionBundle bundle;
        for (ScriptCategory c : kAllCategories) bundle.instruction(c) = plan.segment(c);
        generateAll(bundle, {}, out);
    }

    void full(const std::string& prompt, SampleResult& out) {
        helper::PromptHelper helper(gateway_, gateway_.config().helperModel);
        helper::HelperResult helped;
        try {
            helped = helper.run(prompt, {});
        } catch (const Error& e) {
            fail(out, "helper", e.what());
            return;
        }
        if (helped.plan.segmentCount() == 0) {
            fail(out, "helper", "no segments");
            return;
        }
        InstructionBundle bundle;
        for (ScriptCategory c : kAllCategories) {
            if (!helped.plan.segment(c)) continue;
            if (helped.instructions.instruction(c)) {
                bundle.instruction(c) = helped.instructions.instruction(c);
            }
        }
        generateAll(bundle, helped.params.names(), out);
        // Segments the helper produced no instruction for count as failures.
        for (ScriptCategory c : kAllCategories) {
            if (helped.plan.segment(c) && !bundle.instruction(c)) fail(out, std::string(toString(c)), "no instruction");
        }
    }

    PipelineVariant variant_;
    llm::Gateway& gateway_;
    const rag::ExampleStore& examples_;
};

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

} // namespace

std::string_view toString(PipelineVariant variant) {
    for (const auto& [v, name] : kVariantNames) {
        if (v == variant) return name;
    }
    return "full";
}

std::optional<PipelineVariant> parseVariant(std::string_view text) {
    for (const auto& [v, name] : kVariantNames) {
        if (name == text) return v;
    }
    return std::nullopt;
}

double successRate(const std::vector<std::vector<int>>& outcomes) {
    if (outcomes.empty()) throw ValidationError("success rate needs at least one sample");
    double total = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& s = outcomes[i];
        if (s.empty()) throw ValidationError("sample " + std::to_string(i) + " has no scored segments");
        int hits = 0;
        for (int v : s) {
            if (v != 0 && v != 1) throw ValidationError("segment outcomes must be 0 or 1");
            hits += v;
        }
        total += static_cast<double>(hits) / static_cast<double>(s.size());
    }
    return total / static_cast<double>(outcomes.size());
}

double successRate(const std::vector<SampleResult>& samples) {
    std::vector<std::vector<int>> outcomes;
    outcomes.reserve(samples.size());
    for (const auto& s : samples) outcomes.push_back(s.s);
    return successRate(outcomes);
}

Json EvalReport::toJson() const {
    Json samples = Json::array();
    for (const auto& s : perSample) {
        samples.push_back({{"prompt", s.prompt},
                           {"m_i", s.m()},
                           {"s_ij", s.s},
                           {"categories", s.categories},
                           {"errors", s.errors},
                           {"latencies", s.latencies}});
    }
    return {{"variant", toString(variant)},
            {"n", n()},
            {"successRate", successRate},
            {"meanLatency", meanLatency},
            {"latencyPhysical", latencyPhysical},
            {"latencies", latencies},
            {"perSample", samples}};
}

EvalReport EvalReport::fromJson(const Json& j) {
    EvalReport r;
    try {
        auto variant = parseVariant(j.at("variant").get<std::string>());
        if (!variant) throw ValidationError("unknown variant " + j.at("variant").dump());
        r.variant = *variant;
        for (const Json& s : j.at("perSample")) {
            SampleResult sample;
            sample.prompt = s.at("prompt").get<std::string>();
            sample.s = s.at("s_ij").get<std::vector<int>>();
            sample.categories = s.value("categories", std::vector<std::string>{});
            sample.errors = s.value("errors", std::vector<std::string>{});
            sample.latencies = s.value("latencies", std::vector<double>{});
            if (s.contains("m_i") && s["m_i"].get<std::size_t>() != sample.m()) {
                throw ValidationError("m_i disagrees with s_ij for '" + sample.prompt + "'");
            }
            r.perSample.push_back(std::move(sample));
        }
        r.successRate = j.at("successRate").get<double>();
        r.meanLatency = j.value("meanLatency", 0.0);
        r.latencyPhysical = j.value("latencyPhysical", true);
        r.latencies = j.value("latencies", std::vector<double>{});
        if (j.contains("n") && j["n"].get<std::size_t>() != r.n()) throw ValidationError("n disagrees with perSample");
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed eval report: ") + e.what());
    }
    return r;
}

std::vector<std::string> loadCorpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot read corpus " + path.string());
    std::vector<std::string> prompts;
    std::string line;
    while (std::getline(in, line)) {
        auto end = line.find_last_not_of(" \t\r\n");
        if (end == std::string::npos) continue;
        prompts.push_back(line.substr(0, end + 1));
    }
    if (prompts.empty()) throw ValidationError("corpus " + path.string() + " has no prompts");
    return prompts;
}

EvalReport runCorpus(const std::vector<std::string>& prompts, PipelineVariant variant, llm::Gateway& gateway,
                     const rag::ExampleStore& examples, RunOptions options) {
    if (prompts.empty()) throw ValidationError("corpus has no prompts");
    std::atomic<bool> replayed{false};
    gateway.setListener([&replayed](const llm::CallRecord& call) {
        if (call.kind != llm::CallRecord::Kind::Chat) return;
        if (call.replayed) replayed = true;
        if (tlsLatencies) tlsLatencies->push_back(call.seconds);
    });

    EvalReport report;
    report.variant = variant;
    report.perSample.resize(prompts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        Runner runner(variant, gateway, examples);
        for (std::size_t i = next++; i < prompts.size(); i = next++) report.perSample[i] = runner.run(prompts[i]);
    };
    unsigned jobs = std::clamp<unsigned>(options.jobs, 1, static_cast<unsigned>(prompts.size()));
    try {
        std::vector<std::thread> threads;
        for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
        worker();
        for (auto& t : threads) t.join();
    } catch (...) {
        gateway.setListener({});
        throw;
    }
    gateway.setListener({});

    for (const auto& s : report.perSample) report.latencies.insert(report.latencies.end(), s.latencies.begin(), s.latencies.end());
    report.meanLatency = mean(report.latencies);
    report.latencyPhysical = gateway.config().mode != llm::Mode::Replay && !replayed;
    report.successRate = successRate(report.perSample);
    return report;
}

} // namespace pinauthor::eval
