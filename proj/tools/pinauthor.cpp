#include "pinauthor/eval/authoring.hpp"
#include "pinauthor/hw/bridge.hpp"
#include "pinauthor/service/http_server.hpp"
#include "pinauthor/service/scenario.hpp"
#include "pinauthor/sim/runtime.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace pinauthor;

namespace {

struct ModelOptions {
    std::string mode;
    std::string fixtures;
    std::string rag = "data/rag";

    void add(CLI::App* cmd) {
        cmd->add_option("--mode", mode, "live, record or replay (default: PINAUTHOR_MODE or replay)")
            ->check(CLI::IsMember({"live", "record", "replay"}));
        cmd->add_option("--fixtures", fixtures, "fixture directory (default: PINAUTHOR_FIXTURES)");
        cmd->add_option("--rag", rag, "directory holding the example collections")->capture_default_str();
    }

    llm::ModelConfig config() const {
        llm::ModelConfig c = llm::ModelConfig::fromEnvironment();
        if (!mode.empty()) c.mode = *llm::parseMode(mode);
        if (!fixtures.empty()) c.fixtureDir = fixtures;
        c.validate();
        return c;
    }
};

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

service::HttpService* activeServer = nullptr;
std::atomic<bool> interrupted{false};

void onSignal(int) {
    interrupted = true;
    if (activeServer) activeServer->stop();
}

struct MqttSettings {
    std::string url;
    std::string targetTopic = "shapeit/pins/target";
    std::string actualTopic = "shapeit/pins/actual";
    double threshold = hw::kPressThreshold;
};

int serve(const ModelOptions& models, const std::string& host, int port, double tickRate, const std::string& logDir,
          const MqttSettings& mqtt) {
    llm::ModelConfig config = models.config();
    llm::Gateway gateway(config);
    rag::ExampleStore examples(gateway);
    examples.load(models.rag);
    service::AuthoringPipeline pipeline(gateway, examples, {config.helperModel, config.generatorModel});
    std::optional<std::filesystem::path> logs;
    if (!logDir.empty()) logs = logDir;
    service::SessionManager sessions(pipeline, {tickRate, std::nullopt}, logs);
    service::HttpService server(sessions);

    std::unique_ptr<hw::MqttClient> client;
    std::unique_ptr<hw::HardwareBridge> bridge;
    if (!mqtt.url.empty()) {
        client = std::make_unique<hw::MqttClient>(hw::parseMqttUrl(mqtt.url));
        hw::BridgeOptions options;
        options.targetTopic = mqtt.targetTopic;
        options.actualTopic = mqtt.actualTopic;
        options.pressThreshold = mqtt.threshold;
        options.log = [](const std::string& line) { std::cerr << "mqtt: " << line << "\n"; };
        bridge = std::make_unique<hw::HardwareBridge>(*client, options);
        sessions.onCreate([&bridge](const std::shared_ptr<service::SessionHost>& host) { bridge->attach(host); });
        client->start();
        std::cerr << "mirroring the newest session to " << mqtt.url << "\n";
    }

    activeServer = &server;
    std::signal(SIGINT, onSignal);
    std::signal(SIGTERM, onSignal);
    std::cerr << "serving on http://" << host << ":" << port << " (" << llm::toString(config.mode) << " mode)\n";
    server.run(host, port);
    activeServer = nullptr;
    if (bridge) bridge->detach();
    if (client) client->stop();
    return 0;
}

int runBroker(const std::string& host, int port) {
    hw::LocalBroker broker;
    int bound = broker.start(host, port);
    std::signal(SIGINT, onSignal);
    std::signal(SIGTERM, onSignal);
    std::cerr << "MQTT broker on " << host << ":" << bound << "\n";
    while (!interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    broker.stop();
    return 0;
}

int runEval(const ModelOptions& models, const std::string& corpusPath, const std::string& variantName, unsigned jobs,
            const std::string& outPath) {
    auto variant = eval::parseVariant(variantName);
    if (!variant) throw ValidationError("unknown variant '" + variantName + "'");
    auto prompts = eval::loadCorpus(corpusPath);
    llm::ModelConfig config = models.config();
    llm::Gateway gateway(config);
    rag::ExampleStore examples(gateway);
    examples.load(models.rag);
    eval::EvalReport report = eval::runCorpus(prompts, *variant, gateway, examples, {jobs});
    std::string json = report.toJson().dump(2);
    if (outPath.empty() || outPath == "-") {
        std::cout << json << "\n";
    } else {
        std::ofstream out(outPath);
        if (!out) throw ValidationError("cannot write " + outPath);
        out << json << "\n";
    }
    std::size_t misses = 0;
    for (const auto& s : report.perSample) misses += !s.errors.empty();
    std::cerr << eval::toString(report.variant) << ": n=" << report.n() << " S=" << report.successRate
              << " meanLatency=" << report.meanLatency << "s" << (report.latencyPhysical ? "" : " (replayed)")
              << ", " << misses << " samples with errors\n";
    return 0;
}

int authorFixtures(const std::vector<std::string>& scenarios, const std::string& outDir, const std::string& ragDir) {
    for (const auto& path : scenarios) {
        service::Scenario scenario = service::loadScenario(path);
        std::filesystem::path dir = std::filesystem::path(outDir) / scenario.name;
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        std::size_t turns = scenario.turns.size();
        if (eval::isEvalScenario(scenario)) {
            eval::authorEvalScenario(scenario, dir, ragDir);
        } else {
            service::authorScenario(scenario, dir, ragDir);
        }
        std::size_t files = std::distance(std::filesystem::directory_iterator(dir), {});
        std::cout << scenario.name << ": " << turns << " turns, " << files << " fixtures -> " << dir.string()
                  << "\n";
    }
    return 0;
}

int checkScript(const std::string& path, const std::string& category, const std::string& parentPath) {
    auto cat = parseCategory(category);
    if (!cat) throw ValidationError("unknown category '" + category + "'");
    ParamMap parent;
    if (!parentPath.empty()) parent = sim::extractParameters(readFile(parentPath), ScriptCategory::Primitive);
    std::string source = readFile(path);
    if (auto error = sim::compileCheck(source, *cat, parent)) {
        std::cout << "FAIL " << error->describe() << "\n";
        return 1;
    }
    std::cout << "OK";
    for (const auto& [name, value] : sim::extractParameters(source, *cat)) std::cout << " " << name << "=" << value;
    std::cout << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-to-shape-display authoring backend"};
    app.require_subcommand(1);

    ModelOptions serveModels;
    std::string host = "127.0.0.1";
    int port = 8080;
    double tickRate = sim::kTickRate;
    std::string logDir;
    auto* serveCmd = app.add_subcommand("serve", "run the HTTP and event-stream API");
    serveModels.add(serveCmd);
    serveCmd->add_option("--host", host)->capture_default_str();
    serveCmd->add_option("--port", port)->capture_default_str();
    serveCmd->add_option("--tick-rate", tickRate, "frames per second")->capture_default_str();
    serveCmd->add_option("--log-dir", logDir, "write one JSON-lines event log per session here");
    MqttSettings mqtt;
    serveCmd->add_option("--mqtt", mqtt.url, "broker URL; mirrors the newest session to the display");
    serveCmd->add_option("--target-topic", mqtt.targetTopic)->capture_default_str();
    serveCmd->add_option("--actual-topic", mqtt.actualTopic)->capture_default_str();
    serveCmd->add_option("--press-threshold", mqtt.threshold)->capture_default_str();

    std::string brokerHost = "127.0.0.1";
    int brokerPort = 1883;
    auto* brokerCmd = app.add_subcommand("broker", "run a local MQTT broker for development");
    brokerCmd->add_option("--host", brokerHost)->capture_default_str();
    brokerCmd->add_option("--port", brokerPort)->capture_default_str();

    auto* evalCmd = app.add_subcommand("eval", "compile-success evaluation harness");
    evalCmd->require_subcommand(1);
    ModelOptions evalModels;
    std::string corpusPath = "data/corpus/techeval.txt", variantName = "full", evalOut;
    unsigned jobs = 1;
    auto* evalRunCmd = evalCmd->add_subcommand("run", "run a prompt corpus through a pipeline variant");
    evalModels.add(evalRunCmd);
    evalRunCmd->add_option("--corpus", corpusPath)->capture_default_str()->check(CLI::ExistingFile);
    evalRunCmd->add_option("--variant", variantName)
        ->capture_default_str()
        ->check(CLI::IsMember({"baseline", "baseline-rag", "segmentation", "full"}));
    evalRunCmd->add_option("--jobs", jobs)->capture_default_str()->check(CLI::PositiveNumber);
    evalRunCmd->add_option("--out", evalOut, "report path (default: stdout)");

    auto* fixturesCmd = app.add_subcommand("fixtures", "replay fixture tooling");
    fixturesCmd->require_subcommand(1);
    std::vector<std::string> scenarios;
    std::string fixturesOut = "data/fixtures";
    std::string fixturesRag = "data/rag";
    auto* authorCmd = fixturesCmd->add_subcommand("author", "record fixtures from scripted scenarios");
    authorCmd->add_option("scenarios", scenarios, "scenario JSON files")->required()->check(CLI::ExistingFile);
    authorCmd->add_option("--out", fixturesOut)->capture_default_str();
    authorCmd->add_option("--rag", fixturesRag)->capture_default_str();

    std::string scriptPath, category = "primitive", parentPath;
    auto* checkCmd = app.add_subcommand("check", "compile-check a script file");
    checkCmd->add_option("script", scriptPath)->required()->check(CLI::ExistingFile);
    checkCmd->add_option("--category", category)->capture_default_str();
    checkCmd->add_option("--parent", parentPath, "primitive script supplying parent parameters");

    CLI11_PARSE(app, argc, argv);
    try {
        if (serveCmd->parsed()) return serve(serveModels, host, port, tickRate, logDir, mqtt);
        if (brokerCmd->parsed()) return runBroker(brokerHost, brokerPort);
        if (evalRunCmd->parsed()) return runEval(evalModels, corpusPath, variantName, jobs, evalOut);
        if (authorCmd->parsed()) return authorFixtures(scenarios, fixturesOut, fixturesRag);
        if (checkCmd->parsed()) return checkScript(scriptPath, category, parentPath);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
