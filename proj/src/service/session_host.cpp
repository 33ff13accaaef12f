#include "pinauthor/service/session_host.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace pinauthor::service {

SessionHost::SessionHost(std::string id, AuthoringPipeline& pipeline, HostOptions options)
    : id_(std::move(id)), pipeline_(pipeline), options_(std::move(options)) {
    if (!(options_.tickRate >= 0.0) || !std::isfinite(options_.tickRate)) {
        throw ValidationError("tick rate must be a non-negative number");
    }
    if (options_.logPath) log({{"type", "created"}, {"sessionId", id_}});
    worker_ = std::thread([this] { workerLoop(); });
    if (options_.tickRate > 0.0) ticker_ = std::thread([this] { tickerLoop(); });
}

SessionHost::~SessionHost() {
    {
        std::lock_guard lock(tickerMutex_);
        tickerStop_ = true;
    }
    tickerCv_.notify_all();
    if (ticker_.joinable()) ticker_.join();
    {
        std::lock_guard lock(queueMutex_);
        stopping_ = true;
    }
    queueCv_.notify_all();
    if (worker_.joinable()) worker_.join();
}

void SessionHost::enqueue(std::function<void()> job) {
    {
        std::lock_guard lock(queueMutex_);
        if (stopping_) throw InvalidStateError("session " + id_ + " is shutting down");
        queue_.push_back(std::move(job));
    }
    queueCv_.notify_one();
}

void SessionHost::workerLoop() {
    for (;;) {
        std::function<void()> job;
        {
            std::unique_lock lock(queueMutex_);
            queueCv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job();
    }
}

void SessionHost::tickerLoop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / options_.tickRate));
    auto next = clock::now() + period;
    std::unique_lock lock(tickerMutex_);
    while (!tickerStop_) {
        if (tickerCv_.wait_until(lock, next, [this] { return tickerStop_.load(); })) break;
        lock.unlock();
        tick();
        lock.lock();
        next += period;
        if (clock::now() > next + period) next = clock::now() + period;
    }
}

void SessionHost::post(std::function<void(SessionHost&)> command) {
    enqueue([this, command = std::move(command)] {
        try {
            command(*this);
        } catch (const Error& e) {
            publishFeedback(FeedbackPhase::Error, e.what());
        }
    });
}

std::optional<Json> SessionHost::tick() {
    Json event;
    std::string stepError;
    {
        std::lock_guard lock(sceneMutex_);
        if (!scene_) return std::nullopt;
        try {
            scene_->step(1.0 / sim::kTickRate);
        } catch (const sim::StepError& e) {
            stepError = e.what();
        }
        event = {{"type", "frame"}, {"sessionId", id_}, {"seq", ++seq_}, {"heights", scene_->field()}};
        if (stepError == lastStepError_) stepError.clear();
        else lastStepError_ = stepError;
    }
    publish(event);
    if (!stepError.empty()) publishFeedback(FeedbackPhase::Error, stepError);
    return event;
}

int SessionHost::subscribe(EventListener listener) {
    std::lock_guard lock(listenersMutex_);
    int token = nextToken_++;
    listeners_.emplace(token, std::move(listener));
    return token;
}

void SessionHost::unsubscribe(int token) {
    std::lock_guard lock(listenersMutex_);
    listeners_.erase(token);
}

void SessionHost::publish(const Json& event) {
    std::lock_guard lock(listenersMutex_);
    for (auto& [token, listener] : listeners_) listener(event);
}

void SessionHost::publishFeedback(FeedbackPhase phase, const std::string& detail) {
    publish({{"type", "feedback"}, {"sessionId", id_}, {"phase", toString(phase)}, {"detail", detail}});
}

void SessionHost::log(Json entry) {
    if (!options_.logPath || replaying_) return;
    std::lock_guard lock(logMutex_);
    std::ofstream out(*options_.logPath, std::ios::app);
    if (!out) throw InvalidStateError("cannot append to session log " + options_.logPath->string());
    out << entry.dump() << '\n';
}

HistoryCard SessionHost::doSubmit(const std::string& text, std::optional<std::int64_t> createdAt) {
    Submission sub;
    try {
        sub = pipeline_.submit(session_, text, [this](FeedbackPhase phase, const std::string& detail) {
            publishFeedback(phase, detail);
        });
    } catch (const Error& e) {
        log({{"type", "prompt-failed"}, {"text", text}, {"error", e.what()}});
        throw;
    }
    if (createdAt) sub.card.createdAt = *createdAt;
    const HistoryCard& card = session_.appendCard(std::move(sub.card));
    {
        std::lock_guard lock(sceneMutex_);
        scene_ = std::move(sub.scene);
        lastStepError_.clear();
    }
    log({{"type", "prompt"}, {"text", text}, {"fixtureKeys", sub.fixtureKeys}, {"card", card}});
    return card;
}

HistoryCard SessionHost::submitPrompt(const std::string& text) {
    return run([&] { return doSubmit(text, std::nullopt); });
}

void SessionHost::setParameter(const std::string& name, double value) {
    run([&] {
        if (!std::isfinite(value)) throw ValidationError("parameter value must be finite");
        std::lock_guard lock(sceneMutex_);
        if (!scene_) throw InvalidStateError("session has no loaded scene");
        scene_->setParameter(name, value);
    });
}

void SessionHost::pressButton(int groupId, bool pressed) {
    run([&] {
        std::lock_guard lock(sceneMutex_);
        if (!scene_) throw InvalidStateError("session has no loaded scene");
        scene_->pressButton(groupId, pressed);
    });
}

void SessionHost::applyPresses(const std::vector<std::pair<std::size_t, bool>>& presses) {
    std::lock_guard lock(sceneMutex_);
    if (!scene_) return;
    for (const auto& [index, pressed] : presses) scene_->setPinPressing(index, pressed);
}

bool SessionHost::withScene(const std::function<void(sim::Scene&)>& fn) {
    std::lock_guard lock(sceneMutex_);
    if (!scene_) return false;
    fn(*scene_);
    return true;
}

std::optional<HeightField> SessionHost::currentTargets() {
    std::lock_guard lock(sceneMutex_);
    if (!scene_) return std::nullopt;
    return scene_->field();
}

void SessionHost::doToggle(std::size_t index, bool enabled) {
    const HistoryCard* card = session_.activeCard();
    {
        std::lock_guard lock(sceneMutex_);
        if (!scene_ || !card) throw InvalidStateError("session has no loaded scene");
        if (index >= card->artifacts.size()) throw NotFoundError("active card has no artifact " + std::to_string(index));
        scene_->setEnabled(card->artifacts[index].category, enabled);
    }
    session_.setArtifactEnabled(index, enabled);
    log({{"type", "toggle"}, {"index", index}, {"enabled", enabled}});
}

bool SessionHost::toggleArtifact(std::size_t index) {
    return run([&] {
        const HistoryCard* card = session_.activeCard();
        if (!card) throw InvalidStateError("session has no loaded scene");
        if (index >= card->enabled.size()) throw NotFoundError("active card has no artifact " + std::to_string(index));
        bool next = !card->enabled[index];
        doToggle(index, next);
        return next;
    });
}

void SessionHost::reloadScene() {
    const HistoryCard* card = session_.activeCard();
    auto scene = card ? buildScene(*card) : nullptr;
    std::lock_guard lock(sceneMutex_);
    scene_ = std::move(scene);
    lastStepError_.clear();
}

void SessionHost::doRollback(const CardId& cardId) {
    session_ = rollback(session_, cardId);
    reloadScene();
    publishFeedback(FeedbackPhase::Loaded, "rolled back to " + cardId);
    log({{"type", "rollback"}, {"cardId", cardId}});
}

void SessionHost::rollbackTo(const CardId& cardId) {
    run([&] { doRollback(cardId); });
}

Json SessionHost::history() {
    return run([&] {
        Json cards = Json::array();
        for (const auto& card : session_.cards()) cards.push_back(card);
        Json out = {{"sessionId", id_},
                    {"activeCardId", session_.activeCardId() ? Json(*session_.activeCardId()) : Json(nullptr)},
                    {"cards", cards},
                    {"sliders", Json::array()},
                    {"buttons", Json::array()}};
        std::lock_guard lock(sceneMutex_);
        if (scene_) {
            ParamMap current = scene_->parentParams();
            for (const auto& slider : scene_->sliders()) {
                Json s = slider;
                s["value"] = current.get(slider.name).value_or(slider.initial);
                out["sliders"].push_back(s);
            }
            for (const auto& b : scene_->buttons()) {
                out["buttons"].push_back(
                    {{"id", b.id}, {"size", b.size}, {"x", b.x}, {"y", b.y}, {"initHeight", b.initHeight}});
            }
        }
        return out;
    });
}

Session SessionHost::snapshot() {
    return run([&] { return session_; });
}

void SessionHost::restore(const std::filesystem::path& logPath) {
    std::ifstream in(logPath);
    if (!in) throw NotFoundError("no session log at " + logPath.string());
    std::vector<Json> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            entries.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw ValidationError("malformed session log line: " + std::string(e.what()));
        }
    }
    run([&] {
        if (!session_.cards().empty()) throw InvalidStateError("restore requires an empty session");
        replaying_ = true;
        struct Reset {
            bool& flag;
            ~Reset() { flag = false; }
        } reset{replaying_};
        for (const Json& entry : entries) {
            std::string type = entry.value("type", "");
            if (type == "prompt") {
                HistoryCard expected = entry.at("card").get<HistoryCard>();
                HistoryCard got = doSubmit(entry.at("text").get<std::string>(), expected.createdAt);
                if (got != expected) {
                    throw InvalidStateError("replayed prompt produced a different card than " + expected.id);
                }
            } else if (type == "toggle") {
                doToggle(entry.at("index").get<std::size_t>(), entry.at("enabled").get<bool>());
            } else if (type == "rollback") {
                doRollback(entry.at("cardId").get<std::string>());
            }
        }
    });
    if (options_.logPath && std::filesystem::absolute(*options_.logPath) != std::filesystem::absolute(logPath)) {
        std::lock_guard lock(logMutex_);
        std::ofstream out(*options_.logPath, std::ios::app);
        for (const Json& entry : entries) {
            if (entry.value("type", "") != "created") out << entry.dump() << '\n';
        }
    }
}

SessionManager::SessionManager(AuthoringPipeline& pipeline, HostOptions defaults,
                               std::optional<std::filesystem::path> logDir)
    : pipeline_(pipeline), defaults_(std::move(defaults)), logDir_(std::move(logDir)) {
    if (logDir_) std::filesystem::create_directories(*logDir_);
}

std::shared_ptr<SessionHost> SessionManager::create() {
    std::shared_ptr<SessionHost> host;
    {
        std::lock_guard lock(mutex_);
        static thread_local std::mt19937_64 rng{std::random_device{}()};
        std::ostringstream id;
        id << "s" << ++counter_ << "-" << std::hex << (rng() & 0xffffffffull);
        HostOptions options = defaults_;
        if (logDir_) options.logPath = *logDir_ / (id.str() + ".jsonl");
        host = std::make_shared<SessionHost>(id.str(), pipeline_, options);
        hosts_.emplace(host->id(), host);
    }
    if (onCreate_) onCreate_(host);
    return host;
}

std::shared_ptr<SessionHost> SessionManager::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = hosts_.find(id);
    if (it == hosts_.end()) throw NotFoundError("no session with id '" + id + "'");
    return it->second;
}

std::vector<std::string> SessionManager::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, host] : hosts_) out.push_back(id);
    return out;
}

} // namespace pinauthor::service
