#pragma once

#include "pinauthor/core/json.hpp"
#include "pinauthor/service/pipeline.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace pinauthor::service {

// Events published to subscribers:
//   {"type":"feedback","sessionId","phase","detail"}
//   {"type":"frame","sessionId","seq","heights":[576 numbers]}
using EventListener = std::function<void(const Json& event)>;

struct HostOptions {
    double tickRate = sim::kTickRate; // 0 disables the background ticker
    std::optional<std::filesystem::path> logPath;
};

// One authoring session. Commands run one at a time on a dedicated worker
// thread in arrival order; frames are produced by a separate ticker thread.
class SessionHost {
public:
    SessionHost(std::string id, AuthoringPipeline& pipeline, HostOptions options = {});
    ~SessionHost();
    SessionHost(const SessionHost&) = delete;
    SessionHost& operator=(const SessionHost&) = delete;

    const std::string& id() const { return id_; }

    // Blocking commands. Each throws what the underlying operation throws.
    HistoryCard submitPrompt(const std::string& text);
    void setParameter(const std::string& name, double value);
    void pressButton(int groupId, bool pressed);
    bool toggleArtifact(std::size_t index); // returns the new enabled flag
    void rollbackTo(const CardId& cardId);
    Json history();
    Session snapshot();

    // Queued without waiting; used by the hardware subscriber.
    void post(std::function<void(SessionHost&)> command);
    // Runs on the worker: mark button pins pressed or released.
    void applyPresses(const std::vector<std::pair<std::size_t, bool>>& presses);
    // Runs fn with the scene locked; returns false without a scene.
    bool withScene(const std::function<void(sim::Scene&)>& fn);
    // Target heights of the current scene, or nullopt without a scene.
    std::optional<HeightField> currentTargets();

    // Advance the scene one frame and publish it. No-op without a scene.
    std::optional<Json> tick();

    int subscribe(EventListener listener);
    void unsubscribe(int token);

    // Replays a JSON-lines log written by a previous host, verifying that the
    // regenerated cards match. Throws InvalidStateError on divergence.
    void restore(const std::filesystem::path& logPath);

private:
    template <class F>
    auto run(F&& fn) -> decltype(fn()) {
        using R = decltype(fn());
        auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
        auto future = task->get_future();
        enqueue([task] { (*task)(); });
        return future.get();
    }
    void enqueue(std::function<void()> job);
    void workerLoop();
    void tickerLoop();

    HistoryCard doSubmit(const std::string& text, std::optional<std::int64_t> createdAt);
    void doToggle(std::size_t index, bool enabled);
    void doRollback(const CardId& cardId);
    void reloadScene();
    void publish(const Json& event);
    void publishFeedback(FeedbackPhase phase, const std::string& detail);
    void log(Json entry);

    std::string id_;
    AuthoringPipeline& pipeline_;
    HostOptions options_;

    Session session_; // worker thread only

    std::mutex sceneMutex_;
    std::unique_ptr<sim::Scene> scene_;
    std::uint64_t seq_ = 0;
    std::string lastStepError_;

    std::mutex listenersMutex_;
    std::map<int, EventListener> listeners_;
    int nextToken_ = 1;

    std::mutex logMutex_;
    bool replaying_ = false;

    std::mutex queueMutex_;
    std::condition_variable queueCv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::atomic<bool> tickerStop_{false};
    std::condition_variable tickerCv_;
    std::mutex tickerMutex_;
    std::thread worker_;
    std::thread ticker_;
};

class SessionManager {
public:
    SessionManager(AuthoringPipeline& pipeline, HostOptions defaults = {},
                   std::optional<std::filesystem::path> logDir = std::nullopt);

    std::shared_ptr<SessionHost> create();
    // Throws NotFoundError.
    std::shared_ptr<SessionHost> get(const std::string& id) const;
    std::vector<std::string> ids() const;

    // Called with every newly created session.
    void onCreate(std::function<void(const std::shared_ptr<SessionHost>&)> hook) { onCreate_ = std::move(hook); }

private:
    AuthoringPipeline& pipeline_;
    HostOptions defaults_;
    std::optional<std::filesystem::path> logDir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<SessionHost>> hosts_;
    std::uint64_t counter_ = 0;
    std::function<void(const std::shared_ptr<SessionHost>&)> onCreate_;
};

} // namespace pinauthor::service
