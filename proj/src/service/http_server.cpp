#include "pinauthor/service/http_server.hpp"

#include "pinauthor/llm/gateway.hpp"

#include <httplib.h>

namespace pinauthor::service {

namespace web {
std::string_view index();
}

namespace {

constexpr std::size_t kMaxQueuedEvents = 256;

// Per-connection buffer between the session's publisher and one stream.
struct EventQueue {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Json> events;
    bool frames = true;

    void push(const Json& event) {
        bool isFrame = event.value("type", "") == "frame";
        if (isFrame && !frames) return;
        {
            std::lock_guard lock(mutex);
            if (events.size() >= kMaxQueuedEvents) {
                auto oldestFrame = std::find_if(events.begin(), events.end(),
                                                [](const Json& e) { return e.value("type", "") == "frame"; });
                if (oldestFrame == events.end()) oldestFrame = events.begin();
                events.erase(oldestFrame);
            }
            events.push_back(event);
        }
        cv.notify_one();
    }
};

Json parseBody(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    Json body;
    try {
        body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("request body is not JSON: ") + e.what());
    }
    if (!body.is_object()) throw ValidationError("request body must be a JSON object");
    return body;
}

template <class T>
T require(const Json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end()) throw ValidationError(std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const Json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        try {
            inner(req, res);
        } catch (const std::exception& e) {
            ErrorResponse err = describeError(e);
            reply(res, err.status, err.body);
        }
    };
}

} // namespace

ErrorResponse describeError(const std::exception& e) {
    auto make = [&](int status, const char* kind) {
        return ErrorResponse{status, {{"error", {{"kind", kind}, {"message", e.what()}}}}};
    };
    if (auto* g = dynamic_cast<const GenerationFailedError*>(&e)) {
        ErrorResponse r = make(422, "generation-failed");
        r.body["error"]["category"] = toString(g->category);
        return r;
    }
    if (dynamic_cast<const NotFoundError*>(&e)) return make(404, "not-found");
    if (dynamic_cast<const InvalidStateError*>(&e)) return make(409, "invalid-state");
    if (dynamic_cast<const BoundsError*>(&e)) return make(400, "bounds");
    if (dynamic_cast<const ValidationError*>(&e)) return make(400, "validation");
    if (dynamic_cast<const SchemaError*>(&e)) return make(502, "schema");
    if (dynamic_cast<const llm::ReplayMissError*>(&e)) return make(502, "replay-miss");
    if (dynamic_cast<const llm::GatewayError*>(&e)) return make(502, "gateway");
    if (dynamic_cast<const Error*>(&e)) return make(500, "error");
    return make(500, "internal");
}

HttpService::HttpService(SessionManager& sessions)
    : sessions_(sessions), server_(std::make_unique<httplib::Server>()),
      stopping_(std::make_shared<std::atomic<bool>>(false)) {
    routes();
}

HttpService::~HttpService() { stop(); }

void HttpService::routes() {
    httplib::Server& s = *server_;
    auto host = [this](const httplib::Request& req) { return sessions_.get(req.matches[1]); };

    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(std::string(web::index()), "text/html; charset=utf-8");
    });
    s.Post("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
               reply(res, 201, {{"sessionId", sessions_.create()->id()}});
           }));
    s.Post(R"(/sessions/([^/]+)/prompt)", guarded([host](const httplib::Request& req, httplib::Response& res) {
               auto h = host(req);
               std::string text = require<std::string>(parseBody(req), "text");
               reply(res, 200, {{"card", h->submitPrompt(text)}});
           }));
    s.Post(R"(/sessions/([^/]+)/params)", guarded([host](const httplib::Request& req, httplib::Response& res) {
               auto h = host(req);
               Json body = parseBody(req);
               h->setParameter(require<std::string>(body, "name"), require<double>(body, "value"));
               reply(res, 200, {{"ok", true}});
           }));
    s.Post(R"(/sessions/([^/]+)/buttons)", guarded([host](const httplib::Request& req, httplib::Response& res) {
               auto h = host(req);
               Json body = parseBody(req);
               h->pressButton(require<int>(body, "groupId"), require<bool>(body, "pressed"));
               reply(res, 200, {{"ok", true}});
           }));
    s.Post(R"(/sessions/([^/]+)/artifacts/(\d+)/toggle)",
           guarded([host](const httplib::Request& req, httplib::Response& res) {
               auto h = host(req);
               std::size_t index = std::stoul(req.matches[2]);
               reply(res, 200, {{"index", index}, {"enabled", h->toggleArtifact(index)}});
           }));
    s.Post(R"(/sessions/([^/]+)/rollback)", guarded([host](const httplib::Request& req, httplib::Response& res) {
               auto h = host(req);
               std::string cardId = require<std::string>(parseBody(req), "cardId");
               h->rollbackTo(cardId);
               reply(res, 200, {{"activeCardId", cardId}});
           }));
    s.Get(R"(/sessions/([^/]+)/history)", guarded([host](const httplib::Request& req, httplib::Response& res) {
              reply(res, 200, host(req)->history());
          }));
    s.Get(R"(/sessions/([^/]+)/events)", guarded([host, this](const httplib::Request& req, httplib::Response& res) {
              auto h = host(req);
              auto queue = std::make_shared<EventQueue>();
              queue->frames = req.get_param_value("frames") != "0";
              int token = h->subscribe([queue](const Json& event) { queue->push(event); });
              auto stopping = stopping_;
              res.set_header("Cache-Control", "no-cache");
              res.set_chunked_content_provider(
                  "text/event-stream",
                  [queue, stopping](std::size_t, httplib::DataSink& sink) {
                      std::unique_lock lock(queue->mutex);
                      queue->cv.wait_for(lock, std::chrono::milliseconds(200),
                                         [&] { return !queue->events.empty() || stopping->load(); });
                      if (stopping->load()) {
                          sink.done();
                          return true;
                      }
                      std::string chunk;
                      while (!queue->events.empty()) {
                          const Json& e = queue->events.front();
                          chunk += "event: " + e.value("type", std::string("message")) + "\ndata: " + e.dump() + "\n\n";
                          queue->events.pop_front();
                      }
                      lock.unlock();
                      if (chunk.empty()) return sink.is_writable();
                      return sink.write(chunk.data(), chunk.size());
                  },
                  [h, token](bool) { h->unsubscribe(token); });
          }));
}

int HttpService::start(const std::string& host, int port) {
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw InvalidStateError("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void HttpService::run(const std::string& host, int port) {
    if (!server_->listen(host, port)) throw InvalidStateError("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpService::stop() {
    stopping_->store(true);
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace pinauthor::service
