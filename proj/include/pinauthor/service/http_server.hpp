#pragma once

#include "pinauthor/service/session_host.hpp"

#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace pinauthor::service {

// Error body and HTTP status for an exception escaping a handler:
// {"error": {"kind": "not-found", "message": ...}}.
struct ErrorResponse {
    int status = 500;
    Json body;
};
ErrorResponse describeError(const std::exception& e);

// JSON endpoints over a SessionManager plus a server-sent event stream per
// session at /sessions/{id}/events (add ?frames=0 to omit frame events).
class HttpService {
public:
    explicit HttpService(SessionManager& sessions);
    ~HttpService();
    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    // Binds and serves on a background thread; port 0 picks a free port.
    // Returns the bound port. Throws InvalidStateError when binding fails.
    int start(const std::string& host, int port);
    // Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

private:
    void routes();

    SessionManager& sessions_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::shared_ptr<std::atomic<bool>> stopping_;
};

} // namespace pinauthor::service
