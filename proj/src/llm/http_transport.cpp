
#include <httplib.h>

#include "pinauthor/llm/gateway.hpp"

namespace pinauthor::llm {

namespace {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string prefix; // path prefix, no trailing slash
};

Endpoint splitUrl(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ValidationError("base URL must include a scheme: " + url);
    auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.origin = url.substr(0, slash);
    e.prefix = slash == std::string::npos ? "" : url.substr(slash);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    return e;
}

} // namespace

HttpTransport::HttpTransport(std::string baseUrl, std::string apiKey)
    : baseUrl_(std::move(baseUrl)), apiKey_(std::move(apiKey)) {}

Json HttpTransport::post(const std::string& path, const Json& body) {
    Endpoint endpoint = splitUrl(baseUrl_);
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(180);
    client.set_bearer_token_auth(apiKey_);
    auto result = client.Post(endpoint.prefix + path, body.dump(), "application/json");
    if (!result) throw std::runtime_error("transport error: " + httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300) {
        throw std::runtime_error("HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 500));
    }
    return Json::parse(result->body);
}

} // namespace pinauthor::llm
