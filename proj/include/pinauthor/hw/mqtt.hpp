#pragma once

#include "pinauthor/hw/wire.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace pinauthor::hw {

// MQTT 3.1.1 control packet types used by the QoS 0 subset.
enum class PacketType : std::uint8_t {
    Connect = 1,
    ConnAck = 2,
    Publish = 3,
    Subscribe = 8,
    SubAck = 9,
    PingReq = 12,
    PingResp = 13,
    Disconnect = 14,
};

struct Packet {
    PacketType type = PacketType::PingReq;
    std::uint8_t flags = 0;
    std::string body; // variable header and payload
};

std::string encodePacket(const Packet& packet);
std::string encodeConnect(const std::string& clientId, std::uint16_t keepAliveSeconds);
std::string encodePublish(const std::string& topic, std::string_view payload);
std::string encodeSubscribe(std::uint16_t packetId, const std::vector<std::string>& topics);

// Incremental decoder: feed bytes, pull complete packets. Throws
// ProtocolError on a malformed length or an oversized packet.
class PacketReader {
public:
    void feed(std::string_view bytes) { buffer_.append(bytes); }
    std::optional<Packet> next();

private:
    std::string buffer_;
};

struct PublishView {
    std::string topic;
    std::string payload;
};
// Throws ProtocolError.
PublishView parsePublish(const Packet& packet);
std::string parseConnectClientId(const Packet& packet);
std::vector<std::string> parseSubscribeTopics(const Packet& packet, std::uint16_t& packetId);

struct MqttEndpoint {
    std::string host = "127.0.0.1";
    int port = 1883;
};
// mqtt://host[:port] or host[:port]. Throws ValidationError.
MqttEndpoint parseMqttUrl(const std::string& url);

struct MqttOptions {
    std::string clientId = "pinauthor";
    std::chrono::seconds keepAlive{30};
    std::chrono::milliseconds backoffInitial{100};
    std::chrono::milliseconds backoffMax{5000};
};

// QoS 0 client with automatic reconnect. While disconnected, publishes are
// held one per topic (latest wins) and flushed on reconnect.
class MqttClient {
public:
    using Handler = std::function<void(const std::string& topic, const std::string& payload)>;

    MqttClient(MqttEndpoint endpoint, MqttOptions options = {});
    ~MqttClient();
    MqttClient(const MqttClient&) = delete;
    MqttClient& operator=(const MqttClient&) = delete;

    void start();
    void stop();

    // Handlers run on the client's network thread.
    void subscribe(const std::string& topic, Handler handler);
    void publish(const std::string& topic, std::string payload);

    bool connected() const { return connected_; }
    bool waitConnected(std::chrono::milliseconds timeout);
    std::uint64_t connections() const { return connections_; }
    std::size_t pendingPublishes();

private:
    void run();
    bool session(int fd);
    bool sendAll(int fd, std::string_view bytes);
    void sleepBackoff(std::chrono::milliseconds delay);

    MqttEndpoint endpoint_;
    MqttOptions options_;

    std::mutex mutex_;
    std::condition_variable cv_;
    std::map<std::string, Handler> handlers_;
    std::map<std::string, std::string> pending_;
    int fd_ = -1;
    std::atomic<bool> connected_{false};
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> connections_{0};
    std::uint16_t nextPacketId_ = 1;
    std::mutex writeMutex_;
    std::thread thread_;
};

// Single-process broker for QoS 0 publish/subscribe with exact topic
// matching plus the '#' wildcard. Used for local development and tests.
class LocalBroker {
public:
    LocalBroker() = default;
    ~LocalBroker();
    LocalBroker(const LocalBroker&) = delete;
    LocalBroker& operator=(const LocalBroker&) = delete;

    // Port 0 picks a free port. Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    // Drops every client connection; clients are expected to reconnect.
    void disconnectAll();
    std::size_t clientCount();
    std::uint64_t publishCount() const { return published_; }

private:
    struct Client;
    void acceptLoop();
    void serve(std::shared_ptr<Client> client);
    void route(const std::string& topic, std::string_view payload);

    int listenFd_ = -1;
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> published_{0};
    std::thread acceptThread_;
    std::mutex mutex_;
    std::vector<std::shared_ptr<Client>> clients_;
    std::vector<std::thread> clientThreads_;
};

} // namespace pinauthor::hw
