#include "pinauthor/hw/mqtt.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace pinauthor::hw {

namespace {

constexpr std::size_t kMaxPacketBytes = 1u << 20;

void putU16(std::string& out, std::uint16_t v) {
    out += static_cast<char>(v >> 8);
    out += static_cast<char>(v & 0xff);
}

void putString(std::string& out, std::string_view s) {
    if (s.size() > 0xffff) throw ValidationError("MQTT string longer than 65535 bytes");
    putU16(out, static_cast<std::uint16_t>(s.size()));
    out.append(s);
}

struct Cursor {
    std::string_view data;
    std::size_t pos = 0;

    std::uint16_t u16() {
        if (pos + 2 > data.size()) throw ProtocolError("truncated MQTT packet");
        auto v = static_cast<std::uint16_t>((static_cast<std::uint8_t>(data[pos]) << 8) |
                                            static_cast<std::uint8_t>(data[pos + 1]));
        pos += 2;
        return v;
    }
    std::uint8_t u8() {
        if (pos + 1 > data.size()) throw ProtocolError("truncated MQTT packet");
        return static_cast<std::uint8_t>(data[pos++]);
    }
    std::string str() {
        std::uint16_t n = u16();
        if (pos + n > data.size()) throw ProtocolError("truncated MQTT string");
        std::string s(data.substr(pos, n));
        pos += n;
        return s;
    }
    std::string rest() {
        std::string s(data.substr(pos));
        pos = data.size();
        return s;
    }
};

int connectTcp(const MqttEndpoint& endpoint, std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    if (getaddrinfo(endpoint.host.c_str(), std::to_string(endpoint.port).c_str(), &hints, &result) != 0) return -1;
    int fd = -1;
    for (addrinfo* ai = result; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int flags = fcntl(fd, F_GETFL, 0);
        fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc != 0 && errno == EINPROGRESS) {
            pollfd p{fd, POLLOUT, 0};
            int err = 0;
            socklen_t len = sizeof err;
            if (poll(&p, 1, static_cast<int>(timeout.count())) == 1 &&
                getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) == 0 && err == 0) {
                rc = 0;
            }
        }
        if (rc == 0) {
            fcntl(fd, F_SETFL, flags);
            int one = 1;
            setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            break;
        }
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(result);
    return fd;
}

bool writeAll(int fd, std::string_view bytes) {
    while (!bytes.empty()) {
        ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

// Reads into `reader` until a packet is available or `timeout` passes.
std::optional<Packet> readPacket(int fd, PacketReader& reader, std::chrono::milliseconds timeout, bool& closed) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto p = reader.next()) return p;
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd pfd{fd, POLLIN, 0};
        int rc = poll(&pfd, 1, static_cast<int>(left.count()));
        if (rc < 0 && errno == EINTR) continue;
        if (rc <= 0) return std::nullopt;
        char buf[4096];
        ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n <= 0) {
            closed = true;
            return std::nullopt;
        }
        reader.feed({buf, static_cast<std::size_t>(n)});
    }
}

bool topicMatches(const std::string& filter, const std::string& topic) {
    if (filter == "#" || filter == topic) return true;
    if (filter.size() >= 2 && filter.compare(filter.size() - 2, 2, "/#") == 0) {
        std::string prefix = filter.substr(0, filter.size() - 1);
        return topic.rfind(prefix, 0) == 0 || topic == filter.substr(0, filter.size() - 2);
    }
    return false;
}

} // namespace

std::string encodePacket(const Packet& packet) {
    if (packet.body.size() > kMaxPacketBytes) throw ValidationError("MQTT packet too large");
    std::string out;
    out += static_cast<char>((static_cast<std::uint8_t>(packet.type) << 4) | (packet.flags & 0x0f));
    std::size_t len = packet.body.size();
    do {
        auto digit = static_cast<std::uint8_t>(len % 128);
        len /= 128;
        if (len > 0) digit |= 0x80;
        out += static_cast<char>(digit);
    } while (len > 0);
    out += packet.body;
    return out;
}

std::string encodeConnect(const std::string& clientId, std::uint16_t keepAliveSeconds) {
    std::string body;
    putString(body, "MQTT");
    body += static_cast<char>(4);    // protocol level 3.1.1
    body += static_cast<char>(0x02); // clean session
    putU16(body, keepAliveSeconds);
    putString(body, clientId);
    return encodePacket({PacketType::Connect, 0, body});
}

std::string encodePublish(const std::string& topic, std::string_view payload) {
    std::string body;
    putString(body, topic);
    body.append(payload);
    return encodePacket({PacketType::Publish, 0, body});
}

std::string encodeSubscribe(std::uint16_t packetId, const std::vector<std::string>& topics) {
    std::string body;
    putU16(body, packetId);
    for (const auto& t : topics) {
        putString(body, t);
        body += static_cast<char>(0);
    }
    return encodePacket({PacketType::Subscribe, 0x02, body});
}

std::optional<Packet> PacketReader::next() {
    if (buffer_.size() < 2) return std::nullopt;
    std::size_t len = 0;
    std::size_t multiplier = 1;
    std::size_t i = 1;
    for (;; ++i) {
        if (i > 4) throw ProtocolError("MQTT remaining length exceeds four bytes");
        if (i >= buffer_.size()) return std::nullopt;
        auto digit = static_cast<std::uint8_t>(buffer_[i]);
        len += (digit & 0x7f) * multiplier;
        multiplier *= 128;
        if (!(digit & 0x80)) break;
    }
    if (len > kMaxPacketBytes) throw ProtocolError("MQTT packet exceeds 1 MiB");
    std::size_t header = i + 1;
    if (buffer_.size() < header + len) return std::nullopt;
    auto first = static_cast<std::uint8_t>(buffer_[0]);
    Packet p;
    p.type = static_cast<PacketType>(first >> 4);
    p.flags = first & 0x0f;
    p.body = buffer_.substr(header, len);
    buffer_.erase(0, header + len);
    return p;
}

PublishView parsePublish(const Packet& packet) {
    if (packet.type != PacketType::Publish) throw ProtocolError("not a PUBLISH packet");
    Cursor c{packet.body};
    PublishView v;
    v.topic = c.str();
    if ((packet.flags >> 1) & 0x03) c.u16(); // packet id for QoS > 0
    v.payload = c.rest();
    return v;
}

std::string parseConnectClientId(const Packet& packet) {
    if (packet.type != PacketType::Connect) throw ProtocolError("not a CONNECT packet");
    Cursor c{packet.body};
    if (c.str() != "MQTT") throw ProtocolError("unsupported protocol name");
    if (c.u8() != 4) throw ProtocolError("unsupported protocol level");
    c.u8();
    c.u16();
    return c.str();
}

std::vector<std::string> parseSubscribeTopics(const Packet& packet, std::uint16_t& packetId) {
    if (packet.type != PacketType::Subscribe) throw ProtocolError("not a SUBSCRIBE packet");
    Cursor c{packet.body};
    packetId = c.u16();
    std::vector<std::string> topics;
    while (c.pos < c.data.size()) {
        topics.push_back(c.str());
        c.u8();
    }
    if (topics.empty()) throw ProtocolError("SUBSCRIBE without topics");
    return topics;
}

MqttEndpoint parseMqttUrl(const std::string& url) {
    std::string rest = url;
    if (auto p = rest.find("://"); p != std::string::npos) {
        std::string scheme = rest.substr(0, p);
        if (scheme != "mqtt" && scheme != "tcp") throw ValidationError("unsupported MQTT scheme '" + scheme + "'");
        rest = rest.substr(p + 3);
    }
    while (!rest.empty() && rest.back() == '/') rest.pop_back();
    MqttEndpoint e;
    if (auto colon = rest.rfind(':'); colon != std::string::npos) {
        try {
            std::size_t used = 0;
            e.port = std::stoi(rest.substr(colon + 1), &used);
            if (used != rest.size() - colon - 1) throw std::invalid_argument("port");
        } catch (const std::exception&) {
            throw ValidationError("bad MQTT port in '" + url + "'");
        }
        rest = rest.substr(0, colon);
    }
    if (rest.empty()) throw ValidationError("MQTT URL '" + url + "' has no host");
    if (e.port <= 0 || e.port > 65535) throw ValidationError("MQTT port out of range in '" + url + "'");
    e.host = rest;
    return e;
}

MqttClient::MqttClient(MqttEndpoint endpoint, MqttOptions options)
    : endpoint_(std::move(endpoint)), options_(std::move(options)) {}

MqttClient::~MqttClient() { stop(); }

void MqttClient::start() {
    if (thread_.joinable()) return;
    stopping_ = false;
    thread_ = std::thread([this] { run(); });
}

void MqttClient::stop() {
    stopping_ = true;
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

bool MqttClient::waitConnected(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [this] { return connected_.load(); });
}

std::size_t MqttClient::pendingPublishes() {
    std::lock_guard lock(mutex_);
    return pending_.size();
}

bool MqttClient::sendAll(int fd, std::string_view bytes) { return writeAll(fd, bytes); }

void MqttClient::subscribe(const std::string& topic, Handler handler) {
    std::lock_guard write(writeMutex_);
    int fd;
    std::uint16_t id;
    {
        std::lock_guard lock(mutex_);
        handlers_[topic] = std::move(handler);
        fd = fd_;
        id = nextPacketId_++;
        if (nextPacketId_ == 0) nextPacketId_ = 1;
    }
    if (fd >= 0 && !sendAll(fd, encodeSubscribe(id, {topic}))) ::shutdown(fd, SHUT_RDWR);
}

void MqttClient::publish(const std::string& topic, std::string payload) {
    std::lock_guard write(writeMutex_);
    int fd;
    {
        std::lock_guard lock(mutex_);
        fd = fd_;
        if (fd < 0) {
            pending_[topic] = std::move(payload);
            return;
        }
    }
    if (!sendAll(fd, encodePublish(topic, payload))) {
        std::lock_guard lock(mutex_);
        pending_[topic] = std::move(payload);
        ::shutdown(fd, SHUT_RDWR);
    }
}

void MqttClient::sleepBackoff(std::chrono::milliseconds delay) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, delay, [this] { return stopping_.load(); });
}

void MqttClient::run() {
    auto backoff = options_.backoffInitial;
    while (!stopping_) {
        int fd = connectTcp(endpoint_, std::chrono::milliseconds(2000));
        bool established = fd >= 0 && session(fd);
        if (fd >= 0) ::close(fd);
        if (stopping_) break;
        backoff = established ? options_.backoffInitial : std::min(backoff * 2, options_.backoffMax);
        sleepBackoff(backoff);
    }
}

bool MqttClient::session(int fd) {
    PacketReader reader;
    bool closed = false;
    auto keepAlive = static_cast<std::uint16_t>(options_.keepAlive.count());
    if (!writeAll(fd, encodeConnect(options_.clientId, keepAlive))) return false;
    try {
        auto ack = readPacket(fd, reader, std::chrono::milliseconds(5000), closed);
        if (!ack || ack->type != PacketType::ConnAck || ack->body.size() != 2 || ack->body[1] != 0) return false;
    } catch (const ProtocolError&) {
        return false;
    }

    {
        std::lock_guard write(writeMutex_);
        std::vector<std::string> topics;
        std::map<std::string, std::string> pending;
        std::uint16_t id;
        {
            std::lock_guard lock(mutex_);
            for (const auto& [topic, handler] : handlers_) topics.push_back(topic);
            pending.swap(pending_);
            id = nextPacketId_++;
            if (nextPacketId_ == 0) nextPacketId_ = 1;
        }
        bool ok = topics.empty() || writeAll(fd, encodeSubscribe(id, topics));
        for (const auto& [topic, payload] : pending) ok = ok && writeAll(fd, encodePublish(topic, payload));
        if (!ok) {
            std::lock_guard lock(mutex_);
            for (auto& [topic, payload] : pending) pending_.try_emplace(topic, std::move(payload));
            return true;
        }
        std::lock_guard lock(mutex_);
        fd_ = fd;
        connected_ = true;
        ++connections_;
    }
    cv_.notify_all();

    auto lastSend = std::chrono::steady_clock::now();
    auto pingEvery = std::max<std::chrono::milliseconds>(options_.keepAlive / 2, std::chrono::milliseconds(100));
    while (!stopping_ && !closed) {
        std::optional<Packet> packet;
        try {
            packet = readPacket(fd, reader, std::chrono::milliseconds(100), closed);
        } catch (const ProtocolError&) {
            break;
        }
        if (packet && packet->type == PacketType::Publish) {
            PublishView v;
            try {
                v = parsePublish(*packet);
            } catch (const ProtocolError&) {
                break;
            }
            Handler handler;
            {
                std::lock_guard lock(mutex_);
                for (const auto& [filter, h] : handlers_) {
                    if (topicMatches(filter, v.topic)) handler = h;
                }
            }
            if (handler) handler(v.topic, v.payload);
        }
        if (options_.keepAlive.count() > 0 && std::chrono::steady_clock::now() - lastSend >= pingEvery) {
            std::lock_guard write(writeMutex_);
            if (!writeAll(fd, encodePacket({PacketType::PingReq, 0, ""}))) break;
            lastSend = std::chrono::steady_clock::now();
        }
    }
    std::lock_guard write(writeMutex_);
    if (stopping_) writeAll(fd, encodePacket({PacketType::Disconnect, 0, ""}));
    std::lock_guard lock(mutex_);
    fd_ = -1;
    connected_ = false;
    return true;
}

struct LocalBroker::Client {
    int fd = -1;
    std::mutex writeMutex;
    std::vector<std::string> filters;
    std::atomic<bool> alive{true};
};

LocalBroker::~LocalBroker() { stop(); }

int LocalBroker::start(const std::string& host, int port) {
    listenFd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listenFd_ < 0) throw Error("cannot create broker socket");
    int one = 1;
    setsockopt(listenFd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw ValidationError("broker host must be an IPv4 address");
    if (::bind(listenFd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listenFd_, 16) != 0) {
        ::close(listenFd_);
        listenFd_ = -1;
        throw Error("cannot bind broker to " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
    }
    socklen_t len = sizeof addr;
    getsockname(listenFd_, reinterpret_cast<sockaddr*>(&addr), &len);
    stopping_ = false;
    acceptThread_ = std::thread([this] { acceptLoop(); });
    return ntohs(addr.sin_port);
}

void LocalBroker::stop() {
    stopping_ = true;
    if (acceptThread_.joinable()) acceptThread_.join();
    if (listenFd_ >= 0) {
        ::close(listenFd_);
        listenFd_ = -1;
    }
    disconnectAll();
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(mutex_);
        threads.swap(clientThreads_);
    }
    for (auto& t : threads) t.join();
}

void LocalBroker::disconnectAll() {
    std::lock_guard lock(mutex_);
    for (auto& c : clients_) ::shutdown(c->fd, SHUT_RDWR);
}

std::size_t LocalBroker::clientCount() {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(
        std::count_if(clients_.begin(), clients_.end(), [](const auto& c) { return c->alive.load(); }));
}

void LocalBroker::acceptLoop() {
    while (!stopping_) {
        pollfd p{listenFd_, POLLIN, 0};
        if (poll(&p, 1, 100) != 1) continue;
        int fd = ::accept(listenFd_, nullptr, nullptr);
        if (fd < 0) continue;
        auto client = std::make_shared<Client>();
        client->fd = fd;
        std::lock_guard lock(mutex_);
        clients_.push_back(client);
        clientThreads_.emplace_back([this, client] { serve(client); });
    }
}

void LocalBroker::serve(std::shared_ptr<Client> client) {
    PacketReader reader;
    bool closed = false;
    bool greeted = false;
    try {
        while (!stopping_ && !closed) {
            auto packet = readPacket(client->fd, reader, std::chrono::milliseconds(100), closed);
            if (!packet) continue;
            if (!greeted && packet->type != PacketType::Connect) break;
            std::string reply;
            switch (packet->type) {
            case PacketType::Connect:
                parseConnectClientId(*packet);
                greeted = true;
                reply = encodePacket({PacketType::ConnAck, 0, std::string("\0\0", 2)});
                break;
            case PacketType::Subscribe: {
                std::uint16_t id = 0;
                auto topics = parseSubscribeTopics(*packet, id);
                std::string body;
                putU16(body, id);
                body.append(topics.size(), '\0');
                {
                    std::lock_guard lock(mutex_);
                    for (auto& t : topics) client->filters.push_back(t);
                }
                reply = encodePacket({PacketType::SubAck, 0, body});
                break;
            }
            case PacketType::Publish: {
                PublishView v = parsePublish(*packet);
                ++published_;
                route(v.topic, v.payload);
                break;
            }
            case PacketType::PingReq: reply = encodePacket({PacketType::PingResp, 0, ""}); break;
            case PacketType::Disconnect: closed = true; break;
            default: break;
            }
            if (!reply.empty()) {
                std::lock_guard lock(client->writeMutex);
                if (!writeAll(client->fd, reply)) break;
            }
        }
    } catch (const Error&) {
    }
    client->alive = false;
    ::shutdown(client->fd, SHUT_RDWR);
    std::lock_guard lock(mutex_);
    clients_.erase(std::remove(clients_.begin(), clients_.end(), client), clients_.end());
    ::close(client->fd);
}

void LocalBroker::route(const std::string& topic, std::string_view payload) {
    std::vector<std::shared_ptr<Client>> targets;
    {
        std::lock_guard lock(mutex_);
        for (const auto& c : clients_) {
            if (!c->alive) continue;
            if (std::any_of(c->filters.begin(), c->filters.end(),
                            [&](const std::string& f) { return topicMatches(f, topic); })) {
                targets.push_back(c);
            }
        }
    }
    std::string bytes = encodePublish(topic, payload);
    for (const auto& c : targets) {
        std::lock_guard lock(c->writeMutex);
        writeAll(c->fd, bytes);
    }
}

} // namespace pinauthor::hw
