#include "sensaudit/wire.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sensaudit/errors.hpp"

namespace sensaudit::wire {

using nlohmann::json;

Endpoint Endpoint::parse(const std::string& spec) {
    Endpoint ep;
    if (spec.rfind("tcp:", 0) == 0) {
        ep.kind = Kind::Tcp;
        const std::string rest = spec.substr(4);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= rest.size()) {
            throw ValidationError("endpoint '" + spec + "' is not tcp:host:port");
        }
        ep.host = rest.substr(0, colon);
        try {
            ep.port = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            throw ValidationError("endpoint '" + spec + "' has a non-numeric port");
        }
        if (ep.port <= 0 || ep.port > 65535) {
            throw ValidationError("endpoint '" + spec + "' port out of range");
        }
        return ep;
    }
    if (spec.rfind("cmd:", 0) == 0) {
        ep.kind = Kind::Command;
        std::istringstream is(spec.substr(4));
        std::string word;
        while (is >> word) ep.argv.push_back(word);
        if (ep.argv.empty()) throw ValidationError("endpoint '" + spec + "' has an empty command");
        return ep;
    }
    throw ValidationError("endpoint '" + spec + "' must start with tcp: or cmd:");
}

namespace {

void ignoreSigpipeOnce() {
    static const int ignored = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return 0;
    }();
    (void)ignored;
}

int connectTcp(const std::string& host, int port) {
    struct addrinfo hints;
    std::memset(&hints, 0, sizeof(hints));
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    const std::string portStr = std::to_string(port);
    const int rc = ::getaddrinfo(host.c_str(), portStr.c_str(), &hints, &res);
    if (rc != 0) {
        throw WireError("cannot resolve " + host + ": " + gai_strerror(rc));
    }
    int fd = -1;
    for (struct addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        throw WireError("cannot connect to tcp:" + host + ":" + portStr + ": " +
                        std::strerror(errno));
    }
    return fd;
}

struct SpawnResult {
    int readFd;
    int writeFd;
    pid_t pid;
};

SpawnResult spawnCommand(const std::vector<std::string>& argv) {
    int toChild[2];
    int fromChild[2];
    if (::pipe(toChild) != 0 || ::pipe(fromChild) != 0) {
        throw WireError(std::string("pipe failed: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw WireError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(toChild[0], STDIN_FILENO);
        ::dup2(fromChild[1], STDOUT_FILENO);
        ::close(toChild[0]);
        ::close(toChild[1]);
        ::close(fromChild[0]);
        ::close(fromChild[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        std::perror("execvp");
        ::_exit(127);
    }
    ::close(toChild[0]);
    ::close(fromChild[1]);
    return {fromChild[0], toChild[1], pid};
}

}  // namespace

std::unique_ptr<Connection> Connection::open(const Endpoint& endpoint,
                                             std::chrono::milliseconds timeout) {
    ignoreSigpipeOnce();
    if (endpoint.kind == Endpoint::Kind::Tcp) {
        const int fd = connectTcp(endpoint.host, endpoint.port);
        return std::unique_ptr<Connection>(new Connection(fd, fd, -1, timeout));
    }
    const SpawnResult child = spawnCommand(endpoint.argv);
    return std::unique_ptr<Connection>(new Connection(child.readFd, child.writeFd, child.pid, timeout));
}

std::unique_ptr<Connection> Connection::adopt(int readFd, int writeFd,
                                              std::chrono::milliseconds timeout) {
    ignoreSigpipeOnce();
    return std::unique_ptr<Connection>(new Connection(readFd, writeFd, -1, timeout));
}

Connection::Connection(int readFd, int writeFd, pid_t childPid, std::chrono::milliseconds timeout)
    : readFd_(readFd), writeFd_(writeFd), childPid_(childPid), timeout_(timeout) {
    try {
        handshake();
    } catch (...) {
        if (writeFd_ >= 0 && writeFd_ != readFd_) ::close(writeFd_);
        if (readFd_ >= 0) ::close(readFd_);
        readFd_ = writeFd_ = -1;
        if (childPid_ > 0) {
            int status = 0;
            ::waitpid(childPid_, &status, 0);
        }
        throw;
    }
    reader_ = std::thread([this] { readerLoop(); });
}

Connection::~Connection() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        closed_ = true;
    }
    if (writeFd_ >= 0 && writeFd_ != readFd_) ::close(writeFd_);
    if (readFd_ >= 0) ::shutdown(readFd_, SHUT_RDWR);  // no-op on pipes
    if (readFd_ >= 0 && writeFd_ == readFd_) ::close(readFd_), readFd_ = -1;
    if (reader_.joinable()) reader_.join();
    if (readFd_ >= 0) ::close(readFd_);
    if (childPid_ > 0) {
        int status = 0;
        ::waitpid(childPid_, &status, 0);
    }
}

namespace {

// Blocking line read with poll-based timeout; returns nullopt on EOF.
std::optional<std::string> readLineFd(int fd, std::string& buffer, std::chrono::milliseconds timeout,
                                      bool applyTimeout) {
    while (true) {
        const auto newline = buffer.find('\n');
        if (newline != std::string::npos) {
            std::string line = buffer.substr(0, newline);
            buffer.erase(0, newline + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (applyTimeout) {
            struct pollfd pfd{fd, POLLIN, 0};
            const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
            if (rc == 0) throw WireTimeoutError("timed out waiting for a protocol line");
            if (rc < 0) throw WireError(std::string("poll failed: ") + std::strerror(errno));
        }
        char chunk[4096];
        const ssize_t n = ::read(fd, chunk, sizeof(chunk));
        if (n == 0) return std::nullopt;
        if (n < 0) {
            if (errno == EINTR) continue;
            return std::nullopt;  // connection torn down
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

void writeAll(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw WireError(std::string("write failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

}  // namespace

void Connection::handshake() {
    json hello;
    hello["proto"] = kProtocolVersion;
    writeAll(writeFd_, hello.dump() + "\n");

    auto line = readLineFd(readFd_, readBuffer_, timeout_, true);
    if (!line) throw WireError("connection closed during handshake");
    json reply;
    try {
        reply = json::parse(*line);
    } catch (const json::parse_error&) {
        throw WireProtocolError("handshake is not valid JSON: " + *line);
    }
    if (!reply.contains("proto") || reply["proto"] != kProtocolVersion) {
        throw WireProtocolError("peer announced unsupported protocol: " + *line);
    }
}

void Connection::readerLoop() {
    std::string buffer = std::move(readBuffer_);
    while (true) {
        std::optional<std::string> line;
        try {
            line = readLineFd(readFd_, buffer, timeout_, false);
        } catch (const Error& e) {
            failAllPending(e.what());
            return;
        }
        if (!line) {
            failAllPending("connection closed by peer");
            return;
        }
        if (line->empty()) continue;
        json obj = json::parse(*line, nullptr, false);
        if (obj.is_discarded() || !obj.contains("id") || !obj["id"].is_string()) {
            failAllPending("malformed response line: " + *line);
            return;
        }
        const std::string id = obj["id"].get<std::string>();
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = pending_.find(id);
        if (it == pending_.end()) {
            closeReason_ = "response for unknown id '" + id + "'";
            closed_ = true;
            for (auto& [k, slot] : pending_) slot = std::nullopt;
            cv_.notify_all();
            return;
        }
        it->second = *line;
        cv_.notify_all();
    }
}

void Connection::failAllPending(const std::string& reason) {
    std::lock_guard<std::mutex> lock(mutex_);
    closed_ = true;
    if (closeReason_.empty()) closeReason_ = reason;
    cv_.notify_all();
}

std::string Connection::roundTrip(const std::string& payloadJsonWithoutId) {
    return sendAndAwait({payloadJsonWithoutId}).front();
}

std::vector<std::string> Connection::roundTripMany(const std::vector<std::string>& payloads) {
    return sendAndAwait(payloads);
}

std::vector<std::string> Connection::sendAndAwait(const std::vector<std::string>& payloads) {
    std::vector<std::string> ids;
    ids.reserve(payloads.size());
    std::string outgoing;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (closed_) throw WireError("connection is closed: " + closeReason_);
        for (const auto& payload : payloads) {
            json obj = json::parse(payload);
            const std::string id = "q" + std::to_string(nextId_++);
            obj["id"] = id;
            ids.push_back(id);
            pending_.emplace(id, std::nullopt);
            outgoing += obj.dump();
            outgoing += "\n";
        }
    }
    writeAll(writeFd_, outgoing);

    std::vector<std::string> results(ids.size());
    std::unique_lock<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const bool ok = cv_.wait_for(lock, timeout_, [&] {
            auto it = pending_.find(ids[i]);
            return (it != pending_.end() && it->second.has_value()) || closed_;
        });
        auto it = pending_.find(ids[i]);
        if (it != pending_.end() && it->second.has_value()) {
            results[i] = std::move(*it->second);
            pending_.erase(it);
            continue;
        }
        for (const auto& id : ids) pending_.erase(id);
        if (closed_) throw WireError("connection failed: " + closeReason_);
        if (!ok) throw WireTimeoutError("timed out waiting for response " + ids[i]);
        throw WireError("response slot vanished for " + ids[i]);
    }
    return results;
}

ExternalClassifier::ExternalClassifier(const std::string& endpointSpec,
                                       std::chrono::milliseconds timeout)
    : endpointSpec_(endpointSpec), connection_(Connection::open(Endpoint::parse(endpointSpec), timeout)) {}

namespace {

double extractProbability(const std::string& line) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.contains("p") || !obj["p"].is_number()) {
        throw WireProtocolError("response lacks numeric 'p': " + line);
    }
    const double p = obj["p"].get<double>();
    if (!(p >= 0.0 && p <= 1.0)) {
        throw WireProtocolError("probability " + std::to_string(p) + " outside [0,1]: " + line);
    }
    return p;
}

}  // namespace

double ExternalClassifier::predict(const Note& note) const {
    json req;
    req["tokens"] = note.tokens;
    return extractProbability(connection_->roundTrip(req.dump()));
}

std::vector<double> ExternalClassifier::predictMany(const std::vector<Note>& notes) const {
    std::vector<std::string> payloads;
    payloads.reserve(notes.size());
    for (const auto& note : notes) {
        json req;
        req["tokens"] = note.tokens;
        payloads.push_back(req.dump());
    }
    const auto lines = connection_->roundTripMany(payloads);
    std::vector<double> out;
    out.reserve(lines.size());
    for (const auto& line : lines) out.push_back(extractProbability(line));
    return out;
}

WireContextProvider::WireContextProvider(const std::string& endpointSpec,
                                         std::chrono::milliseconds timeout)
    : endpointSpec_(endpointSpec), connection_(Connection::open(Endpoint::parse(endpointSpec), timeout)) {}

std::vector<Token> WireContextProvider::replacements(const Note& note, std::size_t maskIndex, int k) {
    if (maskIndex >= note.tokens.size()) {
        throw ValidationError("mask index out of range for note '" + note.id + "'");
    }
    json req;
    req["tokens"] = note.tokens;
    req["mask_index"] = maskIndex;
    req["k"] = k;
    const std::string line = connection_->roundTrip(req.dump());
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.contains("replacements") || !obj["replacements"].is_array()) {
        throw WireProtocolError("response lacks 'replacements' array: " + line);
    }
    std::vector<Token> out;
    for (const auto& t : obj["replacements"]) {
        if (!t.is_string()) throw WireProtocolError("non-string replacement in: " + line);
        out.push_back(t.get<std::string>());
    }
    return out;
}

std::string tokenSequenceHash(const std::vector<Token>& tokens) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    bool first = true;
    for (const auto& tok : tokens) {
        if (!first) mix(0x1f);
        first = false;
        for (unsigned char c : tok) mix(c);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ReplayClassifier::ReplayClassifier(std::map<std::string, double> byNoteId,
                                   std::map<std::string, double> byHash)
    : byNoteId_(std::move(byNoteId)), byHash_(std::move(byHash)) {}

ReplayClassifier ReplayClassifier::fromFile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open replay file " + path.string());
    std::map<std::string, double> byId;
    std::map<std::string, double> byHash;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.contains("p")) {
            throw ParseError(path.string() + ":" + std::to_string(lineNo) + ": bad replay row");
        }
        const double p = obj["p"].get<double>();
        if (obj.contains("note_id")) {
            byId[obj["note_id"].get<std::string>()] = p;
        } else if (obj.contains("token_hash")) {
            byHash[obj["token_hash"].get<std::string>()] = p;
        } else {
            throw ParseError(path.string() + ":" + std::to_string(lineNo) +
                             ": replay row needs note_id or token_hash");
        }
    }
    return ReplayClassifier(std::move(byId), std::move(byHash));
}

double ReplayClassifier::predict(const Note& note) const {
    const std::string hash = tokenSequenceHash(note.tokens);
    if (auto it = byHash_.find(hash); it != byHash_.end()) return it->second;
    if (auto it = byNoteId_.find(note.id); it != byNoteId_.end()) return it->second;
    throw ValidationError("replay classifier has no probability for note '" + note.id + "' (hash " +
                          hash + ")");
}

}  // namespace sensaudit::wire
