#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sensaudit/classifier.hpp"
#include "sensaudit/corpus.hpp"
#include "sensaudit/perturb.hpp"

namespace sensaudit::wire {

inline constexpr const char* kProtocolVersion = "sensaudit/1";

// "tcp:host:port" or "cmd:program arg...". Command arguments are split on
// whitespace; no shell quoting.
struct Endpoint {
    enum class Kind { Tcp, Command };
    Kind kind = Kind::Tcp;
    std::string host;
    int port = 0;
    std::vector<std::string> argv;

    static Endpoint parse(const std::string& spec);
};

// One line-delimited JSON connection. Both sides announce
// {"proto": "sensaudit/1"} before any request. Requests carry a connection-
// unique "id"; responses may arrive in any order and are matched by id, so
// callers on multiple threads can keep requests in flight concurrently.
class Connection {
  public:
    static std::unique_ptr<Connection> open(const Endpoint& endpoint,
                                            std::chrono::milliseconds timeout = std::chrono::seconds(30));
    // Adopt an already-connected byte stream (test hook; fds are owned).
    static std::unique_ptr<Connection> adopt(int readFd, int writeFd,
                                             std::chrono::milliseconds timeout = std::chrono::seconds(30));

    ~Connection();
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    // Sends `payload` with a fresh "id" and blocks for the matching response.
    // Throws WireTimeoutError / WireProtocolError / WireError.
    std::string roundTrip(const std::string& payloadJsonWithoutId);

    // Pipelines all requests before collecting responses; results align with
    // the input order regardless of the order replies arrive in.
    std::vector<std::string> roundTripMany(const std::vector<std::string>& payloads);

  private:
    Connection(int readFd, int writeFd, pid_t childPid, std::chrono::milliseconds timeout);
    void handshake();
    void readerLoop();
    void failAllPending(const std::string& reason);
    std::vector<std::string> sendAndAwait(const std::vector<std::string>& payloads);

    int readFd_ = -1;
    int writeFd_ = -1;
    pid_t childPid_ = -1;
    std::chrono::milliseconds timeout_;

    std::mutex mutex_;
    std::condition_variable cv_;
    std::uint64_t nextId_ = 0;
    std::map<std::string, std::optional<std::string>> pending_;  // id -> response when ready
    bool closed_ = false;
    std::string closeReason_;
    std::thread reader_;

    std::string readBuffer_;
};

// Classifier backed by a remote model speaking the wire protocol.
// Probabilities outside [0,1] raise WireProtocolError; nothing is clamped.
class ExternalClassifier : public Classifier {
  public:
    explicit ExternalClassifier(const std::string& endpointSpec,
                                std::chrono::milliseconds timeout = std::chrono::seconds(30));

    double predict(const Note& note) const override;
    std::vector<double> predictMany(const std::vector<Note>& notes) const;
    std::string id() const override { return "external(" + endpointSpec_ + ")"; }
    bool threadSafe() const override { return true; }

  private:
    std::string endpointSpec_;
    std::unique_ptr<Connection> connection_;
};

// Context-replacement provider speaking the wire protocol:
// request {"id", "tokens", "mask_index", "k"} -> response {"id", "replacements"}.
class WireContextProvider : public ContextProvider {
  public:
    explicit WireContextProvider(const std::string& endpointSpec,
                                 std::chrono::milliseconds timeout = std::chrono::seconds(30));

    std::vector<Token> replacements(const Note& note, std::size_t maskIndex, int k) override;
    std::string name() const override { return "wire(" + endpointSpec_ + ")"; }

  private:
    std::string endpointSpec_;
    std::unique_ptr<Connection> connection_;
};

// Replays recorded probabilities: perturbed notes matched by token-sequence
// hash, unperturbed notes by id. Lookup misses are errors, not zeros.
class ReplayClassifier : public Classifier {
  public:
    // JSONL rows: {"note_id": ..., "p": ...} or {"token_hash": ..., "p": ...}
    static ReplayClassifier fromFile(const std::filesystem::path& path);
    ReplayClassifier(std::map<std::string, double> byNoteId, std::map<std::string, double> byHash);

    double predict(const Note& note) const override;
    std::string id() const override { return "replay"; }

  private:
    std::map<std::string, double> byNoteId_;
    std::map<std::string, double> byHash_;
};

// FNV-1a 64 over the tokens joined with 0x1f, as a fixed-width hex string.
std::string tokenSequenceHash(const std::vector<Token>& tokens);

}  // namespace sensaudit::wire
