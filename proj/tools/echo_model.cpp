// Toy model server speaking the sensaudit/1 line protocol on stdio or a
// single TCP connection. Useful as a wire-protocol peer for tests and for
// trying the --external / --context-provider flags without a real model.
//
//   echo_model --constant 0.42          fixed probability
//   echo_model --hash                   probability derived from the tokens
//   echo_model --shuffle 8              buffer 8 requests, reply in reverse
//   echo_model --replacements a,b,c     context-provider replies
//   echo_model --listen 7777            serve one TCP connection, then exit

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct Options {
    double constant = 0.5;
    bool useHash = false;
    int shuffle = 0;
    std::vector<std::string> replacements;
    int listenPort = 0;
};

std::string handle(const json& request, const Options& opt) {
    json reply;
    reply["id"] = request.at("id");
    if (request.contains("mask_index")) {
        const int k = request.value("k", 5);
        json arr = json::array();
        for (std::size_t i = 0; i < opt.replacements.size() && static_cast<int>(i) < k; ++i) {
            arr.push_back(opt.replacements[i]);
        }
        reply["replacements"] = arr;
        return reply.dump();
    }
    double p = opt.constant;
    if (opt.useHash) {
        std::string joined;
        for (const auto& t : request.at("tokens")) {
            joined += t.get<std::string>();
            joined += '\x1f';
        }
        p = static_cast<double>(fnv1a(joined) % 10000) / 10000.0;
    }
    reply["p"] = p;
    return reply.dump();
}

void serve(std::istream& in, std::ostream& out, const Options& opt) {
    out << json{{"proto", "sensaudit/1"}}.dump() << "\n" << std::flush;
    std::string line;
    if (!std::getline(in, line)) return;  // peer handshake
    std::vector<std::string> pendingReplies;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json request = json::parse(line);
        pendingReplies.push_back(handle(request, opt));
        if (opt.shuffle > 0 && static_cast<int>(pendingReplies.size()) < opt.shuffle) continue;
        for (auto it = pendingReplies.rbegin(); it != pendingReplies.rend(); ++it) {
            out << *it << "\n";
        }
        out << std::flush;
        pendingReplies.clear();
    }
    for (auto it = pendingReplies.rbegin(); it != pendingReplies.rend(); ++it) out << *it << "\n";
    out << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> std::string {
            if (i + 1 >= argc) {
                std::cerr << arg << " needs a value\n";
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--constant") {
            opt.constant = std::stod(next());
        } else if (arg == "--hash") {
            opt.useHash = true;
        } else if (arg == "--shuffle") {
            opt.shuffle = std::stoi(next());
        } else if (arg == "--replacements") {
            std::istringstream is(next());
            std::string part;
            while (std::getline(is, part, ',')) opt.replacements.push_back(part);
        } else if (arg == "--listen") {
            opt.listenPort = std::stoi(next());
        } else {
            std::cerr << "unknown flag " << arg << "\n";
            return 2;
        }
    }

    if (opt.listenPort == 0) {
        serve(std::cin, std::cout, opt);
        return 0;
    }

    const int server = ::socket(AF_INET, SOCK_STREAM, 0);
    if (server < 0) {
        std::perror("socket");
        return 1;
    }
    int one = 1;
    ::setsockopt(server, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(opt.listenPort));
    if (::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(server, 1) != 0) {
        std::perror("bind/listen");
        return 1;
    }
    const int client = ::accept(server, nullptr, nullptr);
    if (client < 0) {
        std::perror("accept");
        return 1;
    }
    // Wrap the socket in stdio streams via dup'ed fds.
    FILE* rf = ::fdopen(client, "r");
    FILE* wf = ::fdopen(::dup(client), "w");
    std::string line;
    {
        std::ostringstream buffered;
        // Reuse serve() over string streams is awkward with sockets; do a
        // minimal inline loop instead.
        std::string hello = json{{"proto", "sensaudit/1"}}.dump() + "\n";
        ::fwrite(hello.data(), 1, hello.size(), wf);
        ::fflush(wf);
    }
    char buf[65536];
    std::string carry;
    bool sawHandshake = false;
    std::vector<std::string> pendingReplies;
    while (::fgets(buf, sizeof(buf), rf) != nullptr) {
        carry = buf;
        while (!carry.empty() && (carry.back() == '\n' || carry.back() == '\r')) carry.pop_back();
        if (carry.empty()) continue;
        if (!sawHandshake) {
            sawHandshake = true;
            continue;
        }
        pendingReplies.push_back(handle(json::parse(carry), opt));
        if (opt.shuffle > 0 && static_cast<int>(pendingReplies.size()) < opt.shuffle) continue;
        for (auto it = pendingReplies.rbegin(); it != pendingReplies.rend(); ++it) {
            std::string out = *it + "\n";
            ::fwrite(out.data(), 1, out.size(), wf);
        }
        ::fflush(wf);
        pendingReplies.clear();
    }
    for (auto it = pendingReplies.rbegin(); it != pendingReplies.rend(); ++it) {
        std::string out = *it + "\n";
        ::fwrite(out.data(), 1, out.size(), wf);
    }
    ::fflush(wf);
    ::fclose(rf);
    ::fclose(wf);
    ::close(server);
    return 0;
}
