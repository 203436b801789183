#include "inject_sim/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "inject_sim/errors.hpp"
#include "inject_sim/experiment.hpp"

namespace inject {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxLine = 1 << 20;

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

std::string error_response(const std::string& msg) { return dump(json{{"ok", false}, {"error", msg}}); }

json info_json(const StepInfo& info) {
    json j;
    j["t"] = info.t;
    j["decision_index"] = info.decision_index;
    j["y_e"] = info.y_e;
    j["Q_c"] = info.q_c;
    j["Q_bar_m3hr"] = info.q_bar_m3hr;
    j["R"] = info.R;
    j["gains"] = {{"k1", info.gains.k1}, {"k2", info.gains.k2}, {"l", info.gains.l}};
    j["constraint_residual"] = info.constraint_residual_m3hr;
    j["clamped"] = info.clamped;
    j["action_applied"] = info.applied_action;
    if (info.blowup) j["blowup"] = *info.blowup;
    return j;
}

}  // namespace

ProtocolSession::ProtocolSession(const SimulationConfig& cfg, std::optional<std::filesystem::path> record_dir)
    : cfg_(cfg), env_(cfg, episode_from_env(cfg)), record_dir_(std::move(record_dir)) {
    env_.set_recording(record_dir_.has_value());
}

void ProtocolSession::record_episode() {
    std::filesystem::create_directories(*record_dir_);
    // first unused number, so restarts and reconnects never overwrite
    int k = 1;
    while (std::filesystem::exists(*record_dir_ / fmt::format("episode_{:04d}", k))) ++k;
    const auto dir = *record_dir_ / fmt::format("episode_{:04d}", k);
    std::filesystem::create_directories(dir);
    write_trace_csv(dir / "trace.csv", env_.trace());
    write_actions_csv(dir / "actions.csv", env_.actions());
    write_metrics_json(dir / "metrics.json", env_.summary());
    ++recorded_;
}

std::string ProtocolSession::handle_line(std::string_view line) {
    if (closed_) return error_response("session closed");
    json req;
    try {
        req = json::parse(line.begin(), line.end());
    } catch (const std::exception& e) {
        return error_response(std::string("malformed JSON: ") + e.what());
    }
    if (!req.is_object()) return error_response("request must be a JSON object");
    auto cmd_it = req.find("cmd");
    if (cmd_it == req.end() || !cmd_it->is_string()) return error_response("missing \"cmd\"");
    const std::string cmd = cmd_it->get<std::string>();

    try {
        if (cmd == "hello") {
            json spaces = {{"obs_dim", env_.obs_dim()},
                           {"action_dim", kActionDim},
                           {"action_low", {0, 0, 0}},
                           {"action_high", {1, 1, 1}}};
            return dump(json{{"ok", true}, {"spaces", spaces}});
        }
        if (cmd == "reset") {
            std::uint64_t seed = cfg_.seed;
            if (auto s = req.find("seed"); s != req.end() && !s->is_null()) {
                if (!s->is_number_integer() || (s->is_number_integer() && !s->is_number_unsigned() &&
                                                s->get<std::int64_t>() < 0)) {
                    return error_response("seed must be a non-negative integer");
                }
                seed = s->get<std::uint64_t>();
            }
            if (env_.active() && env_.decision_index() > 0 && !env_.done()) {
                spdlog::info("reset abandons episode {} after {} decisions", episode_, env_.decision_index());
            }
            ++episode_;
            return dump(json{{"ok", true}, {"obs", env_.reset(seed)}});
        }
        if (cmd == "step") {
            if (!env_.active()) return error_response("not reset");
            if (env_.done()) return error_response("episode is done; reset first");
            auto a = req.find("action");
            if (a == req.end() || !a->is_array() || a->size() != kActionDim) {
                return error_response("step requires \"action\": [a1, a2, a3]");
            }
            std::vector<double> action;
            for (const auto& v : *a) {
                if (!v.is_number()) return error_response("action components must be numbers");
                action.push_back(v.get<double>());
            }
            const StepResult r = env_.step(action);
            if (r.done && record_dir_) record_episode();
            return dump(json{{"ok", true}, {"obs", r.obs}, {"reward", r.reward}, {"done", r.done},
                             {"info", info_json(r.info)}});
        }
        if (cmd == "close") {
            closed_ = true;
            return dump(json{{"ok", true}});
        }
        return error_response("unknown cmd '" + cmd + "'");
    } catch (const std::exception& e) {
        return error_response(e.what());
    }
}

void serve_stream(ProtocolSession& session, std::istream& in, std::ostream& out) {
    std::string line;
    while (!session.closed() && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out << session.handle_line(line) << '\n';
        out.flush();
    }
}

namespace {

class Fd {
public:
    explicit Fd(int fd) : fd_(fd) {}
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    int get() const { return fd_; }

private:
    int fd_;
};

bool send_all(int fd, const std::string& s) {
    std::size_t off = 0;
    while (off < s.size()) {
        const ssize_t n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

// Returns true when the session asked to close.
bool serve_connection(int fd, ProtocolSession& session) {
    std::string buf;
    bool discarding = false;
    char chunk[4096];
    while (true) {
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        buf.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buf.find('\n')) != std::string::npos) {
            std::string line = buf.substr(0, pos);
            buf.erase(0, pos + 1);
            if (discarding) {
                discarding = false;
                continue;
            }
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!send_all(fd, session.handle_line(line) + "\n")) return false;
            if (session.closed()) return true;
        }
        if (buf.size() > kMaxLine && !discarding) {
            buf.clear();
            discarding = true;
            if (!send_all(fd, error_response("request line too long") + "\n")) return false;
        } else if (discarding) {
            buf.clear();
        }
    }
}

}  // namespace

void serve_tcp(const SimulationConfig& cfg, int port, const std::optional<std::filesystem::path>& record_dir,
               std::ostream& announce) {
    if (port < 0 || port > 65535) throw ConfigError(fmt::format("invalid TCP port {}", port));
    Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
    if (listener.get() < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        throw std::runtime_error(fmt::format("bind to port {}: {}", port, std::strerror(errno)));
    }
    if (::listen(listener.get(), 1) != 0) throw std::runtime_error(std::string("listen: ") + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    announce << "listening on 127.0.0.1:" << ntohs(addr.sin_port) << std::endl;

    while (true) {
        const int c = ::accept(listener.get(), nullptr, nullptr);
        if (c < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("accept: ") + std::strerror(errno));
        }
        Fd conn(c);
        ProtocolSession session(cfg, record_dir);
        spdlog::info("client connected");
        if (serve_connection(conn.get(), session)) return;
        spdlog::info("client disconnected");
    }
}

}  // namespace inject
