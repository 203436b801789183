#pragma once

/**
 * @file protocol.hpp
 * @brief Newline-delimited JSON protocol for driving an Environment from an
 *        external agent, over stdio or a TCP socket.
 *
 * Requests: {"cmd":"hello"|"reset"|"step"|"close", "seed"?: int,
 * "action"?: [a1,a2,a3]}. Every request line gets exactly one response
 * line with "ok"; failures carry "error" and leave the session usable.
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "inject_sim/environment.hpp"

namespace inject {

class ProtocolSession {
public:
    /// With record_dir set, each finished episode is written to
    /// record_dir/episode_NNNN/{trace.csv,metrics.json,actions.csv}, NNNN
    /// being the first unused number.
    explicit ProtocolSession(const SimulationConfig& cfg, std::optional<std::filesystem::path> record_dir = {});

    /// One request in, one response out (without the trailing newline).
    std::string handle_line(std::string_view line);

    bool closed() const { return closed_; }
    int episodes_recorded() const { return recorded_; }

private:
    void record_episode();

    SimulationConfig cfg_;
    Environment env_;
    std::optional<std::filesystem::path> record_dir_;
    bool closed_ = false;
    int episode_ = 0;
    int recorded_ = 0;
};

/// Serve until "close" or end of input.
void serve_stream(ProtocolSession& session, std::istream& in, std::ostream& out);

/// Listen on 127.0.0.1:port (0 picks a free port), print the bound port as
/// "listening on 127.0.0.1:<port>" to announce, then serve one connection
/// at a time with a fresh session each. Returns after a "close" request.
void serve_tcp(const SimulationConfig& cfg, int port, const std::optional<std::filesystem::path>& record_dir,
               std::ostream& announce);

}  // namespace inject
