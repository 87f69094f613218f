#pragma once

// WebSocket steering service. One simulation thread owns the Session; one I/O
// thread owns every connection. They exchange messages only (a locked inbound
// command queue and posted outbound payloads), so a slow client can lose
// frames but never stalls the tick.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "tetrabot/config.hpp"
#include "tetrabot/telemetry.hpp"

namespace tetrabot::service {

struct ServerOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8765;  // 0 picks a free port
    std::size_t outbox_limit = 64;  // telemetry frames queued per client before drop-oldest
    bool with_curves = true;
    std::optional<std::string> record_path;
};

struct ServerStats {
    std::int64_t ticks = 0;
    std::uint64_t frames_dropped = 0;
    std::size_t clients = 0;
};

class TelemetryServer {
public:
    TelemetryServer(SessionConfig config, ServerOptions options);
    ~TelemetryServer();
    TelemetryServer(const TelemetryServer&) = delete;
    TelemetryServer& operator=(const TelemetryServer&) = delete;

    /// Binds and starts the live simulation loop. Returns the bound port.
    unsigned short start_live();

    /// Binds and re-broadcasts a recorded log once the first client connects
    /// (or immediately when `start_now`). Throws LogError on a hash mismatch.
    unsigned short start_replay(const std::string& log_path, const ReplayOptions& replay, bool start_now = false);

    /// Blocks until stop() is called or a replay has finished.
    void wait();
    void stop();

    ServerStats stats() const;
    std::optional<ReplayResult> replay_result() const;

    struct Impl;  // public so the connection type in server.cpp can name it

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace tetrabot::service
