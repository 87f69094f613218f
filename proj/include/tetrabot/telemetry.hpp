#pragma once

// Telemetry frames and the newline-delimited session log (header line followed
// by one JSON frame per line).

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tetrabot/config.hpp"
#include "tetrabot/locomotion_sim.hpp"

namespace tetrabot {

struct LimbTelemetry {
    double theta = 0.0;
    double phi = 0.0;
    std::array<double, 3> lengths{};
    std::array<double, 3> pressures{};
    bool saturated = false;

    friend bool operator==(const LimbTelemetry&, const LimbTelemetry&) = default;
};

using CurvePoints = std::vector<std::array<double, 3>>;

struct TelemetryFrame {
    std::int64_t tick = 0;
    PlanarPose pose{};
    GaitMode mode = GaitMode::Idle;
    double rho3 = 0.0;
    double rho4 = 0.0;
    double rho_inplace = 0.0;
    std::array<LimbTelemetry, 4> limbs{};
    double margin = 0.0;
    OrientationState orientation{};
    OrientationState roles{};
    bool frozen = false;
    bool correcting = false;
    std::optional<std::array<CurvePoints, 4>> curves;  // robot frame

    friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

inline constexpr std::size_t kTelemetryCurvePoints = 16;

inline TelemetryFrame snapshot(const Simulator& sim, const SimState& s, bool with_curves = true)
{
    TelemetryFrame f;
    f.tick = s.tick;
    f.pose = s.pose;
    f.mode = s.mode;
    f.rho3 = s.gait.rho3;
    f.rho4 = s.gait.rho4;
    f.rho_inplace = s.gait.rho_inplace;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& c = s.commands[i];
        f.limbs[i] = {c.config.theta, c.config.phi, c.joints.l, c.pressures.p, c.pressures.saturated};
    }
    f.margin = s.margin;
    f.orientation = s.orientation;
    f.roles = s.remap_orientation;
    f.frozen = s.frozen;
    f.correcting = !s.maneuvers.empty();
    if (with_curves) {
        std::array<CurvePoints, 4> curves;
        for (LimbId limb : kAllLimbs) {
            for (const auto& p : sample_limb_curve(limb, s.limb_configs[index_of(limb)], kTelemetryCurvePoints,
                                                   sim.config().geometry)) {
                curves[index_of(limb)].push_back({p.x, p.y, p.z});
            }
        }
        f.curves = std::move(curves);
    }
    return f;
}

inline nlohmann::json orientation_json(const OrientationState& o)
{
    return {{"top_limb", limb_number(o.top_limb)}, {"roll_index", o.roll_index}};
}

inline OrientationState orientation_from_json(const nlohmann::json& j)
{
    const int top = j.at("top_limb").get<int>();
    const int roll = j.at("roll_index").get<int>();
    if (top < 1 || top > 4) throw std::out_of_range("top_limb must be 1..4");
    if (roll < 0 || roll > 2) throw std::out_of_range("roll_index must be 0..2");
    return {limb_at(static_cast<std::size_t>(top - 1)), roll};
}

inline nlohmann::json to_json(const TelemetryFrame& f)
{
    nlohmann::json limbs = nlohmann::json::array();
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& l = f.limbs[i];
        limbs.push_back({{"limb", static_cast<int>(i) + 1},
                         {"theta", l.theta},
                         {"phi", l.phi},
                         {"lengths", l.lengths},
                         {"pressures", l.pressures},
                         {"saturated", l.saturated}});
    }
    nlohmann::json j = {
        {"tick", f.tick},
        {"pose", {{"x", f.pose.x}, {"y", f.pose.y}, {"psi", f.pose.psi}}},
        {"mode", std::string(to_string(f.mode))},
        {"rho3", f.rho3},
        {"rho4", f.rho4},
        {"rho_inplace", f.rho_inplace},
        {"limbs", limbs},
        {"margin", f.margin},
        {"orientation", orientation_json(f.orientation)},
        {"roles", orientation_json(f.roles)},
        {"frozen", f.frozen},
        {"correcting", f.correcting},
    };
    if (f.curves) j["curves"] = *f.curves;
    return j;
}

inline TelemetryFrame frame_from_json(const nlohmann::json& j)
{
    TelemetryFrame f;
    f.tick = j.at("tick").get<std::int64_t>();
    const auto& pose = j.at("pose");
    f.pose = {pose.at("x").get<double>(), pose.at("y").get<double>(), pose.at("psi").get<double>()};
    const auto mode = gait_mode_from_string(j.at("mode").get<std::string>());
    if (!mode) throw std::invalid_argument("unknown gait mode in frame");
    f.mode = *mode;
    f.rho3 = j.at("rho3").get<double>();
    f.rho4 = j.at("rho4").get<double>();
    f.rho_inplace = j.at("rho_inplace").get<double>();
    const auto& limbs = j.at("limbs");
    if (limbs.size() != 4) throw std::invalid_argument("frame must carry four limbs");
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& l = limbs.at(i);
        f.limbs[i] = {l.at("theta").get<double>(), l.at("phi").get<double>(),
                      l.at("lengths").get<std::array<double, 3>>(), l.at("pressures").get<std::array<double, 3>>(),
                      l.at("saturated").get<bool>()};
    }
    f.margin = j.at("margin").get<double>();
    f.orientation = orientation_from_json(j.at("orientation"));
    f.roles = orientation_from_json(j.at("roles"));
    f.frozen = j.at("frozen").get<bool>();
    f.correcting = j.at("correcting").get<bool>();
    if (auto c = j.find("curves"); c != j.end()) f.curves = c->get<std::array<CurvePoints, 4>>();
    return f;
}

inline std::string serialize(const TelemetryFrame& f) { return to_json(f).dump(); }

// ---------------------------------------------------------------------------
// Session log

inline constexpr const char* kLogFormat = "tetrabot-telemetry";
inline constexpr int kLogVersion = 1;

struct LogHeader {
    std::string config_hash;
    double tick_hz = 50.0;
};

class TelemetryRecorder {
public:
    TelemetryRecorder(std::ostream& out, const SessionConfig& config)
        : out_(out)
    {
        const nlohmann::json header = {{"type", "header"},
                                       {"format", kLogFormat},
                                       {"version", kLogVersion},
                                       {"config_hash", config_hash(config)},
                                       {"tick_hz", config.tick_hz}};
        out_ << header.dump() << '\n';
    }

    void record(const std::string& frame_payload) { out_ << frame_payload << '\n'; }
    void record(const TelemetryFrame& f) { record(serialize(f)); }
    void flush() { out_.flush(); }

private:
    std::ostream& out_;
};

class LogError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline LogHeader read_log_header(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw LogError("empty telemetry log");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        throw LogError("telemetry log header is not valid JSON");
    }
    if (j.value("format", "") != kLogFormat || j.value("version", 0) != kLogVersion) {
        throw LogError("not a tetrabot telemetry log (v1)");
    }
    return {j.at("config_hash").get<std::string>(), j.at("tick_hz").get<double>()};
}

struct ReplayResult {
    std::size_t frames = 0;
    bool truncated = false;
    std::string diagnostic;
};

struct ReplayOptions {
    double speed_factor = 1.0;
    bool force = false;
    bool realtime = true;
};

/// Re-emits every frame of a log at tick_hz * speed_factor. Each payload is
/// parsed and re-serialised, so a faithful log replays byte-identically. A
/// malformed or cut-off line stops the replay with a diagnostic.
inline ReplayResult replay_log(std::istream& in, const SessionConfig& config, const ReplayOptions& opt,
                               const std::function<void(const std::string&)>& emit)
{
    const LogHeader header = read_log_header(in);
    if (!opt.force && header.config_hash != config_hash(config)) {
        throw LogError("log config hash " + header.config_hash + " does not match " + config_hash(config) +
                       " (use --force to replay anyway)");
    }
    if (!(opt.speed_factor > 0.0)) throw LogError("speed factor must be > 0");

    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / (header.tick_hz * opt.speed_factor)));
    auto next = clock::now();

    ReplayResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string payload;
        try {
            payload = serialize(frame_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            result.truncated = true;
            result.diagnostic = "stopped at frame " + std::to_string(result.frames + 1) + ": " + e.what();
            break;
        }
        if (opt.realtime) {
            std::this_thread::sleep_until(next);
            next += period;
        }
        emit(payload);
        ++result.frames;
    }
    return result;
}

}  // namespace tetrabot
