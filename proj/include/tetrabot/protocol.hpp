#pragma once

// Wire protocol: one JSON object per WebSocket text message.
//
// Client -> server:  {"kind": "...", "seq": <uint>, "payload": {...}}
// Server -> client:  {"type": "hello" | "telemetry" | "ack" | "error" | "role", ...}

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "tetrabot/telemetry.hpp"

namespace tetrabot {

enum class CommandKind { Joystick, SetMode, Remap, CorrectOrientation, InjectTopple, Pause, Resume, SetParams };

inline constexpr std::array<CommandKind, 8> kAllCommandKinds{
    CommandKind::Joystick,     CommandKind::SetMode, CommandKind::Remap,  CommandKind::CorrectOrientation,
    CommandKind::InjectTopple, CommandKind::Pause,   CommandKind::Resume, CommandKind::SetParams};

constexpr std::string_view to_string(CommandKind k)
{
    switch (k) {
    case CommandKind::Joystick: return "joystick";
    case CommandKind::SetMode: return "set_mode";
    case CommandKind::Remap: return "remap";
    case CommandKind::CorrectOrientation: return "correct_orientation";
    case CommandKind::InjectTopple: return "inject_topple";
    case CommandKind::Pause: return "pause";
    case CommandKind::Resume: return "resume";
    case CommandKind::SetParams: return "set_params";
    }
    return "?";
}

inline std::optional<CommandKind> command_kind_from_string(std::string_view s)
{
    for (CommandKind k : kAllCommandKinds) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

/// Joystick axes in one of three units: already-normalised sigma [m],
/// unit stick deflection [-1, 1], or raw console volts.
enum class AxisUnit { Sigma, Unit, Volts };

struct JoystickPayload {
    AxisUnit unit = AxisUnit::Sigma;
    double x = 0.0;
    double y = 0.0;
    bool pressed = false;

    friend bool operator==(const JoystickPayload&, const JoystickPayload&) = default;
};

/// Explicit gait override. Cleared by the next joystick message.
struct SetModePayload {
    GaitMode mode = GaitMode::Idle;
    double rho3 = 0.0;
    double rho4 = 0.0;
    double rho_inplace = 0.0;
    int direction_sign = +1;

    friend bool operator==(const SetModePayload&, const SetModePayload&) = default;
};

/// Remap to the simulator's orientation, or to an operator-reported one.
struct RemapPayload {
    std::optional<OrientationState> orientation;
    friend bool operator==(const RemapPayload&, const RemapPayload&) = default;
};

/// Topple to a given orientation, or to a seeded random one.
struct InjectTopplePayload {
    std::optional<OrientationState> orientation;
    friend bool operator==(const InjectTopplePayload&, const InjectTopplePayload&) = default;
};

struct EmptyPayload {
    friend bool operator==(const EmptyPayload&, const EmptyPayload&) = default;
};

/// Runtime-tunable subset of the session config; absent fields are unchanged.
struct SetParamsPayload {
    std::optional<double> deadzone;
    std::optional<Fidelity> fidelity;
    std::optional<double> bend_intensity;
    std::optional<double> k_v;
    std::optional<double> k_omega;
    std::optional<double> k_inplace;

    friend bool operator==(const SetParamsPayload&, const SetParamsPayload&) = default;
};

using CommandPayload =
    std::variant<JoystickPayload, SetModePayload, RemapPayload, EmptyPayload, InjectTopplePayload, SetParamsPayload>;

struct CommandMessage {
    CommandKind kind = CommandKind::Joystick;
    std::uint64_t seq = 0;
    CommandPayload payload = JoystickPayload{};

    friend bool operator==(const CommandMessage&, const CommandMessage&) = default;
};

enum class SessionAction { RequestDriver, ReleaseDriver };

struct SessionMessage {
    SessionAction action = SessionAction::RequestDriver;
    std::uint64_t seq = 0;
    friend bool operator==(const SessionMessage&, const SessionMessage&) = default;
};

using ClientMessage = std::variant<CommandMessage, SessionMessage>;

/// Rejected client message. `seq` is echoed when it could be read.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(std::string code, const std::string& message, std::optional<std::uint64_t> seq = std::nullopt)
        : std::runtime_error(message)
        , code_(std::move(code))
        , seq_(seq)
    {
    }
    const std::string& code() const { return code_; }
    std::optional<std::uint64_t> seq() const { return seq_; }

private:
    std::string code_;
    std::optional<std::uint64_t> seq_;
};

namespace detail {

constexpr std::string_view to_string(AxisUnit u)
{
    switch (u) {
    case AxisUnit::Sigma: return "sigma";
    case AxisUnit::Unit: return "unit";
    case AxisUnit::Volts: return "volts";
    }
    return "?";
}

inline AxisUnit axis_unit_from_string(const std::string& s)
{
    for (AxisUnit u : {AxisUnit::Sigma, AxisUnit::Unit, AxisUnit::Volts}) {
        if (to_string(u) == s) return u;
    }
    throw std::invalid_argument("unknown joystick unit '" + s + "'");
}

inline CommandPayload default_payload(CommandKind k)
{
    switch (k) {
    case CommandKind::Joystick: return JoystickPayload{};
    case CommandKind::SetMode: return SetModePayload{};
    case CommandKind::Remap: return RemapPayload{};
    case CommandKind::InjectTopple: return InjectTopplePayload{};
    case CommandKind::SetParams: return SetParamsPayload{};
    case CommandKind::CorrectOrientation:
    case CommandKind::Pause:
    case CommandKind::Resume: return EmptyPayload{};
    }
    return EmptyPayload{};
}

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v)
{
    if (v) j[key] = *v;
}

template <typename T>
void get_optional(const nlohmann::json& j, const char* key, std::optional<T>& out)
{
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->template get<T>();
}

inline double finite(const nlohmann::json& j, const char* key)
{
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(key) + " must be finite");
    return v;
}

struct PayloadWriter {
    nlohmann::json operator()(const JoystickPayload& p) const
    {
        return {{"unit", std::string(to_string(p.unit))}, {"x", p.x}, {"y", p.y}, {"pressed", p.pressed}};
    }
    nlohmann::json operator()(const SetModePayload& p) const
    {
        return {{"mode", std::string(tetrabot::to_string(p.mode))},
                {"rho3", p.rho3},
                {"rho4", p.rho4},
                {"rho_inplace", p.rho_inplace},
                {"direction_sign", p.direction_sign}};
    }
    nlohmann::json operator()(const RemapPayload& p) const
    {
        nlohmann::json j = nlohmann::json::object();
        if (p.orientation) j["orientation"] = orientation_json(*p.orientation);
        return j;
    }
    nlohmann::json operator()(const InjectTopplePayload& p) const
    {
        nlohmann::json j = nlohmann::json::object();
        if (p.orientation) j["orientation"] = orientation_json(*p.orientation);
        return j;
    }
    nlohmann::json operator()(const EmptyPayload&) const { return nlohmann::json::object(); }
    nlohmann::json operator()(const SetParamsPayload& p) const
    {
        nlohmann::json j = nlohmann::json::object();
        put_optional(j, "deadzone", p.deadzone);
        if (p.fidelity) j["fidelity"] = std::string(tetrabot::to_string(*p.fidelity));
        put_optional(j, "bend_intensity", p.bend_intensity);
        put_optional(j, "k_v", p.k_v);
        put_optional(j, "k_omega", p.k_omega);
        put_optional(j, "k_inplace", p.k_inplace);
        return j;
    }
};

inline CommandPayload read_payload(CommandKind kind, const nlohmann::json& j)
{
    if (!j.is_object()) throw std::invalid_argument("payload must be an object");
    switch (kind) {
    case CommandKind::Joystick: {
        JoystickPayload p;
        p.unit = axis_unit_from_string(j.value("unit", std::string("sigma")));
        p.x = finite(j, "x");
        p.y = finite(j, "y");
        p.pressed = j.value("pressed", false);
        return p;
    }
    case CommandKind::SetMode: {
        SetModePayload p;
        const auto mode = gait_mode_from_string(j.at("mode").get<std::string>());
        if (!mode) throw std::invalid_argument("unknown gait mode");
        p.mode = *mode;
        if (j.contains("rho3")) p.rho3 = finite(j, "rho3");
        if (j.contains("rho4")) p.rho4 = finite(j, "rho4");
        if (j.contains("rho_inplace")) p.rho_inplace = finite(j, "rho_inplace");
        p.direction_sign = j.value("direction_sign", +1);
        if (p.direction_sign != 1 && p.direction_sign != -1) throw std::invalid_argument("direction_sign must be +1 or -1");
        return p;
    }
    case CommandKind::Remap: {
        RemapPayload p;
        if (auto it = j.find("orientation"); it != j.end() && !it->is_null()) p.orientation = orientation_from_json(*it);
        return p;
    }
    case CommandKind::InjectTopple: {
        InjectTopplePayload p;
        if (auto it = j.find("orientation"); it != j.end() && !it->is_null()) p.orientation = orientation_from_json(*it);
        return p;
    }
    case CommandKind::SetParams: {
        SetParamsPayload p;
        get_optional(j, "deadzone", p.deadzone);
        if (auto it = j.find("fidelity"); it != j.end() && !it->is_null()) {
            p.fidelity = fidelity_from_string(it->get<std::string>());
            if (!p.fidelity) throw std::invalid_argument("unknown fidelity");
        }
        get_optional(j, "bend_intensity", p.bend_intensity);
        get_optional(j, "k_v", p.k_v);
        get_optional(j, "k_omega", p.k_omega);
        get_optional(j, "k_inplace", p.k_inplace);
        return p;
    }
    case CommandKind::CorrectOrientation:
    case CommandKind::Pause:
    case CommandKind::Resume: return EmptyPayload{};
    }
    return EmptyPayload{};
}

}  // namespace detail

inline nlohmann::json to_json(const CommandMessage& m)
{
    return {{"kind", std::string(to_string(m.kind))},
            {"seq", m.seq},
            {"payload", std::visit(detail::PayloadWriter{}, m.payload)}};
}

inline std::string serialize(const CommandMessage& m) { return to_json(m).dump(); }

inline std::string serialize(const SessionMessage& m)
{
    return nlohmann::json{
        {"kind", m.action == SessionAction::RequestDriver ? "request_driver" : "release_driver"},
        {"seq", m.seq}}
        .dump();
}

inline ClientMessage parse_client_message(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
        throw ProtocolError("malformed", "message is not valid JSON");
    }
    if (!j.is_object()) throw ProtocolError("malformed", "message must be a JSON object");

    std::optional<std::uint64_t> seq;
    if (auto it = j.find("seq"); it != j.end() && it->is_number_unsigned()) seq = it->get<std::uint64_t>();
    if (!seq) throw ProtocolError("malformed", "missing or invalid seq");

    const auto kind_it = j.find("kind");
    if (kind_it == j.end() || !kind_it->is_string()) throw ProtocolError("malformed", "missing kind", seq);
    const std::string kind = kind_it->get<std::string>();
    if (kind == "request_driver") return SessionMessage{SessionAction::RequestDriver, *seq};
    if (kind == "release_driver") return SessionMessage{SessionAction::ReleaseDriver, *seq};

    const auto ck = command_kind_from_string(kind);
    if (!ck) throw ProtocolError("unknown_kind", "unknown message kind '" + kind + "'", seq);
    CommandMessage m;
    m.kind = *ck;
    m.seq = *seq;
    try {
        const auto p = j.find("payload");
        m.payload = (p == j.end() || p->is_null()) ? detail::read_payload(*ck, nlohmann::json::object())
                                                   : detail::read_payload(*ck, *p);
    } catch (const ProtocolError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProtocolError("bad_payload", std::string("invalid ") + kind + " payload: " + e.what(), seq);
    }
    return m;
}

inline CommandMessage parse_command(std::string_view text)
{
    auto msg = parse_client_message(text);
    if (auto* c = std::get_if<CommandMessage>(&msg)) return *c;
    throw ProtocolError("unexpected_kind", "expected a command message", std::get<SessionMessage>(msg).seq);
}

/// Per-connection sequence check: every seq must exceed the previous one.
class SeqTracker {
public:
    bool accept(std::uint64_t seq)
    {
        if (last_ && seq <= *last_) return false;
        last_ = seq;
        return true;
    }

private:
    std::optional<std::uint64_t> last_;
};

// ---------------------------------------------------------------------------
// Server messages

enum class ClientRole { Driver, Viewer };

constexpr std::string_view to_string(ClientRole r) { return r == ClientRole::Driver ? "driver" : "viewer"; }

inline constexpr int kProtocolVersion = 1;

inline std::string hello_message(const SessionConfig& config, ClientRole role, bool replay = false)
{
    return nlohmann::json{{"type", "hello"},
                          {"protocol", kProtocolVersion},
                          {"role", std::string(to_string(role))},
                          {"config_hash", config_hash(config)},
                          {"tick_hz", config.tick_hz},
                          {"tau", config.tau},
                          {"rho_max", config.rho_max},
                          {"deadzone", config.teleop.deadzone},
                          {"replay", replay}}
        .dump();
}

inline std::string role_message(ClientRole role)
{
    return nlohmann::json{{"type", "role"}, {"role", std::string(to_string(role))}}.dump();
}

inline std::string ack_message(std::uint64_t seq) { return nlohmann::json{{"type", "ack"}, {"seq", seq}}.dump(); }

inline std::string error_message(const std::string& code, const std::string& message, std::optional<std::uint64_t> seq)
{
    nlohmann::json j{{"type", "error"}, {"code", code}, {"message", message}};
    j["seq"] = seq ? nlohmann::json(*seq) : nlohmann::json(nullptr);
    return j.dump();
}

/// Frames travel as {"type":"telemetry","frame":<payload>} where <payload> is
/// exactly the log line for that tick.
inline std::string telemetry_message(const std::string& frame_payload)
{
    std::string out;
    out.reserve(frame_payload.size() + 32);
    out += R"({"type":"telemetry","frame":)";
    out += frame_payload;
    out += '}';
    return out;
}

}  // namespace tetrabot
