#pragma once

// Network-free core of the steering service: owns one simulator, applies
// commands and produces one telemetry payload per tick. Single-threaded; the
// service drives it from its simulation thread.

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "tetrabot/protocol.hpp"

namespace tetrabot {

class Session {
public:
    explicit Session(const SessionConfig& config)
        : sim_(config)
        , state_(sim_.initial_state())
        , rng_(config.seed)
    {
    }

    const SessionConfig& config() const { return sim_.config(); }
    const Simulator& simulator() const { return sim_; }
    const SimState& state() const { return state_; }
    const JoystickState& joystick() const { return joystick_; }
    bool paused() const { return paused_; }

    /// Applies one command. Throws ProtocolError for values the simulator rejects.
    void apply(const CommandMessage& m)
    {
        try {
            std::visit([&](const auto& p) { apply_payload(m.kind, p); }, m.payload);
        } catch (const ProtocolError&) {
            throw;
        } catch (const std::exception& e) {
            throw ProtocolError("rejected", e.what(), m.seq);
        }
    }

    /// Advances one tick unless paused; returns the frame payload for the
    /// current state either way.
    std::string tick(bool with_curves = true)
    {
        if (!paused_) state_ = sim_.step(state_, joystick_);
        return serialize(snapshot(sim_, state_, with_curves));
    }

private:
    void apply_payload(CommandKind, const JoystickPayload& p)
    {
        const auto& t = sim_.config().teleop;
        switch (p.unit) {
        case AxisUnit::Sigma: joystick_ = {p.x, p.y, p.pressed}; break;
        case AxisUnit::Unit: joystick_ = joystick_from_unit(p.x, p.y, t); break;
        case AxisUnit::Volts: joystick_ = joystick_from_volts(p.x, p.y, t); break;
        }
        joystick_.pressed = p.pressed;
        state_ = sim_.set_command(state_, std::nullopt);
    }

    void apply_payload(CommandKind, const SetModePayload& p)
    {
        GaitParams g = sim_.config().base_gait();
        g.rho3 = p.rho3;
        g.rho4 = p.rho4;
        g.rho_inplace = p.rho_inplace;
        g.direction_sign = p.direction_sign;
        state_ = sim_.set_command(state_, GaitCommand{p.mode, g});
    }

    void apply_payload(CommandKind, const RemapPayload& p) { state_ = sim_.remap(state_, p.orientation); }

    void apply_payload(CommandKind, const InjectTopplePayload& p)
    {
        const OrientationState target = p.orientation ? *p.orientation : sim_.random_orientation(rng_);
        state_ = sim_.inject_topple(state_, target);
    }

    void apply_payload(CommandKind kind, const EmptyPayload&)
    {
        switch (kind) {
        case CommandKind::CorrectOrientation: state_ = sim_.correct_orientation(state_); break;
        case CommandKind::Pause: paused_ = true; break;
        case CommandKind::Resume: paused_ = false; break;
        default: break;
        }
    }

    void apply_payload(CommandKind, const SetParamsPayload& p)
    {
        SessionConfig c = sim_.config();
        if (p.deadzone) c.teleop.deadzone = *p.deadzone;
        if (p.fidelity) c.teleop.fidelity = *p.fidelity;
        if (p.bend_intensity) c.bend_intensity = *p.bend_intensity;
        if (p.k_v) c.odometry.k_v = *p.k_v;
        if (p.k_omega) c.odometry.k_omega = *p.k_omega;
        if (p.k_inplace) c.odometry.k_inplace = *p.k_inplace;
        sim_ = Simulator(c);  // validates; on failure the old simulator stays
    }

    Simulator sim_;
    SimState state_;
    JoystickState joystick_{};
    bool paused_ = false;
    std::mt19937_64 rng_;
};

}  // namespace tetrabot
