#pragma once

// Cyclic limb trajectories for every locomotion mode and their compilation to
// per-tick limb configurations, PMA length changes and pressures.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "tetrabot/limb_kinematics.hpp"
#include "tetrabot/tetra_frames.hpp"

namespace tetrabot {

enum class GaitMode { Idle, Forward, Backward, TurnWhileMoving, InPlaceLeft, InPlaceRight };

inline std::string_view to_string(GaitMode m)
{
    switch (m) {
    case GaitMode::Idle: return "idle";
    case GaitMode::Forward: return "forward";
    case GaitMode::Backward: return "backward";
    case GaitMode::TurnWhileMoving: return "turn_while_moving";
    case GaitMode::InPlaceLeft: return "in_place_left";
    case GaitMode::InPlaceRight: return "in_place_right";
    }
    return "idle";
}

inline std::optional<GaitMode> gait_mode_from_string(std::string_view s)
{
    for (GaitMode m : {GaitMode::Idle, GaitMode::Forward, GaitMode::Backward, GaitMode::TurnWhileMoving,
                       GaitMode::InPlaceLeft, GaitMode::InPlaceRight}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

inline std::ostream& operator<<(std::ostream& os, GaitMode m) { return os << to_string(m); }

inline bool is_in_place(GaitMode m) { return m == GaitMode::InPlaceLeft || m == GaitMode::InPlaceRight; }

/// Bit mask over limbs taking part in an in-place rotation (bit i = Limb i+1).
inline constexpr std::uint8_t kLowerLimbsMask = 0b1110;

struct GaitParams {
    double rho3 = 0.0;
    double rho4 = 0.0;
    double rho_inplace = 0.0;
    double beta3 = 0.0;
    double beta4 = kPi;
    int tau = 100;            // ticks per cycle
    int direction_sign = +1;  // crawling family for TurnWhileMoving: +1 forward, -1 backward
    double rho_max = 0.12;
    std::uint8_t inplace_mask = kLowerLimbsMask;

    void validate() const
    {
        if (tau <= 0) throw ConfigError("tau must be > 0");
        if (!(rho_max > 0.0)) throw ConfigError("rho_max must be > 0");
        for (double r : {rho3, rho4, rho_inplace}) {
            if (!(r >= 0.0 && r <= rho_max)) throw ConfigError("gait radius outside [0, rho_max]");
        }
        if (direction_sign != 1 && direction_sign != -1) throw ConfigError("direction_sign must be +1 or -1");
    }

    friend bool operator==(const GaitParams&, const GaitParams&) = default;
};

struct GaitClock {
    std::int64_t t = 0;  // ticks since start, monotone
    int tau = 100;

    std::int64_t tick_in_cycle() const
    {
        const std::int64_t m = t % tau;
        return m < 0 ? m + tau : m;
    }
    double phase() const { return 2.0 * kPi * static_cast<double>(tick_in_cycle()) / static_cast<double>(tau); }
    void advance(std::int64_t ticks = 1) { t += ticks; }
};

/// Tip target in the limb's own XY plane [m].
struct PlanarTarget {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PlanarTarget&, const PlanarTarget&) = default;
};

using LimbTargets = std::array<PlanarTarget, 4>;

/// Fundamental circular tip trajectory, counter-clockwise for sign = +1.
inline PlanarTarget limb_circle(double rho, double beta, double phase, int sign)
{
    const double a = phase + beta;
    return {static_cast<double>(sign) * (-rho) * std::cos(a), rho * std::sin(a)};
}

inline LimbTargets gait_targets(GaitMode mode, const GaitParams& params, double phase)
{
    LimbTargets out{};
    auto& l3 = out[index_of(LimbId::Limb3)];
    auto& l4 = out[index_of(LimbId::Limb4)];

    const bool backward =
        mode == GaitMode::Backward || (mode == GaitMode::TurnWhileMoving && params.direction_sign < 0);
    switch (mode) {
    case GaitMode::Idle: break;
    case GaitMode::Forward:
    case GaitMode::Backward:
    case GaitMode::TurnWhileMoving:
        if (backward) {
            // +rho and the phase offsets advanced by pi
            l3 = limb_circle(params.rho3, params.beta3 + kPi, phase, -1);
            l4 = limb_circle(params.rho4, params.beta4 - kPi, phase, -1);
        } else {
            l3 = limb_circle(params.rho3, params.beta3, phase, +1);
            l4 = limb_circle(params.rho4, params.beta4, phase, +1);
        }
        break;
    case GaitMode::InPlaceLeft:
    case GaitMode::InPlaceRight: {
        const int sign = mode == GaitMode::InPlaceLeft ? +1 : -1;
        const PlanarTarget t = limb_circle(params.rho_inplace, kPi, phase, sign);
        for (LimbId limb : {LimbId::Limb2, LimbId::Limb3, LimbId::Limb4}) {
            if (params.inplace_mask & (1u << index_of(limb))) out[index_of(limb)] = t;
        }
        break;
    }
    }
    return out;
}

inline LimbTargets gait_targets(GaitMode mode, const GaitParams& params, const GaitClock& clock)
{
    return gait_targets(mode, params, clock.phase());
}

inline bool is_crawling(GaitMode m)
{
    return m == GaitMode::Forward || m == GaitMode::Backward || m == GaitMode::TurnWhileMoving;
}

/// Body-limb posture used to shift the CoG while crawling. Without an explicit
/// heading the limb bends toward the centre of the support polygon.
struct BodyBend {
    double intensity = 0.0;      // [0, 1]
    double phi_max = kPi / 3.0;  // bend at full intensity
    std::optional<double> heading;
};

inline ConfigPair body_limb_bend(double heading, double intensity, double phi_max = kPi / 3.0)
{
    const double phi = std::clamp(intensity, 0.0, 1.0) * phi_max;
    return {phi > 0.0 ? wrap_angle(heading) : 0.0, phi};
}

struct LimbCommand {
    ConfigPair config{};
    JointLengths joints{};
    PmaPressures pressures{};
};

using TickCommands = std::array<LimbCommand, 4>;

inline LimbCommand compile_limb(const ConfigPair& cfg, const ModuleParams& module)
{
    LimbCommand cmd;
    cmd.config = cfg;
    cmd.joints = joint_from_config(cfg, module);
    cmd.pressures = pressure_from_joint(cmd.joints, module);
    return cmd;
}

/// Configurations for one tick: IK of the gait targets for the lower limbs and
/// the CoG-shift posture for Limb1 while crawling. Everything else is straight.
inline RobotConfig gait_configs(GaitMode mode, const GaitParams& params, const GaitClock& clock,
                                const TetraGeometry& geom, const BodyBend& bend = {})
{
    const LimbTargets targets = gait_targets(mode, params, clock);
    RobotConfig cfg{};
    for (LimbId limb : {LimbId::Limb2, LimbId::Limb3, LimbId::Limb4}) {
        const auto& t = targets[index_of(limb)];
        cfg[index_of(limb)] = ik_planar(t.x, t.y, geom.module);
    }
    if (is_crawling(mode) && bend.intensity > 0.0) {
        const double heading = bend.heading.value_or(
            support_center_heading(cfg, Htm::identity(), LimbId::Limb1, kDefaultContacts, geom));
        cfg[index_of(LimbId::Limb1)] = body_limb_bend(heading, bend.intensity, bend.phi_max);
    }
    return cfg;
}

inline TickCommands compile_configs(const RobotConfig& cfg, const ModuleParams& module)
{
    TickCommands out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = compile_limb(cfg[i], module);
    return out;
}

inline TickCommands compile_tick(GaitMode mode, const GaitParams& params, const GaitClock& clock,
                                 const TetraGeometry& geom, const BodyBend& bend = {})
{
    return compile_configs(gait_configs(mode, params, clock, geom, bend), geom.module);
}

/// CSV pressure schedule: one row per actuator per tick over a full cycle.
inline void write_schedule_csv(std::ostream& os, GaitMode mode, const GaitParams& params,
                               const TetraGeometry& geom, const BodyBend& bend = {})
{
    auto num = [](double v) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v + 0.0);  // no "-0"
        return std::string(buf, res.ptr);
    };
    os << "tick,limb,pma_index,length_m,pressure_bar\n";
    GaitClock clock{0, params.tau};
    for (int tick = 0; tick < params.tau; ++tick, clock.advance()) {
        const TickCommands cmds = compile_tick(mode, params, clock, geom, bend);
        for (LimbId limb : kAllLimbs) {
            const auto& c = cmds[index_of(limb)];
            for (std::size_t i = 0; i < 3; ++i) {
                os << tick << ',' << limb_number(limb) << ',' << (i + 1) << ',' << num(c.joints.l[i]) << ','
                   << num(c.pressures.p[i]) << '\n';
            }
        }
    }
}

}  // namespace tetrabot
