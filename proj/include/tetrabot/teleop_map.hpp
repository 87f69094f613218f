#pragma once

// Joystick -> gait command mapping: axis normalisation, the tanh gate, the
// speed/radii map and deadzone classification into locomotion modes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>

#include "tetrabot/gait_engine.hpp"

namespace tetrabot {

enum class Fidelity { PaperExact, Smoothed };

inline std::string_view to_string(Fidelity f) { return f == Fidelity::PaperExact ? "paper_exact" : "smoothed"; }

inline std::optional<Fidelity> fidelity_from_string(std::string_view s)
{
    if (s == "paper_exact") return Fidelity::PaperExact;
    if (s == "smoothed") return Fidelity::Smoothed;
    return std::nullopt;
}

struct TeleopParams {
    double deadzone = 0.01;  // D_dz, same units as the axes
    double rho_max = 0.12;
    double volt_lo = 1.0;
    double volt_hi = 5.0;
    double gate_sharpness = 1e6;      // PaperExact gate
    double smooth_sharpness = 500.0;  // Smoothed gate
    Fidelity fidelity = Fidelity::PaperExact;

    void validate() const
    {
        if (!(deadzone > 0.0 && deadzone < rho_max)) throw ConfigError("deadzone must lie in (0, rho_max)");
        if (!(volt_lo < volt_hi)) throw ConfigError("volt_lo must be < volt_hi");
        if (!(gate_sharpness > 0.0 && smooth_sharpness > 0.0)) throw ConfigError("gate sharpness must be > 0");
    }
};

struct JoystickState {
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    bool pressed = false;

    friend bool operator==(const JoystickState&, const JoystickState&) = default;
};

/// Affine map of a raw trimpot voltage onto [-rho_max, rho_max], mid-range -> 0.
inline double volts_to_axis(double volts, const TeleopParams& p)
{
    const double v = std::clamp(volts, p.volt_lo, p.volt_hi);
    const double mid = 0.5 * (p.volt_lo + p.volt_hi);
    const double half = 0.5 * (p.volt_hi - p.volt_lo);
    return (v - mid) / half * p.rho_max;
}

/// UI path: a normalised axis in [-1, 1].
inline double unit_to_axis(double u, const TeleopParams& p) { return std::clamp(u, -1.0, 1.0) * p.rho_max; }

inline JoystickState joystick_from_volts(double vx, double vy, const TeleopParams& p)
{
    return {volts_to_axis(vx, p), volts_to_axis(vy, p), false};
}

inline JoystickState joystick_from_unit(double ux, double uy, const TeleopParams& p)
{
    return {unit_to_axis(ux, p), unit_to_axis(uy, p), false};
}

/// Smooth step f(a, b) = (tanh((a + b) k) + 1) / 2.
inline double gate_f(double a, double b, double sharpness = 1e6)
{
    return 0.5 * (std::tanh((a + b) * sharpness) + 1.0);
}

inline double speed_v(const JoystickState& js) { return std::hypot(js.sigma_x, js.sigma_y); }

struct Radii {
    double rho3 = 0.0;
    double rho4 = 0.0;

    friend bool operator==(const Radii&, const Radii&) = default;
};

/// Unclamped radii. PaperExact evaluates the tanh-gated map with both
/// first-term gates centred on +D_dz so the map is left/right symmetric.
inline Radii raw_radii(const JoystickState& js, const TeleopParams& p)
{
    const double sx = js.sigma_x;
    const double v = speed_v(js);
    const double d = p.deadzone;
    if (p.fidelity == Fidelity::PaperExact) {
        const double k = p.gate_sharpness;
        const double rho3 = gate_f(sx, v, k) * (sx + v) * gate_f(-sx, d, k) + (v - d) * gate_f(sx, d, k);
        const double rho4 = gate_f(-sx, v, k) * (-sx + v) * gate_f(sx, d, k) + (v - d) * gate_f(-sx, d, k);
        return {rho3, rho4};
    }
    const double k = p.smooth_sharpness;
    const double ax = std::abs(sx);
    return {v - ax * gate_f(-sx, -d, k), v - ax * gate_f(sx, -d, k)};
}

inline Radii radii(const JoystickState& js, const TeleopParams& p)
{
    const Radii r = raw_radii(js, p);
    return {std::clamp(r.rho3, 0.0, p.rho_max), std::clamp(r.rho4, 0.0, p.rho_max)};
}

struct GaitCommand {
    GaitMode mode = GaitMode::Idle;
    GaitParams params{};

    friend bool operator==(const GaitCommand&, const GaitCommand&) = default;
};

/// Classifies the stick into a locomotion mode. The band |sigma_x| <= D_dz is
/// straight crawling, |sigma_y| <= D_dz is in-place turning, the centre square
/// is idle and everything else turns while moving.
inline GaitCommand classify(const JoystickState& js, const TeleopParams& p, const GaitParams& base = {})
{
    GaitCommand cmd;
    cmd.params = base;
    cmd.params.rho3 = cmd.params.rho4 = cmd.params.rho_inplace = 0.0;
    cmd.params.direction_sign = +1;

    const bool x_dead = std::abs(js.sigma_x) <= p.deadzone;
    const bool y_dead = std::abs(js.sigma_y) <= p.deadzone;
    if (x_dead && y_dead) return cmd;

    if (y_dead) {
        cmd.mode = js.sigma_x > 0.0 ? GaitMode::InPlaceRight : GaitMode::InPlaceLeft;
        cmd.params.rho_inplace = std::clamp(speed_v(js), 0.0, p.rho_max);
        return cmd;
    }

    const Radii r = radii(js, p);
    const int dir = js.sigma_y > 0.0 ? +1 : -1;
    if (x_dead) {
        cmd.mode = dir > 0 ? GaitMode::Forward : GaitMode::Backward;
        cmd.params.rho3 = cmd.params.rho4 = 0.5 * (r.rho3 + r.rho4);
        return cmd;
    }
    cmd.mode = GaitMode::TurnWhileMoving;
    cmd.params.direction_sign = dir;
    cmd.params.rho3 = r.rho3;
    cmd.params.rho4 = r.rho4;
    return cmd;
}

}  // namespace tetrabot
