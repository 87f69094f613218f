#pragma once

// Constant-curvature kinematics of one soft module (limb): joint lengths,
// configuration (theta, phi), task-space points, PMA pressures and the planar IK.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tetrabot/rotations.hpp"

namespace tetrabot {

class ConfigError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class WorkspaceError : public std::domain_error {
    using std::domain_error::domain_error;
};

struct ModuleParams {
    double length = 0.24;          // neutral-axis length L [m]
    double anchor_radius = 0.02;   // centerline-to-PMA distance r [m]
    double pressure_gain = 80.0;   // [bar/m]
    double pressure_offset = 0.5;  // [bar]
    double pressure_min = 0.0;     // [bar]
    double pressure_max = 3.0;     // [bar]

    void validate() const
    {
        if (!(length > 0.0)) throw ConfigError("module length must be > 0");
        if (!(anchor_radius > 0.0)) throw ConfigError("anchor radius must be > 0");
        if (!(pressure_min < pressure_max)) throw ConfigError("pressure_min must be < pressure_max");
    }

    /// Largest tip radius in the limb XY plane reachable on the invertible branch.
    double max_planar_reach() const { return length * 2.0 / kPi; }
};

/// Bending below this angle is treated with the straight-limb series forms.
inline constexpr double kStraightThreshold = 1e-6;

struct ConfigPair {
    double theta = 0.0;  // orientation of the bending plane, [-pi, pi]
    double phi = 0.0;    // bending angle, [0, pi]

    bool straight() const { return phi < kStraightThreshold; }
};

struct JointLengths {
    std::array<double, 3> l{};  // PMA length changes [m], sum is zero

    double sum() const { return l[0] + l[1] + l[2]; }
};

struct PmaPressures {
    std::array<double, 3> p{};  // [bar]
    bool saturated = false;
};

struct LimbPoint {
    double x = 0.0, y = 0.0, z = 0.0;
    double xi = 0.0;

    Vec3 vec() const { return {x, y, z}; }
};

using LimbHtm = Htm;

inline JointLengths joint_from_config(const ConfigPair& cfg, const ModuleParams& params)
{
    const double rphi = params.anchor_radius * cfg.phi;
    JointLengths j;
    j.l[1] = -rphi * std::cos(2.0 * kPi / 3.0 - cfg.theta);
    j.l[2] = -rphi * std::cos(4.0 * kPi / 3.0 - cfg.theta);
    // backbone constraint eliminates the redundant first PMA
    j.l[0] = -(j.l[1] + j.l[2]);
    return j;
}

/// Inverse of joint_from_config. The straight limb maps to (0, 0); theta is
/// meaningless whenever phi == 0.
inline ConfigPair config_from_joint(const JointLengths& j, const ModuleParams& params)
{
    const double l2 = j.l[1];
    const double l3 = j.l[2];
    const double q = (l2 * l2 + l3 * l3 + l2 * l3) / 3.0;
    ConfigPair cfg;
    cfg.phi = 2.0 / params.anchor_radius * std::sqrt(std::max(q, 0.0));
    if (cfg.phi == 0.0) return {};
    cfg.theta = std::atan2(l3 - l2, std::sqrt(3.0) * (l2 + l3));
    return cfg;
}

inline PmaPressures pressure_from_joint(const JointLengths& j, const ModuleParams& params)
{
    PmaPressures out;
    for (std::size_t i = 0; i < 3; ++i) {
        const double raw = params.pressure_gain * j.l[i] + params.pressure_offset;
        const double clamped = std::clamp(raw, params.pressure_min, params.pressure_max);
        if (clamped != raw) out.saturated = true;
        out.p[i] = clamped;
    }
    return out;
}

namespace detail {

// In-plane (radial, axial) position of the arc point at xi, in units of L.
inline Vec2 arc_radial_axial(double phi, double xi)
{
    if (phi < kStraightThreshold) {
        const double a = xi * phi;
        return {0.5 * xi * a, xi * (1.0 - a * a / 6.0)};
    }
    return {one_minus_cos(xi * phi) / phi, std::sin(xi * phi) / phi};
}

}  // namespace detail

inline LimbPoint fk_point(const ConfigPair& cfg, double xi, const ModuleParams& params)
{
    const Vec2 ra = detail::arc_radial_axial(cfg.phi, xi) * params.length;
    return {std::cos(cfg.theta) * ra.x(), std::sin(cfg.theta) * ra.x(), ra.y(), xi};
}

/// Base-to-point transform built by composing the elementary rotations and
/// translations: Rz(theta) Px(L/phi) Ry(xi phi) Px(-L/phi) Rz(-theta).
inline LimbHtm fk_htm(const ConfigPair& cfg, double xi, const ModuleParams& params)
{
    const Htm spin = Htm::rotate(rot_z(cfg.theta));
    const Htm unspin = Htm::rotate(rot_z(-cfg.theta));
    const Htm bend = Htm::rotate(rot_y(xi * cfg.phi));
    if (cfg.phi < kStraightThreshold) {
        // radius of curvature diverges; use the series translation directly
        const Vec2 ra = detail::arc_radial_axial(cfg.phi, xi) * params.length;
        const Htm arc{bend.rotation, Vec3(ra.x(), 0.0, ra.y())};
        return spin * arc * unspin;
    }
    const double radius = params.length / cfg.phi;
    return spin * Htm::translate({radius, 0, 0}) * bend * Htm::translate({-radius, 0, 0}) * unspin;
}

/// Chord-to-arc ratio g(phi) = (1 - cos phi) / phi of a unit-length arc.
inline double planar_reach_ratio(double phi)
{
    if (phi < kStraightThreshold) return 0.5 * phi;
    return one_minus_cos(phi) / phi;
}

/// Solves the planar inverse kinematics: theta analytically, phi by bracketed
/// bisection of g(phi) = |xy| / L on (0, pi/2], where g is strictly increasing.
inline ConfigPair ik_planar(double x, double y, const ModuleParams& params)
{
    constexpr double kTolerance = 1e-12;
    const double radius = std::hypot(x, y);
    if (radius == 0.0) return {};

    const double target = radius / params.length;
    const double g_max = 2.0 / kPi;
    if (target > g_max * (1.0 + 1e-12)) {
        throw WorkspaceError("planar target radius " + std::to_string(radius) +
                             " m exceeds limb reach " + std::to_string(params.max_planar_reach()) + " m");
    }

    double lo = 0.0;
    double hi = kPi / 2.0;
    if (!(planar_reach_ratio(hi) >= std::min(target, g_max) - kTolerance)) {
        throw std::logic_error("ik_planar: root not bracketed");
    }
    double phi = hi;
    if (target < g_max) {
        for (int it = 0; it < 200; ++it) {
            phi = 0.5 * (lo + hi);
            const double residual = planar_reach_ratio(phi) - target;
            if (std::abs(residual) <= kTolerance || hi - lo < 1e-16) break;
            (residual < 0.0 ? lo : hi) = phi;
        }
    }
    return {std::atan2(y, x), phi};
}

}  // namespace tetrabot
