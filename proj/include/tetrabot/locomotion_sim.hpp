#pragma once

// Deterministic fixed-tick quasi-static simulator. Each tick classifies the
// joystick, advances the gait clock, compiles limb commands through the active
// limb remap and integrates a planar odometry estimate of the body pose.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "tetrabot/gait_engine.hpp"
#include "tetrabot/teleop_map.hpp"
#include "tetrabot/tetra_frames.hpp"
#include "tetrabot/topple.hpp"

namespace tetrabot {

/// Declared odometry heuristic; there is no contact model behind it.
struct OdometryParams {
    double k_v = 0.5;        // advance per metre of mean radius per radian of phase
    double k_omega = 4.0;    // yaw per metre of radius differential per radian of phase
    double k_inplace = 4.0;  // yaw per metre of in-place radius per radian of phase

    void validate() const
    {
        if (k_v < 0.0 || k_omega < 0.0 || k_inplace < 0.0) throw ConfigError("odometry gains must be >= 0");
    }
};

struct SimConfig {
    TetraGeometry geometry{};
    TeleopParams teleop{};
    OdometryParams odometry{};
    int tau = 100;
    double rho_max = 0.12;
    double tick_hz = 50.0;
    double bend_intensity = 0.5;  // body-limb CoG shift while crawling
    double bend_phi_max = kPi / 3.0;
    ManeuverOptions correction{};
    std::uint64_t seed = 1;

    void validate() const
    {
        geometry.validate();
        teleop.validate();
        odometry.validate();
        if (tau <= 0) throw ConfigError("tau must be > 0");
        if (!(rho_max > 0.0)) throw ConfigError("rho_max must be > 0");
        if (rho_max > geometry.module.max_planar_reach()) throw ConfigError("rho_max exceeds the limb workspace");
        if (!(tick_hz > 0.0)) throw ConfigError("tick_hz must be > 0");
        if (bend_intensity < 0.0 || bend_intensity > 1.0) throw ConfigError("bend_intensity must lie in [0, 1]");
        if (correction.cycles <= 0) throw ConfigError("correction cycles must be > 0");
        if (correction.rho < 0.0 || correction.rho > rho_max) throw ConfigError("correction rho outside [0, rho_max]");
        if (teleop.rho_max != rho_max) throw ConfigError("teleop rho_max must equal rho_max");
    }

    GaitParams base_gait() const
    {
        GaitParams g;
        g.tau = tau;
        g.rho_max = rho_max;
        return g;
    }
};

struct PlanarPose {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;  // heading, (-pi, pi]

    friend bool operator==(const PlanarPose&, const PlanarPose&) = default;
};

struct SimState {
    std::int64_t tick = 0;
    PlanarPose pose{};
    OrientationState orientation{};        // physical attitude
    OrientationState remap_orientation{};  // orientation the active role mapping was built for
    bool frozen = false;                   // set by a topple until remap/correct
    GaitClock clock{};
    GaitMode mode = GaitMode::Idle;
    GaitParams gait{};
    std::optional<GaitCommand> override_command;  // set_mode; cleared by joystick input
    RobotConfig limb_configs{};                   // physical limbs
    TickCommands commands{};
    double margin = 0.0;
    std::deque<Maneuver> maneuvers;
    std::int64_t maneuver_ticks = 0;  // elapsed ticks in the front maneuver
};

class Simulator {
public:
    explicit Simulator(SimConfig config = {})
        : config_((config.validate(), config))
        , catalog_(config_.geometry)
    {
    }

    const SimConfig& config() const { return config_; }
    const OrientationCatalog& catalog() const { return catalog_; }

    SimState initial_state() const
    {
        SimState s;
        s.clock = GaitClock{0, config_.tau};
        s.gait = config_.base_gait();
        s.commands = compile_configs(s.limb_configs, config_.geometry.module);
        s.margin = margin_of(s);
        return s;
    }

    SimState step(SimState s, const JoystickState& js) const
    {
        ++s.tick;
        if (!s.maneuvers.empty()) {
            run_maneuver_tick(s);
        } else if (s.frozen) {
            s.mode = GaitMode::Idle;
            s.gait = config_.base_gait();
            s.limb_configs = RobotConfig{};
        } else {
            const GaitCommand cmd = s.override_command ? *s.override_command
                                                       : classify(js, config_.teleop, config_.base_gait());
            s.mode = cmd.mode;
            s.gait = cmd.params;
            s.clock.advance();
            s.limb_configs = physical_configs(cmd.mode, cmd.params, s.clock, s.remap_orientation, s.orientation);
            integrate_pose(s.pose, cmd);
        }
        s.commands = compile_configs(s.limb_configs, config_.geometry.module);
        s.margin = margin_of(s);
        return s;
    }

    /// Replaces the physical orientation; locomotion waits for remap or correction.
    SimState inject_topple(SimState s, const OrientationState& new_orientation) const
    {
        if (new_orientation == s.orientation) return s;
        s.orientation = new_orientation;
        s.frozen = true;
        s.maneuvers.clear();
        s.maneuver_ticks = 0;
        s.override_command.reset();
        s.limb_configs = RobotConfig{};
        s.mode = GaitMode::Idle;
        s.commands = compile_configs(s.limb_configs, config_.geometry.module);
        s.margin = margin_of(s);
        return s;
    }

    OrientationState random_orientation(std::mt19937_64& rng) const
    {
        const auto states = catalog_.states();
        std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
        return states[pick(rng)];
    }

    /// Adopts limb roles for the current (or operator-reported) orientation.
    SimState remap(SimState s, std::optional<OrientationState> observed = std::nullopt) const
    {
        if (observed) s.orientation = *observed;
        s.remap_orientation = s.orientation;
        s.frozen = false;
        return s;
    }

    /// Schedules the maneuvers that roll the robot back to the canonical orientation.
    SimState correct_orientation(SimState s) const
    {
        s.override_command.reset();
        const auto plan = catalog_.plan(s.orientation, OrientationState{}, config_.correction);
        s.maneuvers.assign(plan.begin(), plan.end());
        s.maneuver_ticks = 0;
        if (s.maneuvers.empty()) {
            s.remap_orientation = s.orientation;
            s.frozen = false;
        }
        return s;
    }

    SimState set_command(SimState s, std::optional<GaitCommand> cmd) const
    {
        if (cmd) cmd->params.validate();
        s.override_command = cmd;
        return s;
    }

    Htm world_from_robot(const SimState& s) const
    {
        return Htm::rotate(rot_z(s.pose.psi) * catalog_.table(s.orientation).frame_rotation);
    }

    double margin_of(const SimState& s) const
    {
        return stability_margin(s.limb_configs, world_from_robot(s), config_.geometry, contacts_for(s.orientation));
    }

    /// Physical limb configurations for a role-space gait command.
    RobotConfig physical_configs(GaitMode mode, const GaitParams& params, const GaitClock& clock,
                                 const OrientationState& roles, const OrientationState& attitude) const
    {
        const RemapTable& table = catalog_.table(roles);
        const LimbTargets targets = apply_remap(table, gait_targets(mode, params, clock));
        RobotConfig out{};
        LimbId body = LimbId::Limb1;
        for (std::size_t p = 0; p < 4; ++p) {
            if (table.role_of[p] == LimbId::Limb1) {
                body = limb_at(p);
                continue;
            }
            out[p] = ik_planar(targets[p].x, targets[p].y, config_.geometry.module);
        }
        if (is_crawling(mode) && config_.bend_intensity > 0.0) {
            const auto contacts = contacts_for(attitude);
            const double heading = support_center_heading(
                out, Htm::rotate(catalog_.table(attitude).frame_rotation), body, contacts, config_.geometry);
            out[index_of(body)] = body_limb_bend(heading, config_.bend_intensity, config_.bend_phi_max);
        }
        return out;
    }

    /// Physical limbs touching the ground: every limb not on top.
    std::vector<LimbId> contacts_for(const OrientationState& attitude) const
    {
        std::vector<LimbId> contacts;
        const auto& table = catalog_.table(attitude);
        for (LimbId p : kAllLimbs) {
            if (table.role_of[index_of(p)] != LimbId::Limb1) contacts.push_back(p);
        }
        return contacts;
    }

    void integrate_pose(PlanarPose& pose, const GaitCommand& cmd) const
    {
        const auto& o = config_.odometry;
        const double dphase = 2.0 * kPi / static_cast<double>(cmd.params.tau);
        double ds = 0.0;
        double dpsi = 0.0;
        switch (cmd.mode) {
        case GaitMode::Idle: return;
        case GaitMode::Forward:
        case GaitMode::Backward:
        case GaitMode::TurnWhileMoving: {
            const bool backward = cmd.mode == GaitMode::Backward ||
                                  (cmd.mode == GaitMode::TurnWhileMoving && cmd.params.direction_sign < 0);
            ds = o.k_v * 0.5 * (cmd.params.rho3 + cmd.params.rho4) * dphase;
            if (backward) ds = -ds;
            dpsi = -o.k_omega * (cmd.params.rho3 - cmd.params.rho4) * dphase;
            break;
        }
        case GaitMode::InPlaceLeft: dpsi = o.k_inplace * cmd.params.rho_inplace * dphase; break;
        case GaitMode::InPlaceRight: dpsi = -o.k_inplace * cmd.params.rho_inplace * dphase; break;
        }
        if (ds != 0.0) {
            pose.x += ds * std::cos(pose.psi);
            pose.y += ds * std::sin(pose.psi);
        }
        pose.psi = wrap_angle(pose.psi + dpsi);
    }

private:
    void run_maneuver_tick(SimState& s) const
    {
        const Maneuver& m = s.maneuvers.front();
        GaitParams params = config_.base_gait();
        params.rho_inplace = m.rho;
        params.inplace_mask = m.active_mask;
        s.mode = m.mode;
        s.gait = params;
        s.clock.advance();
        s.limb_configs = physical_configs(m.mode, params, s.clock, s.orientation, s.orientation);
        if (++s.maneuver_ticks >= static_cast<std::int64_t>(m.cycles) * config_.tau) {
            s.orientation = catalog_.apply(s.orientation, m);
            s.maneuvers.pop_front();
            s.maneuver_ticks = 0;
            if (s.maneuvers.empty()) {
                s.remap_orientation = s.orientation;
                s.frozen = false;
            }
        }
    }

    SimConfig config_;
    OrientationCatalog catalog_;
};

}  // namespace tetrabot
