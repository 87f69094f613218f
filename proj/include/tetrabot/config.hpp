#pragma once

// Session configuration file (JSON). Every key is optional; missing keys keep
// their defaults, unknown keys are rejected.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tetrabot/locomotion_sim.hpp"

namespace tetrabot {

using SessionConfig = SimConfig;

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) throw ConfigError("unknown config key '" + where + item.key() + "'");
    }
}

}  // namespace detail

inline nlohmann::json to_json(const SessionConfig& c)
{
    const auto& m = c.geometry.module;
    return {
        {"tick_hz", c.tick_hz},
        {"tau", c.tau},
        {"rho_max", c.rho_max},
        {"seed", c.seed},
        {"teleop",
         {{"deadzone", c.teleop.deadzone},
          {"fidelity", std::string(to_string(c.teleop.fidelity))},
          {"volt_lo", c.teleop.volt_lo},
          {"volt_hi", c.teleop.volt_hi},
          {"gate_sharpness", c.teleop.gate_sharpness},
          {"smooth_sharpness", c.teleop.smooth_sharpness}}},
        {"odometry", {{"k_v", c.odometry.k_v}, {"k_omega", c.odometry.k_omega}, {"k_inplace", c.odometry.k_inplace}}},
        {"geometry",
         {{"delta", c.geometry.delta},
          {"limb_mass", c.geometry.limb_mass},
          {"hub_mass", c.geometry.hub_mass},
          {"length", m.length},
          {"anchor_radius", m.anchor_radius},
          {"pressure_gain", m.pressure_gain},
          {"pressure_offset", m.pressure_offset},
          {"pressure_min", m.pressure_min},
          {"pressure_max", m.pressure_max}}},
        {"body_bend", {{"intensity", c.bend_intensity}, {"phi_max", c.bend_phi_max}}},
        {"correction", {{"rho", c.correction.rho}, {"cycles", c.correction.cycles}}},
    };
}

inline SessionConfig config_from_json(const nlohmann::json& j)
{
    using detail::read_key;
    using detail::reject_unknown;
    SessionConfig c;
    try {
        reject_unknown(j, {"tick_hz", "tau", "rho_max", "seed", "teleop", "odometry", "geometry", "body_bend", "correction"},
                       "");
        read_key(j, "tick_hz", c.tick_hz);
        read_key(j, "tau", c.tau);
        read_key(j, "rho_max", c.rho_max);
        read_key(j, "seed", c.seed);
        if (auto t = j.find("teleop"); t != j.end()) {
            reject_unknown(*t, {"deadzone", "fidelity", "volt_lo", "volt_hi", "gate_sharpness", "smooth_sharpness"},
                           "teleop.");
            read_key(*t, "deadzone", c.teleop.deadzone);
            read_key(*t, "volt_lo", c.teleop.volt_lo);
            read_key(*t, "volt_hi", c.teleop.volt_hi);
            read_key(*t, "gate_sharpness", c.teleop.gate_sharpness);
            read_key(*t, "smooth_sharpness", c.teleop.smooth_sharpness);
            if (auto f = t->find("fidelity"); f != t->end()) {
                const auto parsed = fidelity_from_string(f->get<std::string>());
                if (!parsed) throw ConfigError("teleop.fidelity must be 'paper_exact' or 'smoothed'");
                c.teleop.fidelity = *parsed;
            }
        }
        if (auto o = j.find("odometry"); o != j.end()) {
            reject_unknown(*o, {"k_v", "k_omega", "k_inplace"}, "odometry.");
            read_key(*o, "k_v", c.odometry.k_v);
            read_key(*o, "k_omega", c.odometry.k_omega);
            read_key(*o, "k_inplace", c.odometry.k_inplace);
        }
        if (auto g = j.find("geometry"); g != j.end()) {
            reject_unknown(*g, {"delta", "limb_mass", "hub_mass", "length", "anchor_radius", "pressure_gain",
                                "pressure_offset", "pressure_min", "pressure_max"},
                           "geometry.");
            auto& m = c.geometry.module;
            read_key(*g, "delta", c.geometry.delta);
            read_key(*g, "limb_mass", c.geometry.limb_mass);
            read_key(*g, "hub_mass", c.geometry.hub_mass);
            read_key(*g, "length", m.length);
            read_key(*g, "anchor_radius", m.anchor_radius);
            read_key(*g, "pressure_gain", m.pressure_gain);
            read_key(*g, "pressure_offset", m.pressure_offset);
            read_key(*g, "pressure_min", m.pressure_min);
            read_key(*g, "pressure_max", m.pressure_max);
        }
        if (auto b = j.find("body_bend"); b != j.end()) {
            reject_unknown(*b, {"intensity", "phi_max"}, "body_bend.");
            read_key(*b, "intensity", c.bend_intensity);
            read_key(*b, "phi_max", c.bend_phi_max);
        }
        if (auto r = j.find("correction"); r != j.end()) {
            reject_unknown(*r, {"rho", "cycles"}, "correction.");
            read_key(*r, "rho", c.correction.rho);
            read_key(*r, "cycles", c.correction.cycles);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.teleop.rho_max = c.rho_max;
    c.validate();
    return c;
}

inline SessionConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

/// Stable 64-bit FNV-1a digest of the canonical JSON form, as 16 hex digits.
inline std::string config_hash(const SessionConfig& c)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tetrabot
