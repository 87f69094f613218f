#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "tetrabot/protocol.hpp"

namespace tetrabot::testing_support {

// Random valid command; doubles span many magnitudes to exercise formatting.
inline CommandMessage random_command(std::mt19937_64& rng, std::uint64_t seq)
{
    std::uniform_int_distribution<int> pick(0, 7), coin(0, 1), limb(0, 3), roll(0, 2), mode(0, 5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0), expo(-12.0, 3.0);
    auto number = [&] { return unit(rng) * std::pow(10.0, expo(rng)); };
    auto orientation = [&]() -> std::optional<OrientationState> {
        if (coin(rng)) return std::nullopt;
        return OrientationState{limb_at(static_cast<std::size_t>(limb(rng))), roll(rng)};
    };
    auto maybe = [&]() -> std::optional<double> {
        if (coin(rng)) return std::nullopt;
        return number();
    };

    CommandMessage m;
    m.kind = kAllCommandKinds[static_cast<std::size_t>(pick(rng))];
    m.seq = seq;
    switch (m.kind) {
    case CommandKind::Joystick:
        m.payload = JoystickPayload{static_cast<AxisUnit>(roll(rng)), number(), number(), coin(rng) == 1};
        break;
    case CommandKind::SetMode:
        m.payload = SetModePayload{static_cast<GaitMode>(mode(rng)), number(), number(), number(), coin(rng) ? 1 : -1};
        break;
    case CommandKind::Remap: m.payload = RemapPayload{orientation()}; break;
    case CommandKind::InjectTopple: m.payload = InjectTopplePayload{orientation()}; break;
    case CommandKind::SetParams: {
        SetParamsPayload p;
        p.deadzone = maybe();
        if (coin(rng)) p.fidelity = coin(rng) ? Fidelity::Smoothed : Fidelity::PaperExact;
        p.bend_intensity = maybe();
        p.k_v = maybe();
        p.k_omega = maybe();
        p.k_inplace = maybe();
        m.payload = p;
        break;
    }
    default: m.payload = EmptyPayload{}; break;
    }
    return m;
}

}  // namespace tetrabot::testing_support
