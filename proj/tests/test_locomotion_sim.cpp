#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tetrabot/locomotion_sim.hpp"

using namespace tetrabot;

namespace {

const Simulator& sim()
{
    static const Simulator s{};
    return s;
}

SimState run(SimState s, const JoystickState& js, int ticks)
{
    for (int i = 0; i < ticks; ++i) s = sim().step(s, js);
    return s;
}

GaitCommand crawl(GaitMode mode, double r3, double r4)
{
    GaitCommand c;
    c.mode = mode;
    c.params = sim().config().base_gait();
    c.params.rho3 = r3;
    c.params.rho4 = r4;
    return c;
}

}  // namespace

TEST(SimConfig, DefaultsAndValidation)
{
    const SimConfig c;
    EXPECT_EQ(c.tau, 100);
    EXPECT_DOUBLE_EQ(c.rho_max, 0.12);
    EXPECT_DOUBLE_EQ(c.tick_hz, 50.0);
    EXPECT_DOUBLE_EQ(c.odometry.k_v, 0.5);
    EXPECT_DOUBLE_EQ(c.odometry.k_omega, 4.0);
    EXPECT_DOUBLE_EQ(c.odometry.k_inplace, 4.0);
    SimConfig bad;
    bad.rho_max = 0.2;
    bad.teleop.rho_max = 0.2;
    EXPECT_THROW(bad.validate(), ConfigError);  // beyond the limb workspace
    bad = {};
    bad.odometry.k_v = -1;
    EXPECT_THROW(Simulator{bad}, ConfigError);
}

TEST(Simulator, FreshState)
{
    const auto s = sim().initial_state();
    EXPECT_EQ(s.tick, 0);
    EXPECT_EQ(s.pose, PlanarPose{});
    EXPECT_EQ(s.mode, GaitMode::Idle);
    EXPECT_TRUE(s.orientation.canonical());
    EXPECT_GT(s.margin, 0.0);
}

TEST(Simulator, IdleKeepsPoseAndStraightLimbs)
{
    const auto s = run(sim().initial_state(), {0.003, -0.004}, 150);
    EXPECT_EQ(s.tick, 150);
    EXPECT_EQ(s.pose, PlanarPose{});
    for (const auto& c : s.limb_configs) EXPECT_EQ(c.phi, 0.0);
    for (const auto& c : s.commands) {
        for (double p : c.pressures.p) EXPECT_DOUBLE_EQ(p, 0.5);
    }
}

TEST(Simulator, StraightInputNeverTurns)
{
    auto s = sim().initial_state();
    for (int i = 0; i < 1000; ++i) {
        s = sim().step(s, {0.0, 0.03 + 0.00009 * i});
        ASSERT_EQ(s.pose.psi, 0.0);
        ASSERT_EQ(s.pose.y, 0.0);
    }
    EXPECT_GT(s.pose.x, 0.0);
}

TEST(Simulator, InPlaceTurnHoldsPositionAndTurnsMonotonically)
{
    for (double sx : {0.08, -0.08}) {
        auto s = sim().initial_state();
        double prev = 0.0;
        double unwrapped = 0.0;
        for (int i = 0; i < 100; ++i) {
            s = sim().step(s, {sx, 0.0});
            const double d = wrap_angle(s.pose.psi - prev);
            prev = s.pose.psi;
            unwrapped += d;
            ASSERT_EQ(d > 0.0, sx < 0.0);  // stick left turns left (psi grows)
            ASSERT_NE(d, 0.0);
        }
        EXPECT_EQ(s.pose.x, 0.0);
        EXPECT_EQ(s.pose.y, 0.0);
        EXPECT_NEAR(std::abs(unwrapped), 4.0 * 0.08 * 2 * kPi, 1e-9);
    }
}

TEST(Simulator, ForwardThenBackwardReturns)
{
    auto s = sim().set_command(sim().initial_state(), crawl(GaitMode::Forward, 0.1, 0.1));
    s = run(s, {}, 137);
    EXPECT_NEAR(s.pose.x, 137 * 0.5 * 0.1 * 2 * kPi / 100, 1e-12);
    s = sim().set_command(s, crawl(GaitMode::Backward, 0.1, 0.1));
    s = run(s, {}, 137);
    EXPECT_NEAR(s.pose.x, 0.0, 1e-9);
}

TEST(Simulator, TurnSignConvention)
{
    auto s = sim().set_command(sim().initial_state(), crawl(GaitMode::TurnWhileMoving, 0.1, 0.04));
    s = run(s, {}, 20);
    EXPECT_LT(s.pose.psi, 0.0);  // rho3 > rho4 turns right
    EXPECT_GT(s.pose.x, 0.0);
    // stick right gives the same sense
    auto t = run(sim().initial_state(), {0.06, 0.05}, 20);
    EXPECT_LT(t.pose.psi, 0.0);
    auto u = run(sim().initial_state(), {-0.06, 0.05}, 20);
    EXPECT_NEAR(u.pose.psi, -t.pose.psi, 1e-15);
}

TEST(Simulator, PoseStepIsBounded)
{
    const double bound = 0.5 * 0.12 * 2 * kPi / 100 + 1e-15;
    auto s = sim().initial_state();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ax(-0.12, 0.12);
    for (int i = 0; i < 2000; ++i) {
        const auto before = s.pose;
        s = sim().step(s, {ax(rng), ax(rng)});
        ASSERT_LE(std::hypot(s.pose.x - before.x, s.pose.y - before.y), bound);
        ASSERT_GT(s.pose.psi, -kPi);
        ASSERT_LE(s.pose.psi, kPi);
    }
}

TEST(Simulator, DeterministicTrajectories)
{
    auto drive = [] {
        auto s = sim().initial_state();
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> ax(-0.12, 0.12);
        for (int i = 0; i < 500; ++i) s = sim().step(s, {ax(rng), ax(rng)});
        return s;
    };
    const auto a = drive();
    const auto b = drive();
    EXPECT_EQ(a.pose, b.pose);
    for (std::size_t l = 0; l < 4; ++l) {
        EXPECT_EQ(a.limb_configs[l].theta, b.limb_configs[l].theta);
        EXPECT_EQ(a.limb_configs[l].phi, b.limb_configs[l].phi);
    }
    EXPECT_EQ(a.margin, b.margin);
}

TEST(Simulator, LimbsStayInWorkspaceAndPressuresInRange)
{
    auto s = sim().initial_state();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ax(-0.12, 0.12);
    for (int i = 0; i < 1000; ++i) {
        s = sim().step(s, {ax(rng), ax(rng)});
        for (std::size_t l = 1; l < 4; ++l) ASSERT_LE(s.limb_configs[l].phi, kPi / 2 + 1e-12);
        for (const auto& c : s.commands) {
            for (double p : c.pressures.p) {
                ASSERT_GE(p, 0.0);
                ASSERT_LE(p, 3.0);
            }
        }
    }
}

TEST(Simulator, BodyBendNeverLowersMarginAtFullSpeed)
{
    SimConfig flat;
    flat.bend_intensity = 0.0;
    const Simulator straight_sim(flat);
    for (GaitMode m : {GaitMode::Forward, GaitMode::Backward}) {
        auto a = sim().set_command(sim().initial_state(), crawl(m, 0.12, 0.12));
        auto b = straight_sim.set_command(straight_sim.initial_state(), crawl(m, 0.12, 0.12));
        for (int i = 0; i < 200; ++i) {
            a = sim().step(a, {});
            b = straight_sim.step(b, {});
            ASSERT_GE(a.margin, b.margin) << "tick " << i;
        }
    }
}

TEST(Topple, CanonicalToCanonicalIsANoOp)
{
    const auto s = run(sim().initial_state(), {0.0, 0.05}, 10);
    const auto t = sim().inject_topple(s, {});
    EXPECT_FALSE(t.frozen);
    EXPECT_EQ(t.pose, s.pose);
    EXPECT_EQ(t.mode, s.mode);
}

TEST(Topple, FreezesUntilRemap)
{
    const OrientationState limb4_on_top{LimbId::Limb4, 0};
    auto s = run(sim().initial_state(), {0.0, 0.05}, 10);
    s = sim().inject_topple(s, limb4_on_top);
    EXPECT_TRUE(s.frozen);
    const auto held = s.pose;
    s = run(s, {0.0, 0.1}, 50);
    EXPECT_EQ(s.pose, held);
    EXPECT_EQ(s.mode, GaitMode::Idle);

    s = sim().remap(s);
    EXPECT_FALSE(s.frozen);
    EXPECT_EQ(s.remap_orientation, limb4_on_top);
    double prev = s.pose.x;
    for (int i = 0; i < 200; ++i) {
        s = sim().step(s, {0.0, 0.05});
        ASSERT_GT(s.pose.x, prev);
        ASSERT_GT(s.margin, 0.0);
        prev = s.pose.x;
    }
    // the physical top limb (Limb4) holds the body posture
    EXPECT_NEAR(s.commands[3].config.phi, 0.5 * kPi / 3, 1e-12);
}

TEST(Topple, CorrectionRestoresCanonical)
{
    for (const auto& st : sim().catalog().states()) {
        auto s = sim().inject_topple(sim().initial_state(), st);
        s = sim().correct_orientation(s);
        int ticks = 0;
        while (!s.maneuvers.empty() && ticks < 10000) {
            const auto pose = s.pose;
            s = sim().step(s, {0.1, 0.1});  // stick ignored during the maneuver
            ASSERT_EQ(s.pose, pose);
            ++ticks;
        }
        EXPECT_TRUE(s.orientation.canonical());
        EXPECT_TRUE(s.remap_orientation.canonical());
        EXPECT_FALSE(s.frozen);
        EXPECT_LE(ticks, 2 * 3 * 100);
    }
}

TEST(Topple, RandomOrientationIsSeeded)
{
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(sim().random_orientation(a), sim().random_orientation(b));
}

TEST(Topple, OperatorReportedOrientation)
{
    auto s = sim().inject_topple(sim().initial_state(), {LimbId::Limb2, 1});
    s = sim().remap(s, OrientationState{LimbId::Limb3, 2});
    EXPECT_EQ(s.orientation, (OrientationState{LimbId::Limb3, 2}));
    EXPECT_EQ(s.remap_orientation, s.orientation);
}
