#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "tetrabot/topple.hpp"

using namespace tetrabot;

namespace {

const OrientationCatalog& cat() { return OrientationCatalog::standard(); }

using L = LimbId;

// Reference topple: physical Limb4 takes the body role, Limb3 becomes Limb4, Limb2 stays.
const LimbPermutation kLimb4OnTop{L::Limb3, L::Limb2, L::Limb4, L::Limb1};

OrientationState limb4_on_top()
{
    const auto st = cat().state_of(kLimb4OnTop);
    if (!st) throw std::logic_error("reference orientation missing");
    return *st;
}

}  // namespace

TEST(Permutation, ComposeInvert)
{
    const LimbPermutation p{L::Limb2, L::Limb3, L::Limb1, L::Limb4};
    EXPECT_EQ(compose(p, invert(p)), kIdentityPermutation);
    EXPECT_EQ(compose(invert(p), p), kIdentityPermutation);
    EXPECT_TRUE(is_bijection(p));
    EXPECT_FALSE(is_bijection({L::Limb1, L::Limb1, L::Limb3, L::Limb4}));
}

TEST(Catalog, TwelveDistinctBijectiveOrientations)
{
    const auto states = cat().states();
    ASSERT_EQ(states.size(), 12u);
    std::set<LimbPermutation> perms;
    for (const auto& st : states) {
        const auto& t = cat().table(st);
        EXPECT_TRUE(is_bijection(t.role_of));
        EXPECT_EQ(t.role_of, cat().permutation(st));
        EXPECT_LE(orthonormality_error(t.frame_rotation), 1e-12);
        EXPECT_NEAR(t.frame_rotation.determinant(), 1.0, 1e-12);
        // the top limb plays the body role
        EXPECT_EQ(t.role_of[index_of(st.top_limb)], L::Limb1);
        perms.insert(t.role_of);
    }
    EXPECT_EQ(perms.size(), 12u);
}

TEST(Catalog, CanonicalIsIdentity)
{
    const auto& t = remap_for({});
    EXPECT_EQ(t.role_of, kIdentityPermutation);
    EXPECT_LE((t.frame_rotation - Mat3::Identity()).norm(), 1e-12);
    for (double a : t.local_rotation) EXPECT_EQ(a, 0.0);
}

TEST(Catalog, Limb4OnTopCase)
{
    const auto st = limb4_on_top();
    EXPECT_EQ(st.top_limb, L::Limb4);
    const auto& t = cat().table(st);
    EXPECT_EQ(t.role_of[0], L::Limb3);
    EXPECT_EQ(t.role_of[1], L::Limb2);
    EXPECT_EQ(t.role_of[2], L::Limb4);
    EXPECT_EQ(t.role_of[3], L::Limb1);
    EXPECT_EQ(t.physical_for(L::Limb1), L::Limb4);
}

// With delta = 1.91 - pi/2 the limb axes are 6.3e-4 rad off a regular
// tetrahedron, so the best-fit rotation matches slots only to about 1e-3.
constexpr double kIrregularity = 2e-3;

TEST(Catalog, FrameRotationCarriesLimbsOntoRoleSlots)
{
    const TetraGeometry g;
    for (const auto& st : cat().states()) {
        const auto& t = cat().table(st);
        for (LimbId p : kAllLimbs) {
            const Vec3 dir = limb_base_rotation(p, g).col(2);
            const Vec3 slot = limb_base_rotation(t.role_of[index_of(p)], g).col(2);
            ASSERT_LE((t.frame_rotation * dir - slot).norm(), kIrregularity);
        }
    }
}

TEST(Catalog, GroupClosure)
{
    const auto states = cat().states();
    for (const auto& a : states) {
        for (const auto& b : states) {
            ASSERT_TRUE(cat().state_of(compose(cat().permutation(a), cat().permutation(b))));
        }
        // cycling a roll three times returns to the start
        OrientationState s = a;
        for (int k = 0; k < 3; ++k) s = cat().apply(s, OrientationCatalog::make_maneuver(L::Limb3, +1, {}));
        EXPECT_EQ(s, a);
    }
}

TEST(Catalog, ToppleAndItsInverseCancel)
{
    for (const auto& st : cat().states()) {
        for (LimbId pivot : kAllLimbs) {
            const auto toppled = cat().topple(st, pivot);
            EXPECT_EQ(cat().apply(toppled, OrientationCatalog::make_maneuver(pivot, +1, {})), st);
        }
    }
    // the reference topple is undone by a right roll about slot 2
    EXPECT_EQ(cat().apply(limb4_on_top(), OrientationCatalog::make_maneuver(L::Limb2, +1, {})), OrientationState{});
}

TEST(Catalog, InvalidRollIndexThrows)
{
    EXPECT_THROW(cat().table({L::Limb1, 3}), std::out_of_range);
}

TEST(Planner, EveryOrientationReachesCanonicalInTwo)
{
    for (const auto& st : cat().states()) {
        const auto plan = correction_maneuver(st, {});
        EXPECT_LE(plan.size(), 2u);
        OrientationState s = st;
        for (const auto& m : plan) s = cat().apply(s, m);
        EXPECT_EQ(s, OrientationState{});
    }
    EXPECT_TRUE(correction_maneuver({}, {}).empty());
}

TEST(Planner, AllPairsConnected)
{
    for (const auto& a : cat().states()) {
        for (const auto& b : cat().states()) {
            OrientationState s = a;
            for (const auto& m : cat().plan(a, b)) s = cat().apply(s, m);
            ASSERT_EQ(s, b);
        }
    }
}

TEST(Planner, LeftToppleIsCorrectedByARightTurn)
{
    const auto toppled = cat().topple({}, L::Limb2);
    const auto plan = correction_maneuver(toppled, {});
    ASSERT_EQ(plan.size(), 1u);
    EXPECT_EQ(plan[0].direction, +1);
    EXPECT_EQ(plan[0].mode, GaitMode::InPlaceRight);
}

TEST(Maneuver, SingleLimbSweepForLowerPivots)
{
    const auto m = OrientationCatalog::make_maneuver(L::Limb2, -1, {0.05, 4});
    EXPECT_EQ(m.mode, GaitMode::InPlaceLeft);
    EXPECT_EQ(m.active_mask, 1u << 2);
    EXPECT_EQ(m.cycles, 4);
    EXPECT_DOUBLE_EQ(m.rho, 0.05);
    EXPECT_EQ(OrientationCatalog::make_maneuver(L::Limb4, 1, {}).active_mask, 1u << 1);
    EXPECT_EQ(OrientationCatalog::make_maneuver(L::Limb1, 1, {}).active_mask, kLowerLimbsMask);
}

TEST(ApplyRemap, IdentityLeavesTargetsAlone)
{
    GaitParams p;
    p.rho3 = p.rho4 = 0.1;
    const auto t = gait_targets(GaitMode::Forward, p, 0.4);
    EXPECT_EQ(apply_remap(remap_for({}), t), t);
}

TEST(ApplyRemap, Limb4OnTopRoutesBodyPostureAndPreservesRadii)
{
    const auto& table = remap_for(limb4_on_top());
    GaitParams p;
    p.rho3 = 0.1;
    p.rho4 = 0.06;
    for (int k = 0; k < 100; ++k) {
        const auto role = gait_targets(GaitMode::Forward, p, 2 * kPi * k / 100);
        const auto phys = apply_remap(table, role);
        // physical Limb4 now plays the body role and holds still
        ASSERT_EQ(phys[3], PlanarTarget{});
        // physical Limb1 runs role Limb3's circle, physical Limb3 runs role Limb4's
        ASSERT_NEAR(std::hypot(phys[0].x, phys[0].y), 0.1, 1e-15);
        ASSERT_NEAR(std::hypot(phys[2].x, phys[2].y), 0.06, 1e-15);
    }
    RobotConfig roles{};
    roles[0] = {0.3, 0.5};
    const auto cfg = apply_remap(table, roles);
    EXPECT_DOUBLE_EQ(cfg[3].phi, 0.5);
}

TEST(ApplyRemap, CompiledPressuresStayInRange)
{
    const TetraGeometry g;
    GaitParams p;
    p.rho3 = p.rho4 = p.rho_inplace = 0.12;
    for (const auto& st : cat().states()) {
        const auto& table = cat().table(st);
        for (GaitMode m : {GaitMode::Forward, GaitMode::Backward, GaitMode::InPlaceLeft}) {
            for (int k = 0; k < 100; k += 7) {
                const auto targets = apply_remap(table, gait_targets(m, p, 2 * kPi * k / 100));
                for (const auto& t : targets) {
                    const auto cmd = compile_limb(ik_planar(t.x, t.y, g.module), g.module);
                    for (double v : cmd.pressures.p) {
                        ASSERT_GE(v, 0.0);
                        ASSERT_LE(v, 3.0);
                    }
                }
            }
        }
    }
}

TEST(ApplyRemap, LocalRotationMapsRoleFrameIntoPhysicalFrame)
{
    // A role target expressed in the role slot's frame must land on the same
    // direction after re-anchoring when expressed in the physical limb's frame.
    const TetraGeometry g;
    for (const auto& st : cat().states()) {
        const auto& t = cat().table(st);
        for (LimbId p : kAllLimbs) {
            const LimbId role = t.role_of[index_of(p)];
            const Mat3 m = limb_base_rotation(role, g).transpose() * t.frame_rotation * limb_base_rotation(p, g);
            // m is a rotation about the shared limb axis
            ASSERT_NEAR(m(2, 2), 1.0, kIrregularity * kIrregularity);
            const double a = t.local_rotation[index_of(p)];
            const Vec3 role_dir(1.0, 0.0, 0.0);
            const Vec3 phys_dir(std::cos(a), std::sin(a), 0.0);
            ASSERT_LE((m * phys_dir - role_dir).norm(), kIrregularity);
        }
    }
}
