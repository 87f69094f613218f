#pragma once

// Topological stability: the 12 rotational orientations of the tetrahedron,
// limb-role remapping after a topple and the orientation-correction planner.
//
// An orientation is a permutation `role_of[physical limb] = role slot` drawn
// from the rotation group of the tetrahedron. Role slots are the four limb
// directions of the canonical robot frame; Limb1's slot points up.

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

#include "tetrabot/gait_engine.hpp"
#include "tetrabot/tetra_frames.hpp"

namespace tetrabot {

using LimbPermutation = std::array<LimbId, 4>;

inline constexpr LimbPermutation kIdentityPermutation = kAllLimbs;

inline LimbPermutation compose(const LimbPermutation& outer, const LimbPermutation& inner)
{
    LimbPermutation out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = outer[index_of(inner[i])];
    return out;
}

inline LimbPermutation invert(const LimbPermutation& p)
{
    LimbPermutation out{};
    for (std::size_t i = 0; i < 4; ++i) out[index_of(p[i])] = limb_at(i);
    return out;
}

inline bool is_bijection(const LimbPermutation& p)
{
    std::array<bool, 4> seen{};
    for (LimbId id : p) {
        const auto i = index_of(id);
        if (i >= 4 || seen[i]) return false;
        seen[i] = true;
    }
    return true;
}

struct OrientationState {
    LimbId top_limb = LimbId::Limb1;
    int roll_index = 0;  // 0..2, rotation of the lower triad about the top limb

    bool canonical() const { return top_limb == LimbId::Limb1 && roll_index == 0; }
    friend bool operator==(const OrientationState&, const OrientationState&) = default;
    friend auto operator<=>(const OrientationState&, const OrientationState&) = default;
};

struct RemapTable {
    LimbPermutation role_of = kIdentityPermutation;  // physical limb -> role it now plays
    Mat3 frame_rotation = Mat3::Identity();          // old robot frame -> re-anchored robot frame
    std::array<double, 4> local_rotation{};          // per physical limb, in-plane angle [rad]

    LimbId physical_for(LimbId role) const { return invert(role_of)[index_of(role)]; }
};

/// One orientation-correction step: an in-place style rotation executed by a
/// subset of limbs, after which the robot has rolled about the pivot slot.
struct Maneuver {
    LimbId pivot = LimbId::Limb1;  // role slot whose axis the robot rolls about
    int direction = +1;            // +1 right, -1 left
    GaitMode mode = GaitMode::InPlaceRight;
    std::uint8_t active_mask = kLowerLimbsMask;  // role-space limbs running the circle
    double rho = 0.08;
    int cycles = 3;

    friend bool operator==(const Maneuver&, const Maneuver&) = default;
};

struct ManeuverOptions {
    double rho = 0.08;
    int cycles = 3;
};

class OrientationCatalog {
public:
    explicit OrientationCatalog(const TetraGeometry& geom = {})
        : geom_(geom)
    {
        for (LimbId s : kAllLimbs) {
            slot_dir_[index_of(s)] = limb_base_rotation(s, geom) * Vec3::UnitZ();
        }
        // Right rolls about slot 2 must undo the documented topple in which
        // Limb4 comes to the top: slot 1 -> 4, 4 -> 3, 3 -> 1.
        const LimbPermutation want{LimbId::Limb4, LimbId::Limb2, LimbId::Limb1, LimbId::Limb3};
        double sign = -1.0;
        if (slot_permutation(roll_rotation(LimbId::Limb2, sign)) != want) sign = +1.0;
        if (slot_permutation(roll_rotation(LimbId::Limb2, sign)) != want) {
            throw std::logic_error("orientation catalog: cannot orient right roll");
        }
        for (LimbId s : kAllLimbs) {
            right_[index_of(s)] = slot_permutation(roll_rotation(s, sign));
            left_[index_of(s)] = invert(right_[index_of(s)]);
        }

        for (LimbId top : kAllLimbs) {
            LimbPermutation base = kIdentityPermutation;
            if (top != LimbId::Limb1) {
                bool found = false;
                for (LimbId pivot : {LimbId::Limb2, LimbId::Limb3, LimbId::Limb4}) {
                    const auto& g = left_[index_of(pivot)];
                    if (g[index_of(top)] == LimbId::Limb1) {
                        base = g;
                        found = true;
                        break;
                    }
                }
                if (!found) throw std::logic_error("orientation catalog: no topple brings limb to top");
            }
            for (int k = 0; k < 3; ++k) {
                const OrientationState st{top, k};
                perms_[st] = base;
                base = compose(right_[index_of(LimbId::Limb1)], base);
            }
        }
        for (const auto& [st, perm] : perms_) tables_[st] = build_table(perm);
    }

    static const OrientationCatalog& standard()
    {
        static const OrientationCatalog cat{};
        return cat;
    }

    const TetraGeometry& geometry() const { return geom_; }

    std::vector<OrientationState> states() const
    {
        std::vector<OrientationState> out;
        for (const auto& kv : perms_) out.push_back(kv.first);
        return out;
    }

    const LimbPermutation& permutation(const OrientationState& st) const { return perms_.at(validated(st)); }
    const RemapTable& table(const OrientationState& st) const { return tables_.at(validated(st)); }

    std::optional<OrientationState> state_of(const LimbPermutation& perm) const
    {
        for (const auto& [st, p] : perms_) {
            if (p == perm) return st;
        }
        return std::nullopt;
    }

    /// Role-slot permutation applied by a roll about `pivot`.
    const LimbPermutation& roll(LimbId pivot, int direction) const
    {
        return direction > 0 ? right_[index_of(pivot)] : left_[index_of(pivot)];
    }

    OrientationState apply(const OrientationState& st, const Maneuver& m) const
    {
        const auto next = state_of(compose(roll(m.pivot, m.direction), permutation(st)));
        if (!next) throw std::logic_error("roll left the orientation group");
        return *next;
    }

    /// State after a topple that rolls the robot leftwards about `pivot`.
    OrientationState topple(const OrientationState& st, LimbId pivot) const
    {
        return apply(st, make_maneuver(pivot, -1, {}));
    }

    static Maneuver make_maneuver(LimbId pivot, int direction, const ManeuverOptions& opt)
    {
        Maneuver m;
        m.pivot = pivot;
        m.direction = direction;
        m.mode = direction > 0 ? GaitMode::InPlaceRight : GaitMode::InPlaceLeft;
        m.rho = opt.rho;
        m.cycles = opt.cycles;
        if (pivot == LimbId::Limb1) {
            m.active_mask = kLowerLimbsMask;
        } else {
            // the lower limb following the pivot (2 -> 3 -> 4 -> 2) sweeps alone
            const std::size_t active = index_of(pivot) % 3 + 1;
            m.active_mask = static_cast<std::uint8_t>(1u << active);
        }
        return m;
    }

    /// Shortest maneuver sequence from `current` to `target` (breadth-first).
    std::vector<Maneuver> plan(const OrientationState& current, const OrientationState& target,
                               const ManeuverOptions& opt = {}) const
    {
        validated(current);
        validated(target);
        std::map<OrientationState, std::pair<OrientationState, Maneuver>> parent;
        std::deque<OrientationState> queue{current};
        parent.emplace(current, std::pair{current, Maneuver{}});
        while (!queue.empty() && !parent.contains(target)) {
            const OrientationState st = queue.front();
            queue.pop_front();
            for (LimbId pivot : kAllLimbs) {
                for (int dir : {+1, -1}) {
                    const Maneuver m = make_maneuver(pivot, dir, opt);
                    const OrientationState next = apply(st, m);
                    if (parent.emplace(next, std::pair{st, m}).second) queue.push_back(next);
                }
            }
        }
        std::vector<Maneuver> out;
        for (OrientationState st = target; st != current;) {
            const auto& [prev, m] = parent.at(st);
            out.push_back(m);
            st = prev;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    const OrientationState& validated(const OrientationState& st) const
    {
        if (st.roll_index < 0 || st.roll_index > 2) throw std::out_of_range("roll_index must be 0, 1 or 2");
        return st;
    }

    Mat3 roll_rotation(LimbId pivot, double sign) const
    {
        return Eigen::AngleAxisd(sign * 2.0 * kPi / 3.0, slot_dir_[index_of(pivot)]).toRotationMatrix();
    }

    LimbPermutation slot_permutation(const Mat3& r) const
    {
        LimbPermutation out{};
        for (std::size_t s = 0; s < 4; ++s) {
            const Vec3 moved = r * slot_dir_[s];
            std::size_t best = 0;
            for (std::size_t c = 1; c < 4; ++c) {
                if ((moved - slot_dir_[c]).norm() < (moved - slot_dir_[best]).norm()) best = c;
            }
            out[s] = limb_at(best);
        }
        if (!is_bijection(out)) throw std::logic_error("rotation does not permute limb slots");
        return out;
    }

    RemapTable build_table(const LimbPermutation& perm) const
    {
        RemapTable t;
        t.role_of = perm;
        // best-fit rotation carrying each physical direction onto its role slot
        Mat3 h = Mat3::Zero();
        for (std::size_t p = 0; p < 4; ++p) h += slot_dir_[p] * slot_dir_[index_of(perm[p])].transpose();
        Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Mat3 d = Mat3::Identity();
        d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
        t.frame_rotation = svd.matrixV() * d * svd.matrixU().transpose();

        for (std::size_t p = 0; p < 4; ++p) {
            const Mat3 m = limb_base_rotation(perm[p], geom_).transpose() * t.frame_rotation *
                           limb_base_rotation(limb_at(p), geom_);
            t.local_rotation[p] = perm == kIdentityPermutation ? 0.0 : -std::atan2(m(1, 0), m(0, 0));
        }
        return t;
    }

    TetraGeometry geom_;
    std::array<Vec3, 4> slot_dir_{};
    std::array<LimbPermutation, 4> right_{};
    std::array<LimbPermutation, 4> left_{};
    std::map<OrientationState, LimbPermutation> perms_;
    std::map<OrientationState, RemapTable> tables_;
};

inline RemapTable remap_for(const OrientationState& orientation)
{
    return OrientationCatalog::standard().table(orientation);
}

/// Role targets -> physical limb targets: each physical limb runs the target of
/// the role it now plays, rotated into its own base frame.
inline LimbTargets apply_remap(const RemapTable& table, const LimbTargets& role_targets)
{
    LimbTargets out{};
    for (std::size_t p = 0; p < 4; ++p) {
        const PlanarTarget& t = role_targets[index_of(table.role_of[p])];
        const double a = table.local_rotation[p];
        if (a == 0.0) {
            out[p] = t;
            continue;
        }
        const double c = std::cos(a), s = std::sin(a);
        out[p] = {c * t.x - s * t.y, s * t.x + c * t.y};
    }
    return out;
}

/// Same mapping for configurations (used for the body-limb posture).
inline RobotConfig apply_remap(const RemapTable& table, const RobotConfig& role_configs)
{
    RobotConfig out{};
    for (std::size_t p = 0; p < 4; ++p) {
        ConfigPair c = role_configs[index_of(table.role_of[p])];
        if (c.phi > 0.0) c.theta = wrap_angle(c.theta + table.local_rotation[p]);
        out[p] = c;
    }
    return out;
}

inline std::vector<Maneuver> correction_maneuver(const OrientationState& current, const OrientationState& target,
                                                 const ManeuverOptions& opt = {})
{
    return OrientationCatalog::standard().plan(current, target, opt);
}

}  // namespace tetrabot
