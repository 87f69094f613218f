#pragma once

// Whole-robot kinematics: four limbs joined at a tetrahedral hub, a floating
// base pose, CoG estimate and the static stability margin of the support polygon.

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "tetrabot/limb_kinematics.hpp"
#include "tetrabot/rotations.hpp"

namespace tetrabot {

enum class LimbId : int { Limb1 = 0, Limb2 = 1, Limb3 = 2, Limb4 = 3 };

inline constexpr std::array<LimbId, 4> kAllLimbs{LimbId::Limb1, LimbId::Limb2, LimbId::Limb3,
                                                 LimbId::Limb4};

constexpr std::size_t index_of(LimbId id) { return static_cast<std::size_t>(id); }
constexpr LimbId limb_at(std::size_t i) { return static_cast<LimbId>(i); }
/// 1-based label used in files and on the wire.
constexpr int limb_number(LimbId id) { return static_cast<int>(id) + 1; }

class DegenerateSupportError : public std::domain_error {
    using std::domain_error::domain_error;
};

struct TetraGeometry {
    double delta = 1.91 - kPi / 2.0;  // tetrahedral offset angle [rad]
    ModuleParams module{};
    double limb_mass = 0.15;  // [kg]
    double hub_mass = 0.05;   // [kg], 0.65 total minus four limbs

    void validate() const
    {
        module.validate();
        if (!(limb_mass > 0.0)) throw ConfigError("limb_mass must be > 0");
        if (!(hub_mass >= 0.0)) throw ConfigError("hub_mass must be >= 0");
    }
};

/// Floating-base pose. Rotation is intrinsic Z-Y-X: Rz(gamma) Ry(beta) Rx(alpha).
struct GlobalPose {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double xb = 0.0, yb = 0.0, zb = 0.0;

    Htm transform() const
    {
        return {rot_z(gamma) * rot_y(beta) * rot_x(alpha), Vec3(xb, yb, zb)};
    }
};

using RobotConfig = std::array<ConfigPair, 4>;

/// Fixed hub rotation that maps the module frame of a limb into the robot frame.
/// Limb1 is the identity; the lower limbs tilt by pi/2 + delta and are spread
/// 2pi/3 apart about the robot Z axis.
inline Mat3 limb_base_rotation(LimbId limb, const TetraGeometry& geom)
{
    if (limb == LimbId::Limb1) return Mat3::Identity();
    const double spread = 2.0 * kPi / 3.0 * static_cast<double>(index_of(limb) - 1);
    return rot_z(spread) * rot_y(kPi / 2.0 + geom.delta);
}

inline LimbHtm limb_base_transform(LimbId limb, const TetraGeometry& geom)
{
    return Htm::rotate(limb_base_rotation(limb, geom));
}

/// Robot-frame transform of the arc point at xi on a limb.
inline Htm limb_transform(LimbId limb, const ConfigPair& cfg, double xi, const TetraGeometry& geom)
{
    return limb_base_transform(limb, geom) * fk_htm(cfg, xi, geom.module);
}

inline Vec3 limb_global_point(const GlobalPose& pose, LimbId limb, const ConfigPair& cfg, double xi,
                              const TetraGeometry& geom)
{
    return (pose.transform() * limb_transform(limb, cfg, xi, geom)).translation;
}

inline Vec3 limb_tip(LimbId limb, const ConfigPair& cfg, const TetraGeometry& geom)
{
    return limb_base_rotation(limb, geom) * fk_point(cfg, 1.0, geom.module).vec();
}

inline std::vector<LimbPoint> sample_limb_curve(LimbId limb, const ConfigPair& cfg, std::size_t n_points,
                                                const TetraGeometry& geom)
{
    if (n_points < 2) throw std::invalid_argument("sample_limb_curve needs at least two points");
    const Mat3 base = limb_base_rotation(limb, geom);
    std::vector<LimbPoint> out;
    out.reserve(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double xi = static_cast<double>(k) / static_cast<double>(n_points - 1);
        const Vec3 p = base * fk_point(cfg, xi, geom.module).vec();
        out.push_back({p.x(), p.y(), p.z(), xi});
    }
    return out;
}

inline constexpr std::size_t kCogSamplesPerLimb = 32;

/// Robot-frame CoG: each limb is a uniform-density arc (midpoint rule, 32
/// samples) and the hub is a point mass at the origin.
inline Vec3 cog_estimate(const RobotConfig& config, const TetraGeometry& geom)
{
    const double total = 4.0 * geom.limb_mass + geom.hub_mass;
    if (total <= 0.0) return Vec3::Zero();
    Vec3 moment = Vec3::Zero();
    for (LimbId limb : kAllLimbs) {
        const Mat3 base = limb_base_rotation(limb, geom);
        Vec3 centroid = Vec3::Zero();
        for (std::size_t k = 0; k < kCogSamplesPerLimb; ++k) {
            const double xi = (static_cast<double>(k) + 0.5) / static_cast<double>(kCogSamplesPerLimb);
            centroid += fk_point(config[index_of(limb)], xi, geom.module).vec();
        }
        moment += geom.limb_mass * (base * centroid) / static_cast<double>(kCogSamplesPerLimb);
    }
    return moment / total;
}

namespace detail {

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Counter-clockwise convex hull (Andrew's monotone chain), collinear points dropped.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts)
{
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    if (pts.size() < 3) return pts;
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

}  // namespace detail

/// Signed distance from `point` to the boundary of the convex hull of
/// `support`, all in the ground (XY) plane. Positive inside.
inline double signed_support_distance(const Vec2& point, std::span<const Vec2> support)
{
    if (support.size() < 3) throw DegenerateSupportError("support polygon needs at least three contacts");
    const auto hull = detail::convex_hull({support.begin(), support.end()});
    if (hull.size() < 3) throw DegenerateSupportError("support contacts are collinear");

    double dist = std::numeric_limits<double>::infinity();
    bool inside = true;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        dist = std::min(dist, detail::segment_distance(point, a, b));
        if (detail::cross2(a, b, point) < 0) inside = false;
    }
    return inside ? dist : -dist;
}

/// World-frame tip positions of all four limbs.
inline std::array<Vec3, 4> world_tips(const RobotConfig& config, const Htm& world_from_robot,
                                      const TetraGeometry& geom)
{
    std::array<Vec3, 4> tips;
    for (LimbId limb : kAllLimbs) {
        tips[index_of(limb)] = world_from_robot.apply(limb_tip(limb, config[index_of(limb)], geom));
    }
    return tips;
}

/// Limbs whose world tip lies within `tolerance` of the lowest tip.
inline std::vector<LimbId> detect_contacts(const RobotConfig& config, const Htm& world_from_robot,
                                           const TetraGeometry& geom, double tolerance = 0.005)
{
    const auto tips = world_tips(config, world_from_robot, geom);
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& t : tips) lowest = std::min(lowest, t.z());
    std::vector<LimbId> contacts;
    for (LimbId limb : kAllLimbs) {
        if (tips[index_of(limb)].z() <= lowest + tolerance) contacts.push_back(limb);
    }
    return contacts;
}

/// Chebyshev centre of the support polygon in the ground plane: the incentre
/// for three contacts, the vertex mean otherwise.
inline Vec2 support_center(std::span<const Vec2> support)
{
    if (support.size() == 3) {
        const double a = (support[1] - support[2]).norm();
        const double b = (support[0] - support[2]).norm();
        const double c = (support[0] - support[1]).norm();
        if (a + b + c > 0.0) return (a * support[0] + b * support[1] + c * support[2]) / (a + b + c);
    }
    Vec2 sum = Vec2::Zero();
    for (const auto& p : support) sum += p;
    return support.empty() ? sum : Vec2(sum / static_cast<double>(support.size()));
}

inline constexpr std::array<LimbId, 3> kDefaultContacts{LimbId::Limb2, LimbId::Limb3, LimbId::Limb4};

inline double stability_margin(const RobotConfig& config, const Htm& world_from_robot, const TetraGeometry& geom,
                               std::span<const LimbId> contacts = kDefaultContacts)
{
    if (contacts.size() < 3) throw DegenerateSupportError("fewer than three ground contacts");
    const auto tips = world_tips(config, world_from_robot, geom);
    std::vector<Vec2> support;
    support.reserve(contacts.size());
    for (LimbId limb : contacts) support.push_back(tips[index_of(limb)].head<2>());
    const Vec3 cog = world_from_robot.apply(cog_estimate(config, geom));
    return signed_support_distance(cog.head<2>(), support);
}

inline double stability_margin(const RobotConfig& config, const GlobalPose& pose, const TetraGeometry& geom,
                               std::span<const LimbId> contacts = kDefaultContacts)
{
    return stability_margin(config, pose.transform(), geom, contacts);
}

/// Bend-plane heading, in the local frame of `bender`, that moves the ground
/// projection of the CoG toward the centre of the support polygon. `config`
/// is evaluated as given, so pass it with `bender` straight.
inline double support_center_heading(const RobotConfig& config, const Htm& world_from_robot, LimbId bender,
                                     std::span<const LimbId> contacts, const TetraGeometry& geom)
{
    const auto tips = world_tips(config, world_from_robot, geom);
    std::vector<Vec2> support;
    for (LimbId limb : contacts) support.push_back(tips[index_of(limb)].head<2>());
    const Vec2 cog = world_from_robot.apply(cog_estimate(config, geom)).head<2>();
    const Vec2 dir = support_center(support) - cog;
    const Mat3 limb_to_world = world_from_robot.rotation * limb_base_rotation(bender, geom);
    const Vec3 local = limb_to_world.transpose() * Vec3(dir.x(), dir.y(), 0.0);
    return std::atan2(local.y(), local.x());
}

}  // namespace tetrabot
