#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tetrabot {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

inline Mat3 rot_x(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return r;
}

inline Mat3 rot_y(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return r;
}

inline Mat3 rot_z(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return r;
}

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a)
{
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

/// 1 - cos(x) without cancellation near zero.
inline double one_minus_cos(double x)
{
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

/// Rigid transform in SE(3): rotation plus translation.
struct Htm {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Htm identity() { return {}; }
    static Htm rotate(const Mat3& r) { return {r, Vec3::Zero()}; }
    static Htm translate(const Vec3& p) { return {Mat3::Identity(), p}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    Htm inverse() const
    {
        const Mat3 rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    friend Htm operator*(const Htm& a, const Htm& b)
    {
        return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
    }
};

/// Max-abs deviation of R^T R from identity.
inline double orthonormality_error(const Mat3& r)
{
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace tetrabot
