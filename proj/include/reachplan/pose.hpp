#pragma once

#include <Eigen/Geometry>

#include <array>
#include <cstddef>

namespace reachplan {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// |cos(pitch)| below this marks a pose as near gimbal lock.
inline constexpr double kGimbalTolerance = 1e-6;

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// End-effector pose: position in meters, fixed-axis roll/pitch/yaw in radians
/// with R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct Pose6 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
    bool near_gimbal = false;

    double operator[](std::size_t i) const;
    std::array<double, 6> values() const { return {x, y, z, roll, pitch, yaw}; }
    static Pose6 from_values(const std::array<double, 6>& v);

    friend bool operator==(const Pose6&, const Pose6&) = default;
};

/// Brings roll/yaw into [-pi, pi) and pitch into [-pi/2, pi/2] using the
/// equivalent (roll + pi, pi - pitch, yaw + pi) representation when needed.
Pose6 canonicalize(Pose6 p);

bool is_near_gimbal(double pitch);

Eigen::Matrix3d rpy_matrix(double roll, double pitch, double yaw);
Eigen::Isometry3d to_transform(const Pose6& p);
Pose6 from_transform(const Eigen::Isometry3d& t);

/// Marks which pose components (x, y, z, roll, pitch, yaw) are constrained.
struct PoseMask {
    std::array<bool, 6> constrained{true, true, true, true, true, true};

    static PoseMask full() { return {}; }
    static PoseMask position_only() { return {{true, true, true, false, false, false}}; }
    /// Position and roll/pitch constrained, yaw free.
    static PoseMask yaw_free() { return {{true, true, true, true, true, false}}; }

    bool operator[](std::size_t i) const { return constrained[i]; }
    friend bool operator==(const PoseMask&, const PoseMask&) = default;
};

/// Per-component difference (b - a); angular components wrapped to [-pi, pi).
std::array<double, 6> pose_delta(const Pose6& a, const Pose6& b);

/// Weighted pose metric over the constrained components:
/// sqrt(sum dpos^2 + w^2 * sum drot^2), angular differences wrapped.
double pose_distance(const Pose6& a, const Pose6& b, const PoseMask& mask = {},
                     double rotation_weight = 1.0);

} // namespace reachplan
