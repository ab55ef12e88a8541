#include "reachplan/pose.hpp"

#include <cmath>

namespace reachplan {

double wrap_angle(double a) {
    double w = a - kTwoPi * std::floor((a + kPi) / kTwoPi);
    if (w >= kPi) {
        w -= kTwoPi;
    }
    if (w < -kPi) {
        w += kTwoPi;
    }
    return w;
}

double Pose6::operator[](std::size_t i) const {
    switch (i) {
    case 0: return x;
    case 1: return y;
    case 2: return z;
    case 3: return roll;
    case 4: return pitch;
    default: return yaw;
    }
}

Pose6 Pose6::from_values(const std::array<double, 6>& v) {
    Pose6 p;
    p.x = v[0];
    p.y = v[1];
    p.z = v[2];
    p.roll = v[3];
    p.pitch = v[4];
    p.yaw = v[5];
    return p;
}

bool is_near_gimbal(double pitch) { return std::abs(std::cos(pitch)) < kGimbalTolerance; }

Pose6 canonicalize(Pose6 p) {
    double pitch = wrap_angle(p.pitch);
    if (pitch > kPi / 2) {
        p.roll += kPi;
        p.yaw += kPi;
        pitch = kPi - pitch;
    } else if (pitch < -kPi / 2) {
        p.roll += kPi;
        p.yaw += kPi;
        pitch = -kPi - pitch;
    }
    p.pitch = pitch;
    p.roll = wrap_angle(p.roll);
    p.yaw = wrap_angle(p.yaw);
    p.near_gimbal = is_near_gimbal(p.pitch);
    return p;
}

Eigen::Matrix3d rpy_matrix(double roll, double pitch, double yaw) {
    return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

Eigen::Isometry3d to_transform(const Pose6& p) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = rpy_matrix(p.roll, p.pitch, p.yaw);
    t.translation() = Eigen::Vector3d(p.x, p.y, p.z);
    return t;
}

Pose6 from_transform(const Eigen::Isometry3d& t) {
    const Eigen::Matrix3d r = t.linear();
    Pose6 p;
    p.x = t.translation().x();
    p.y = t.translation().y();
    p.z = t.translation().z();
    const double cp = std::hypot(r(0, 0), r(1, 0));
    p.pitch = std::atan2(-r(2, 0), cp);
    if (cp > 1e-12) {
        p.roll = std::atan2(r(2, 1), r(2, 2));
        p.yaw = std::atan2(r(1, 0), r(0, 0));
    } else {
        // Only roll - yaw (or roll + yaw) is observable; pin roll to zero.
        p.roll = 0.0;
        p.yaw = std::atan2(-r(0, 1), r(1, 1));
    }
    p.roll = wrap_angle(p.roll);
    p.yaw = wrap_angle(p.yaw);
    p.near_gimbal = is_near_gimbal(p.pitch);
    return p;
}

std::array<double, 6> pose_delta(const Pose6& a, const Pose6& b) {
    return {b.x - a.x,
            b.y - a.y,
            b.z - a.z,
            wrap_angle(b.roll - a.roll),
            wrap_angle(b.pitch - a.pitch),
            wrap_angle(b.yaw - a.yaw)};
}

double pose_distance(const Pose6& a, const Pose6& b, const PoseMask& mask, double rotation_weight) {
    const auto d = pose_delta(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        if (!mask[i]) {
            continue;
        }
        const double w = i < 3 ? 1.0 : rotation_weight;
        sum += (w * d[i]) * (w * d[i]);
    }
    return std::sqrt(sum);
}

} // namespace reachplan
