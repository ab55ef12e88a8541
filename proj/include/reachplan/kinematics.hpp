#pragma once

#include "reachplan/pose.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace reachplan {

/// Revolute joint in standard Denavit-Hartenberg form:
///   T_i = Rz(theta_i + theta_offset) * Tz(d) * Tx(a) * Rx(alpha)
/// The joint rotates about the z axis of the previous frame.
struct DhJoint {
    double a = 0.0;
    double alpha = 0.0;
    double d = 0.0;
    double theta_offset = 0.0;
    double limit_lo = -kPi;
    double limit_hi = kPi;

    /// True when the limits span a full revolution; such joints wrap instead of clamping.
    bool continuous() const;

    friend bool operator==(const DhJoint&, const DhJoint&) = default;
};

struct JointConfig {
    std::vector<double> angles;

    std::size_t size() const { return angles.size(); }
    double operator[](std::size_t i) const { return angles[i]; }
    double& operator[](std::size_t i) { return angles[i]; }
    Eigen::VectorXd vector() const;
    static JointConfig from_vector(const Eigen::VectorXd& v);

    friend bool operator==(const JointConfig&, const JointConfig&) = default;
};

struct KinematicChain {
    std::vector<DhJoint> joints;
    Pose6 tool;

    std::size_t dof() const { return joints.size(); }

    /// Throws ContractError unless n >= 1 and every limit interval is
    /// non-empty and inside [-2pi, 2pi].
    void validate() const;

    friend bool operator==(const KinematicChain&, const KinematicChain&) = default;
};

/// Chain of links rotating about parallel z axes, limits [-pi, pi).
KinematicChain make_planar_chain(const std::vector<double>& link_lengths);

/// All joint axes parallel to the base z axis.
bool is_planar(const KinematicChain& chain);

/// Frames of the chain: element 0 is the base frame, element i the frame after joint i.
std::vector<Eigen::Isometry3d> joint_frames(const KinematicChain& chain, const JointConfig& config);

Eigen::Isometry3d end_effector_transform(const KinematicChain& chain, const JointConfig& config);

Pose6 forward_kinematics(const KinematicChain& chain, const JointConfig& config);

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Geometric Jacobian in the base frame: rows 0-2 linear velocity, rows 3-5 angular velocity.
Jacobian jacobian(const KinematicChain& chain, const JointConfig& config);

enum class TaskRows {
    Auto,           // planar chains: PlanarPosition; n >= 6: Full; otherwise Position
    PlanarPosition, // x, y
    Position,       // x, y, z
    Full,           // all six rows
};

/// Yoshikawa measure sqrt(det(J J^T)) over the selected task rows (det(J^T J)
/// when the chain has fewer joints than rows).
double manipulability(const KinematicChain& chain, const JointConfig& config,
                      TaskRows rows = TaskRows::Auto);

bool within_limits(const KinematicChain& chain, const JointConfig& config, double tol = 1e-12);

/// Wraps continuous joints into [lo, lo + 2pi) and clamps the others.
JointConfig normalize_into_limits(const KinematicChain& chain, JointConfig config);

struct IkOptions {
    double tol = 1e-9;
    int max_iter = 200;
    PoseMask mask;
    double rotation_weight = 1.0;
    double damping = 1e-3;
    double max_step = 0.2;
};

struct IkSolution {
    JointConfig config;
    int iterations = 0;
    double error = 0.0;
};

/// Damped least-squares refinement from a seed, typically a database hit.
/// Works in the pose space of the metric (position plus wrapped roll/pitch/yaw),
/// so success means pose_distance(FK(result), target) <= tol.
/// Returns nullopt when max_iter is exhausted; throws NumericalError on NaN.
std::optional<IkSolution> refine_ik(const KinematicChain& chain, const JointConfig& seed,
                                    const Pose6& target, const IkOptions& options = {});

/// Closed-form solutions of a planar two-link arm reaching (x, y).
struct PlanarIkResult {
    // Target at the origin with l1 == l2: every theta1 works with theta2 = pi.
    bool degenerate = false;
    std::vector<std::array<double, 2>> solutions;
};

PlanarIkResult planar_two_link_ik(double l1, double l2, double x, double y);

} // namespace reachplan
