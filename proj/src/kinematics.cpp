#include "reachplan/kinematics.hpp"

#include "reachplan/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace reachplan {

namespace {

void check_dimension(const KinematicChain& chain, const JointConfig& config) {
    if (config.size() != chain.dof()) {
        throw ContractError("joint config has " + std::to_string(config.size()) +
                            " angles, chain has " + std::to_string(chain.dof()) + " joints");
    }
}

Eigen::Isometry3d dh_transform(const DhJoint& j, double theta) {
    const double th = theta + j.theta_offset;
    const double ct = std::cos(th);
    const double st = std::sin(th);
    const double ca = std::cos(j.alpha);
    const double sa = std::sin(j.alpha);
    Eigen::Matrix4d m;
    m << ct, -st * ca, st * sa, j.a * ct,
         st, ct * ca, -ct * sa, j.a * st,
         0.0, sa, ca, j.d,
         0.0, 0.0, 0.0, 1.0;
    return Eigen::Isometry3d(m);
}

} // namespace

bool DhJoint::continuous() const { return limit_hi - limit_lo >= kTwoPi - 1e-12; }

Eigen::VectorXd JointConfig::vector() const {
    return Eigen::Map<const Eigen::VectorXd>(angles.data(), static_cast<Eigen::Index>(angles.size()));
}

JointConfig JointConfig::from_vector(const Eigen::VectorXd& v) {
    return JointConfig{std::vector<double>(v.data(), v.data() + v.size())};
}

void KinematicChain::validate() const {
    if (joints.empty()) {
        throw ContractError("kinematic chain needs at least one joint");
    }
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const auto& j = joints[i];
        if (!(j.limit_lo < j.limit_hi) || j.limit_lo < -kTwoPi - 1e-12 ||
            j.limit_hi > kTwoPi + 1e-12) {
            throw ContractError("joint " + std::to_string(i) +
                                " limits must satisfy -2pi <= lo < hi <= 2pi");
        }
        for (double v : {j.a, j.alpha, j.d, j.theta_offset}) {
            if (!std::isfinite(v)) {
                throw ContractError("joint " + std::to_string(i) + " has a non-finite parameter");
            }
        }
    }
}

KinematicChain make_planar_chain(const std::vector<double>& link_lengths) {
    KinematicChain chain;
    for (double l : link_lengths) {
        DhJoint j;
        j.a = l;
        j.limit_lo = -kPi;
        j.limit_hi = kPi;
        chain.joints.push_back(j);
    }
    return chain;
}

bool is_planar(const KinematicChain& chain) {
    return std::all_of(chain.joints.begin(), chain.joints.end(),
                       [](const DhJoint& j) { return std::abs(std::sin(j.alpha)) < 1e-12; });
}

std::vector<Eigen::Isometry3d> joint_frames(const KinematicChain& chain, const JointConfig& config) {
    check_dimension(chain, config);
    std::vector<Eigen::Isometry3d> frames;
    frames.reserve(chain.dof() + 1);
    frames.push_back(Eigen::Isometry3d::Identity());
    for (std::size_t i = 0; i < chain.dof(); ++i) {
        frames.push_back(frames.back() * dh_transform(chain.joints[i], config[i]));
    }
    return frames;
}

Eigen::Isometry3d end_effector_transform(const KinematicChain& chain, const JointConfig& config) {
    return joint_frames(chain, config).back() * to_transform(chain.tool);
}

Pose6 forward_kinematics(const KinematicChain& chain, const JointConfig& config) {
    return from_transform(end_effector_transform(chain, config));
}

Jacobian jacobian(const KinematicChain& chain, const JointConfig& config) {
    const auto frames = joint_frames(chain, config);
    const Eigen::Vector3d p_end = (frames.back() * to_transform(chain.tool)).translation();
    Jacobian j(6, static_cast<Eigen::Index>(chain.dof()));
    for (std::size_t i = 0; i < chain.dof(); ++i) {
        const Eigen::Vector3d axis = frames[i].linear().col(2);
        const Eigen::Vector3d origin = frames[i].translation();
        const auto c = static_cast<Eigen::Index>(i);
        j.block<3, 1>(0, c) = axis.cross(p_end - origin);
        j.block<3, 1>(3, c) = axis;
    }
    return j;
}

double manipulability(const KinematicChain& chain, const JointConfig& config, TaskRows rows) {
    const Jacobian full = jacobian(chain, config);
    if (rows == TaskRows::Auto) {
        if (is_planar(chain)) {
            rows = TaskRows::PlanarPosition;
        } else if (chain.dof() >= 6) {
            rows = TaskRows::Full;
        } else {
            rows = TaskRows::Position;
        }
    }
    Eigen::MatrixXd j;
    switch (rows) {
    case TaskRows::PlanarPosition: j = full.topRows(2); break;
    case TaskRows::Position: j = full.topRows(3); break;
    default: j = full; break;
    }
    const double det = j.rows() <= j.cols() ? (j * j.transpose()).determinant()
                                            : (j.transpose() * j).determinant();
    return std::sqrt(std::max(0.0, det));
}

bool within_limits(const KinematicChain& chain, const JointConfig& config, double tol) {
    check_dimension(chain, config);
    for (std::size_t i = 0; i < chain.dof(); ++i) {
        const auto& j = chain.joints[i];
        if (config[i] < j.limit_lo - tol || config[i] > j.limit_hi + tol) {
            return false;
        }
    }
    return true;
}

JointConfig normalize_into_limits(const KinematicChain& chain, JointConfig config) {
    check_dimension(chain, config);
    for (std::size_t i = 0; i < chain.dof(); ++i) {
        const auto& j = chain.joints[i];
        if (j.continuous()) {
            double v = config[i] - kTwoPi * std::floor((config[i] - j.limit_lo) / kTwoPi);
            if (v >= j.limit_lo + kTwoPi) {
                v -= kTwoPi;
            }
            config[i] = std::max(v, j.limit_lo);
        } else {
            config[i] = std::clamp(config[i], j.limit_lo, j.limit_hi);
        }
    }
    return config;
}

std::optional<IkSolution> refine_ik(const KinematicChain& chain, const JointConfig& seed,
                                    const Pose6& target, const IkOptions& options) {
    check_dimension(chain, seed);
    const Pose6 goal = canonicalize(target);
    const auto n = static_cast<Eigen::Index>(chain.dof());

    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < 6; ++r) {
        if (options.mask[static_cast<std::size_t>(r)]) {
            rows.push_back(r);
        }
    }
    const auto m = static_cast<Eigen::Index>(rows.size());

    JointConfig q = normalize_into_limits(chain, seed);
    for (int iter = 0;; ++iter) {
        const Pose6 pose = forward_kinematics(chain, q);
        const double err = pose_distance(pose, goal, options.mask, options.rotation_weight);
        if (!std::isfinite(err)) {
            throw NumericalError("non-finite pose error during IK refinement");
        }
        if (err <= options.tol) {
            return IkSolution{q, iter, err};
        }
        if (iter >= options.max_iter || m == 0) {
            return std::nullopt;
        }

        // Map angular velocity onto roll/pitch/yaw rates: omega = E * rpy_dot.
        const Jacobian geometric = jacobian(chain, q);
        const double cp = std::cos(pose.pitch), sp = std::sin(pose.pitch);
        const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
        Eigen::Matrix3d e;
        e << cy * cp, -sy, 0.0,
             sy * cp, cy, 0.0,
             -sp, 0.0, 1.0;
        Eigen::Matrix3d e_inv;
        if (std::abs(cp) > kGimbalTolerance) {
            e_inv = e.inverse();
        } else {
            e_inv = e.completeOrthogonalDecomposition().pseudoInverse();
        }
        Jacobian task(6, n);
        task.topRows(3) = geometric.topRows(3);
        task.bottomRows(3) = options.rotation_weight * (e_inv * geometric.bottomRows(3));

        const auto delta = pose_delta(pose, goal);
        Eigen::MatrixXd jr(m, n);
        Eigen::VectorXd er(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const auto r = rows[static_cast<std::size_t>(k)];
            jr.row(k) = task.row(r);
            er(k) = delta[static_cast<std::size_t>(r)] * (r < 3 ? 1.0 : options.rotation_weight);
        }
        const Eigen::MatrixXd jjt = jr * jr.transpose() +
                                    options.damping * options.damping * Eigen::MatrixXd::Identity(m, m);
        Eigen::VectorXd step = jr.transpose() * jjt.ldlt().solve(er);
        const double largest = step.cwiseAbs().maxCoeff();
        if (!std::isfinite(largest)) {
            throw NumericalError("non-finite step during IK refinement");
        }
        if (largest > options.max_step) {
            step *= options.max_step / largest;
        }
        q = normalize_into_limits(chain, JointConfig::from_vector(q.vector() + step));
    }
}

PlanarIkResult planar_two_link_ik(double l1, double l2, double x, double y) {
    if (!(l1 > 0.0) || !(l2 > 0.0)) {
        throw ContractError("link lengths must be positive");
    }
    PlanarIkResult out;
    const double r2 = x * x + y * y;
    if (r2 == 0.0 && std::abs(l1 - l2) <= 1e-12 * std::max(l1, l2)) {
        out.degenerate = true;
        return out;
    }
    const double c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    constexpr double eps = 1e-12;
    if (c2 > 1.0 + eps || c2 < -1.0 - eps) {
        return out;
    }
    const double bearing = std::atan2(y, x);
    auto solve = [&](double theta2) {
        const double theta1 =
            bearing - std::atan2(l2 * std::sin(theta2), l1 + l2 * std::cos(theta2));
        out.solutions.push_back({wrap_angle(theta1), wrap_angle(theta2)});
    };
    if (c2 >= 1.0 - eps) {
        solve(0.0);
    } else if (c2 <= -1.0 + eps) {
        solve(kPi);
    } else {
        const double theta2 = std::acos(c2);
        solve(theta2);
        solve(-theta2);
    }
    return out;
}

} // namespace reachplan
