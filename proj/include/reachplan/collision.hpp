#pragma once

#include "reachplan/kinematics.hpp"
#include "reachplan/pose.hpp"

#include <Eigen/Geometry>

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace reachplan {

struct Sphere {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.0;
};

struct Capsule {
    Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
    Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
    double radius = 0.0;
};

/// Oriented box: center and rotation from `pose`, half extents along its local axes.
struct Box {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

    static Box from_pose(const Pose6& pose, const Eigen::Vector3d& half_extents);
};

using Shape = std::variant<Sphere, Capsule, Box>;

/// Throws ContractError on non-positive radii or half extents.
void validate_shape(const Shape& s);

Shape transformed(const Shape& s, const Eigen::Isometry3d& t);

/// Grows radii and half extents by margin.
Shape inflated(const Shape& s, double margin);

/// Closed solids: touching counts as collision.
bool shapes_collide(const Shape& a, const Shape& b);
bool shapes_collide(const Shape& a, const Eigen::Isometry3d& pose_a, const Shape& b,
                    const Eigen::Isometry3d& pose_b);

/// Center and radius of a sphere enclosing the shape.
std::pair<Eigen::Vector3d, double> bounding_sphere(const Shape& s);

struct RobotGeometry {
    // links[0] is the mobile base; links[i] is attached to the frame after joint i.
    std::vector<std::vector<Shape>> links;
    // Link pairs tested for self-collision; adjacent links are never listed.
    std::vector<std::pair<std::size_t, std::size_t>> self_pairs;

    void validate(std::size_t dof) const;
};

struct WorldShape {
    std::string group;
    Shape shape; // world frame
};

struct World {
    std::vector<WorldShape> shapes;

    void add(const std::string& group, const Shape& shape, const Pose6& pose = {});
};

/// Planar base placement; the base frame sits at z = 0.
struct BasePose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;

    Eigen::Isometry3d transform() const;
};

/// Base link shapes against the world (no ignore set).
bool base_in_collision(const RobotGeometry& geometry, const BasePose& base, const World& world,
                       double margin = 0.0);

bool robot_in_collision(const KinematicChain& chain, const RobotGeometry& geometry, const BasePose& base,
                        const JointConfig& config, const World& world,
                        const std::set<std::string>& ignore = {}, double margin = 0.0);

} // namespace reachplan
