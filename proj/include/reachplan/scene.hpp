#pragma once

#include "reachplan/baseregion.hpp"
#include "reachplan/collision.hpp"
#include "reachplan/grid.hpp"
#include "reachplan/kinematics.hpp"
#include "reachplan/regiongeo.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace reachplan {

/// Shape as written in a scene document (boxes keep their pose).
struct ShapeSpec {
    enum class Kind { Sphere, Capsule, Box };

    Kind kind = Kind::Sphere;
    std::array<double, 3> center{};
    std::array<double, 3> p0{};
    std::array<double, 3> p1{};
    double radius = 0.0;
    Pose6 pose;
    std::array<double, 3> half_extents{};

    Shape build() const;
};

struct SceneTray {
    std::string id;
    Pose6 pose;
    std::vector<ShapeSpec> shapes; // tray frame
};

struct SceneObstacle {
    std::string id; // may be empty
    ShapeSpec shape; // world frame
};

struct SceneObject {
    std::string id;
    Pose6 pose; // world frame
    std::vector<Pose6> grasps; // object frame
    std::vector<ShapeSpec> shapes; // object frame
};

struct SceneTask {
    std::string tray;
    std::vector<SceneObject> objects;
};

struct Scene {
    KinematicChain chain;
    std::vector<std::vector<ShapeSpec>> links; // links[0] is the base
    std::vector<std::pair<std::size_t, std::size_t>> self_pairs;
    double heading = 0.0;

    std::vector<SceneTray> trays;
    std::vector<SceneObstacle> obstacles;
    std::vector<SceneTask> tasks;

    BaseGridSpec grid; // grid.heading mirrors heading
    UncertaintyModel uncertainty;
    Point2 start;
    Point2 goal;
    PoseMask grasp_mask;

    RobotGeometry geometry() const;
    /// Trays, objects and obstacles; each shape grouped under its owner's id.
    World world() const;
    /// Tray ids in task order.
    std::vector<std::string> task_trays() const;
    const SceneTask& task(const std::string& tray) const;
    std::vector<GraspSet> grasp_sets(const std::string& tray) const;
};

/// Parses and validates a scene document. Throws SceneError with codes
/// SCENE_SYNTAX, SCENE_MISSING_FIELD, SCENE_TYPE, SCENE_NONPOSITIVE,
/// SCENE_EMPTY_GRASPSET, SCENE_UNKNOWN_TRAY, SCENE_DUPLICATE_ID,
/// SCENE_BAD_ID or SCENE_INVALID.
Scene parse_scene(const std::string& text);
Scene load_scene(const std::filesystem::path& path);

/// Canonical form: sorted keys, numbers as %.9g, two-space indentation.
std::string emit_scene(const Scene& scene);

} // namespace reachplan
