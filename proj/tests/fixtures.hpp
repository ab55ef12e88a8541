#pragma once

#include "oracles.hpp"

#include "reachplan/baseregion.hpp"
#include "reachplan/collision.hpp"
#include "reachplan/reachdb.hpp"
#include "reachplan/scene.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fixture {

using namespace reachplan;

inline std::string scene_path(const std::string& name) { return std::string(REACHPLAN_SCENE_DIR) + "/" + name; }

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("reachplan_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<BaseRegion> disk_regions(const BaseGridSpec& g, const std::vector<Point2>& centers, double r) {
    std::vector<BaseRegion> out;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        out.push_back({std::to_string(i + 1), g, oracle::disk_mask(g, centers[i].x, centers[i].y, r)});
    }
    return out;
}

// Four unit discs in a row: neighbours and next-neighbours overlap.
inline std::vector<BaseRegion> four_disc_regions() {
    const BaseGridSpec g{-1.2, -1.2, 0.05, 96, 48, 0.0};
    return disk_regions(g, {{0.0, 0.0}, {0.8, 0.0}, {1.6, 0.0}, {2.4, 0.0}}, 1.0);
}

// Five discs of radius 0.5; {1,3} and {1,2,3} overlap only in a sliver.
inline std::vector<BaseRegion> five_disc_regions() {
    const BaseGridSpec g{-0.6, -0.6, 0.02, 165, 75, 0.0};
    return disk_regions(g, {{0.0, 0.0}, {0.475, 0.3}, {0.9, 0.0}, {1.55, 0.35}, {2.15, 0.0}}, 0.5);
}

inline constexpr double kFiveDiscSigma = 0.1;

// Planar 0.5 m + 0.4 m arm with capsule links in the z = 0 plane and a base box below it.
struct PlanarRig {
    KinematicChain chain = make_planar_chain({0.5, 0.4});
    RobotGeometry geometry;
    World world;

    PlanarRig() {
        geometry.links = {
            {Box::from_pose(Pose6{0, 0, -0.3, 0, 0, 0}, Eigen::Vector3d(0.12, 0.12, 0.25))},
            {Capsule{Eigen::Vector3d(-0.5, 0, 0), Eigen::Vector3d::Zero(), 0.03}},
            {Capsule{Eigen::Vector3d(-0.4, 0, 0), Eigen::Vector3d::Zero(), 0.03}},
        };
        geometry.self_pairs = {{0, 2}};
    }
};

inline VoxelSpec planar_voxels(double pos = 0.02) { return VoxelSpec{{pos, pos, pos, M_PI / 8, M_PI / 8, M_PI / 8}}; }

inline ReachDB planar_db(const KinematicChain& chain, double dtheta = M_PI / 128, double pos = 0.02) {
    SamplingSpec s;
    s.steps = {dtheta};
    return build(chain, s, planar_voxels(pos));
}

// Object sitting below the arm plane; its single grasp is at z = 0.
inline GraspSet planar_object(const std::string& id, double x, double y) {
    return GraspSet{id, {Pose6{0, 0, 0.08, 0, 0, 0}}, Pose6{x, y, -0.08, 0, 0, 0}};
}

inline KinematicChain random_chain(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> len(-0.6, 0.6), ang(-M_PI, M_PI);
    KinematicChain c;
    for (std::size_t i = 0; i < n; ++i) {
        c.joints.push_back(DhJoint{len(rng), ang(rng), len(rng), ang(rng), -M_PI, M_PI});
    }
    c.tool = Pose6{len(rng), len(rng), len(rng), ang(rng), 0.4 * ang(rng), ang(rng)};
    return c;
}

inline JointConfig random_config(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    JointConfig q;
    for (std::size_t i = 0; i < n; ++i) {
        q.angles.push_back(ang(rng));
    }
    return q;
}

inline GraspOptions yaw_free_options() {
    GraspOptions o;
    o.mask = PoseMask::yaw_free();
    return o;
}

} // namespace fixture
