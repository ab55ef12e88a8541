#pragma once

#include "reachplan/collision.hpp"
#include "reachplan/grid.hpp"
#include "reachplan/kinematics.hpp"
#include "reachplan/reachdb.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reachplan {

/// Candidate grasps of one object, expressed in the object's frame.
struct GraspSet {
    std::string object_id;
    std::vector<Pose6> grasps;
    Pose6 object_pose;
};

/// Base positions from which every object of one tray is graspable.
struct BaseRegion {
    std::string tray_id;
    BaseGridSpec grid;
    Mask mask;

    friend bool operator==(const BaseRegion&, const BaseRegion&) = default;
};

/// World grasp pose re-expressed in the frame of a base placed at `base`.
Pose6 grasp_in_base_frame(const Pose6& grasp, const Pose6& object_pose, const BasePose& base);

enum class QueryMode { Exact, Interval };

enum class WitnessStrategy {
    // Any stored configuration of the queried voxels may serve as the witness.
    AllConfigurations,
    // Only the lowest joint-norm configuration is considered, the way a
    // conventional IK solver hands back one answer per target.
    SingleSolution,
};

struct GraspOptions {
    QueryMode mode = QueryMode::Interval;
    WitnessStrategy strategy = WitnessStrategy::AllConfigurations;
    PoseMask mask;
    double margin = 0.0;
    bool refine = false;
    IkOptions ik;
};

struct GraspWitness {
    std::size_t grasp_index = 0;
    JointConfig config;
    Pose6 record_pose; // pose of the configuration that was used
    Pose6 target;      // grasp pose in the base frame
    bool refined = false;
};

struct PlanningContext {
    const ReachDB& db;
    const KinematicChain& chain;
    const RobotGeometry& geometry;
    const World& world;
};

/// Query results cached by (object, grasp, base-relative pose quantized to 1e-9).
class QueryCache;

/// First collision-free witness over grasps in order and records in database
/// order. The object's own shape group is ignored during collision checks.
std::optional<GraspWitness> object_graspable(const PlanningContext& ctx, const GraspSet& object,
                                             const BasePose& base, const GraspOptions& options,
                                             QueryCache* cache = nullptr);

struct RegionOptions {
    GraspOptions grasp;
    unsigned threads = 1;
};

struct RegionResult {
    BaseRegion region;
    // Per cell (row-major): one witness per object when feasible, empty otherwise.
    std::vector<std::vector<GraspWitness>> witnesses;
};

/// Evaluates every cell center of the grid.
RegionResult compute_base_region(const PlanningContext& ctx, std::span<const GraspSet> objects,
                                 const BaseGridSpec& grid, const std::string& tray_id,
                                 const RegionOptions& options = {});

/// Text grid: header `baseregion v1 <tray> <x0> <y0> <c> <w> <h> <phi>`, then
/// one line per row (row 0 first), '#' feasible, '.' infeasible.
void write_region(std::ostream& out, const BaseRegion& region);
BaseRegion read_region(std::istream& in);

} // namespace reachplan
