#pragma once

#include "reachplan/digest.hpp"
#include "reachplan/kinematics.hpp"
#include "reachplan/pose.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace reachplan {

/// Grid lengths of the 6D voxelization: x, y, z (m), roll, pitch, yaw (rad).
struct VoxelSpec {
    std::array<double, 6> cell{};

    static VoxelSpec uniform(double position, double rotation);

    /// All six lengths strictly positive and finite.
    bool positive() const;
    /// Roll/yaw lengths divide 2pi and pitch divides pi (within 1e-12), so the
    /// wrap-around cell boundaries line up.
    bool angular_aligned() const;
    /// Throws ContractError unless positive() and angular_aligned().
    void validate() const;

    friend bool operator==(const VoxelSpec&, const VoxelSpec&) = default;
};

struct VoxelKey {
    std::array<std::int32_t, 6> idx{};

    friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

/// floor(value / cell) per dimension; the pose is canonicalized first.
VoxelKey voxel_index(const Pose6& pose, const VoxelSpec& spec);

struct SamplingSpec {
    // One step per joint, or a single step shared by all joints.
    std::vector<double> steps;
    double w_min = 0.0;
    // Optional thinning: keep with probability min(1, (w / w_ref)^p). p = 0 disables it.
    double thin_exponent = 0.0;
    double thin_reference = 1.0;
    std::uint64_t seed = 0;

    double step(std::size_t joint) const { return steps.size() == 1 ? steps[0] : steps.at(joint); }
};

/// Regular samples lo + k * step inside each joint's limits; a continuous
/// joint drops the sample that would duplicate lo + 2pi.
std::vector<std::vector<double>> joint_samples(const KinematicChain& chain, const SamplingSpec& sampling);

/// Number of configurations the build will visit.
std::uint64_t sample_count(const KinematicChain& chain, const SamplingSpec& sampling);

struct ReachRecord {
    Pose6 pose;
    JointConfig config;
    double manipulability = 0.0;

    friend bool operator==(const ReachRecord&, const ReachRecord&) = default;
};

using Fingerprint = Digest;

/// SHA-256 over the chain's joint parameters and tool pose.
Fingerprint chain_fingerprint(const KinematicChain& chain);

/// Immutable reachability database: records grouped per 6D voxel, voxel
/// directory sorted by key.
class ReachDB {
  public:
    struct VoxelEntry {
        VoxelKey key;
        std::uint64_t offset = 0;
        std::uint32_t count = 0;

        friend bool operator==(const VoxelEntry&, const VoxelEntry&) = default;
    };

    ReachDB() = default;

    /// Groups records by voxel. Records keep their relative order within a voxel.
    static ReachDB from_records(const VoxelSpec& spec, const Fingerprint& fingerprint,
                                std::size_t dof, std::vector<ReachRecord> records);

    const VoxelSpec& voxel_spec() const { return spec_; }
    const Fingerprint& fingerprint() const { return fingerprint_; }
    std::size_t dof() const { return dof_; }
    std::size_t record_count() const { return records_.size(); }
    std::size_t voxel_count() const { return directory_.size(); }
    std::span<const VoxelEntry> directory() const { return directory_; }
    std::span<const ReachRecord> records() const { return records_; }

    std::span<const ReachRecord> voxel(const VoxelKey& key) const;

    /// Records of the voxel containing target.
    std::span<const ReachRecord> query(const Pose6& target) const;

    /// Exact-voxel lookup with some dimensions left free.
    std::vector<std::span<const ReachRecord>> query_voxels(const Pose6& target, const PoseMask& mask) const;

    /// Voxels overlapping the open interval (target - cell, target + cell) in
    /// every constrained dimension; roll and yaw wrap around. Ordered by key.
    std::vector<std::span<const ReachRecord>> interval_voxels(const Pose6& target,
                                                              const PoseMask& mask = {}) const;

    std::vector<const ReachRecord*> query_interval(const Pose6& target, const PoseMask& mask = {}) const;

    /// Throws FingerprintMismatchError when the chain differs from the build chain.
    void verify_chain(const KinematicChain& chain) const;

    /// Checks that every record is stored under its own voxel key, and (when a
    /// chain is given) that FK of the stored config matches the stored pose.
    /// Returns the number of violations.
    std::size_t count_violations(const KinematicChain* chain = nullptr, double tol = 1e-9) const;

    friend bool operator==(const ReachDB&, const ReachDB&) = default;

  private:
    std::vector<std::span<const ReachRecord>>
    collect(const std::array<std::vector<std::int32_t>, 6>& candidates,
            const std::array<bool, 6>& free_dims) const;

    VoxelSpec spec_;
    Fingerprint fingerprint_{};
    std::size_t dof_ = 0;
    std::vector<VoxelEntry> directory_;
    std::vector<ReachRecord> records_;
};

struct BuildOptions {
    unsigned threads = 1;
};

/// Samples the joint grid, runs FK and manipulability per sample, applies the
/// acceptance rule and stores the survivors. Throws BuildError if nothing survives.
ReachDB build(const KinematicChain& chain, const SamplingSpec& sampling, const VoxelSpec& spec,
              const BuildOptions& options = {});

inline constexpr std::uint32_t kDbFormatVersion = 1;

std::vector<std::uint8_t> serialize(const ReachDB& db);
ReachDB deserialize(std::span<const std::uint8_t> bytes);
void save(const ReachDB& db, const std::filesystem::path& path);
ReachDB load(const std::filesystem::path& path);

/// Record counts collapsed over the three angular dimensions.
struct ProjectionGrid {
    std::array<std::int32_t, 3> lo{};
    std::array<std::int32_t, 3> size{};
    std::vector<std::uint64_t> counts;

    std::uint64_t at(std::int32_t ix, std::int32_t iy, std::int32_t iz) const;
    std::uint64_t total() const;
};

ProjectionGrid reachability_projection(const ReachDB& db);

} // namespace reachplan
