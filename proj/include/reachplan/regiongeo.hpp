#pragma once

#include "reachplan/baseregion.hpp"
#include "reachplan/grid.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reachplan {

/// Cell-wise AND; throws GridMismatchError unless all grids agree.
Mask intersect(std::span<const BaseRegion> regions);

/// 4-connected components, largest first; ties broken by the first cell in row-major order.
std::vector<Mask> connected_components(const Mask& mask);

/// Squared distance (in cell units) from every cell center to the nearest
/// infeasible cell center, cells outside the grid counting as infeasible.
/// Zero for infeasible cells. Exact integer arithmetic.
std::vector<std::int64_t> squared_clearance(const Mask& mask);

struct InscribedCircle {
    Point2 center;
    double radius = 0.0;
    int row = 0;
    int col = 0;
};

/// Feasible cell center farthest from any infeasible cell center (lowest
/// row, then column, on ties). Throws ContractError on an empty mask.
InscribedCircle inscribed_circle(const Mask& mask, const BaseGridSpec& grid);

struct RegionComponent {
    Mask mask;
    std::size_t cells = 0;
    InscribedCircle circle;
};

struct IntersectionRecord {
    std::vector<std::size_t> trays; // indices into the region list, ascending
    Mask mask;
    std::vector<RegionComponent> components;
    std::optional<InscribedCircle> robust; // set by filter_by_uncertainty

    std::size_t order() const { return trays.size(); }
    /// Component with the largest inscribed radius (first on ties).
    const RegionComponent& best_component() const;
    double best_radius() const { return components.empty() ? 0.0 : best_component().circle.radius; }
};

IntersectionRecord make_record(std::vector<std::size_t> trays, Mask mask, const BaseGridSpec& grid);

/// Non-empty intersections of every subset of 1..max_order regions
/// (max_order = 0 means all). A subset is only evaluated when all of its
/// one-smaller subsets are non-empty. Sorted by order, then subset.
std::vector<IntersectionRecord> enumerate_intersections(std::span<const BaseRegion> regions,
                                                        std::size_t max_order = 0);

enum class ErrorModel { UniformDisk, GaussianRadial, BoundaryWorstCase };

std::string to_string(ErrorModel m);
ErrorModel parse_error_model(const std::string& s);

struct UncertaintyModel {
    double sigma = 0.0; // m
    ErrorModel model = ErrorModel::BoundaryWorstCase;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Keeps records whose best inscribed radius reaches sigma and stores the
/// robust base position (center of that circle) on each kept record.
std::vector<IntersectionRecord> filter_by_uncertainty(std::vector<IntersectionRecord> records,
                                                      const UncertaintyModel& u);

/// Same text grid as base regions with header
/// `intersection v1 <id,id,...> <x0> <y0> <c> <w> <h> <phi>`.
void write_intersection(std::ostream& out, const IntersectionRecord& record,
                        std::span<const std::string> tray_ids, const BaseGridSpec& grid);

} // namespace reachplan
