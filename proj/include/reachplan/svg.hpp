#pragma once

#include "reachplan/baseregion.hpp"
#include "reachplan/reachdb.hpp"
#include "reachplan/regiongeo.hpp"
#include "reachplan/sequencer.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace reachplan {

/// x-y occupancy of the database, darker where more records project.
std::string svg_projection(const ProjectionGrid& projection, const VoxelSpec& spec);

std::string svg_region(const BaseRegion& region);

/// Regions as translucent layers plus each record's mask outline cells and inscribed circle.
std::string svg_intersections(std::span<const BaseRegion> regions, std::span<const IntersectionRecord> records);

/// Regions, selected circles and the stop path from start to goal.
std::string svg_plan(std::span<const BaseRegion> regions, const PlanResult& plan);

std::string svg_histogram(std::span<const std::size_t> counts, double sigma);

} // namespace reachplan
