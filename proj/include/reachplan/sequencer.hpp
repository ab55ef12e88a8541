#pragma once

#include "reachplan/baseregion.hpp"
#include "reachplan/grid.hpp"
#include "reachplan/regiongeo.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace reachplan {

struct CoverCandidate {
    std::vector<std::size_t> trays; // ascending, each < tray_count
    Point2 position;
    double radius = 0.0;
};

struct CoverInstance {
    std::size_t tray_count = 0;
    std::vector<CoverCandidate> candidates;

    void validate() const;
    /// a[s][i] = 1 iff candidate i covers tray s.
    std::vector<std::vector<std::uint8_t>> coverage() const;
};

/// Minimum number of candidates covering every tray at least once. Among
/// optimal selections, exact covers win, then the smallest index set in the
/// canonical candidate order (larger subsets first, then subsets
/// lexicographically, then original index). Returned ascending.
/// Throws InfeasibleError naming the trays no candidate covers.
std::vector<std::size_t> min_cover(const CoverInstance& instance);

struct StopOrder {
    std::vector<std::size_t> order; // indices into the stop list, visit order
    double length = 0.0;
};

double path_length(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                   std::span<const std::size_t> order);

inline constexpr std::size_t kExactStopLimit = 9;

/// Enumerates all permutations; ties keep the lexicographically first one.
/// Throws ContractError above kExactStopLimit stops.
StopOrder order_stops_exact(const Point2& start, const Point2& goal, std::span<const Point2> stops);

struct SaSchedule {
    double t0 = 0.0; // <= 0: mean segment length of the initial tour
    double alpha = 0.995;
    std::size_t iterations = 20000;
};

/// Greedy nearest-neighbour start, then annealing with 2-opt and relocation
/// moves (4:1). Returns the best order seen.
StopOrder order_stops_sa(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                         const SaSchedule& schedule = {}, std::uint64_t seed = 42);

/// Independent chains seeded seed, seed+1, ...; shortest wins, earliest chain on ties.
StopOrder order_stops_sa_chains(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                                const SaSchedule& schedule, std::uint64_t seed, std::size_t chains,
                                unsigned threads = 1);

StopOrder greedy_order(const Point2& start, const Point2& goal, std::span<const Point2> stops);

struct PlanOptions {
    std::size_t max_order = 0; // 0: number of trays
    SaSchedule schedule;
    std::uint64_t sa_seed = 42;
    std::size_t sa_chains = 1;
    std::size_t exact_limit = kExactStopLimit;
    unsigned threads = 1;
};

struct PlanStop {
    std::vector<std::size_t> trays;  // trays of the chosen intersection
    std::vector<std::size_t> serves; // trays assigned to this stop
    Point2 center;
    double radius = 0.0;
};

struct PlanResult {
    Point2 start;
    Point2 goal;
    std::vector<PlanStop> stops;         // visit order
    std::vector<std::size_t> assignment; // tray -> index into stops
    double length = 0.0;
    std::vector<IntersectionRecord> candidates; // records that survived the filter
    std::vector<std::size_t> selected;          // indices into candidates, ascending
};

StopOrder route(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                const PlanOptions& options);

/// Builds a plan from already-filtered candidates.
PlanResult plan_from_candidates(std::vector<IntersectionRecord> candidates, std::size_t tray_count,
                                std::span<const std::string> tray_ids, const Point2& start, const Point2& goal,
                                const PlanOptions& options = {});

/// enumerate -> filter -> min_cover -> route. Throws InfeasibleError when a
/// tray's own region does not pass the uncertainty filter.
PlanResult plan(std::span<const BaseRegion> regions, const UncertaintyModel& uncertainty, const Point2& start,
                const Point2& goal, const PlanOptions& options = {});

/// One stop per tray at the inscribed center of its own region, routed like plan().
PlanResult naive_plan(std::span<const BaseRegion> regions, const Point2& start, const Point2& goal,
                      const PlanOptions& options = {});

/// Text form read back by the simulator:
///   plan v1
///   start <x> <y>
///   goal <x> <y>
///   stops <m>
///   stop <trays> <serves> <cx> <cy> <radius>     (one per stop, visit order)
///   length <L>
void write_plan(std::ostream& out, const PlanResult& plan, std::span<const std::string> tray_ids);
PlanResult read_plan(std::istream& in, std::span<const std::string> tray_ids);

} // namespace reachplan
