#pragma once

#include "reachplan/baseregion.hpp"
#include "reachplan/regiongeo.hpp"
#include "reachplan/sequencer.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace reachplan {

/// Counter-based generator: output k of stream s is a pure function of (seed, s, k).
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

struct Offset {
    double dx = 0.0;
    double dy = 0.0;
};

/// slack is subtracted from the sampled radius (clamped at 0).
Offset sample_offset(const UncertaintyModel& u, CounterRng& rng, double slack = 0.0);

struct SimOptions {
    std::size_t trials = 10000;
    double speed = 0.5;     // m/s
    double overhead = 20.0; // s per stop
    // Subtract half a cell diagonal from every sampled radius.
    bool quantization_slack = true;
    unsigned threads = 1;
    std::size_t histogram_bins = 20;
};

struct SequenceStats {
    std::size_t stops = 0;
    double length = 0.0;
    double time = 0.0;
    std::vector<double> stop_success;
    double success = 0.0;
};

struct SimReport {
    std::size_t trials = 0;
    double sigma = 0.0;
    ErrorModel model = ErrorModel::BoundaryWorstCase;
    std::uint64_t seed = 0;
    double speed = 0.0;
    double overhead = 0.0;
    double slack = 0.0;
    SequenceStats planned;
    SequenceStats naive;
    double time_ratio = 0.0; // planned / naive
    // Sampled offset radii of the planned sequence, bins over [0, max(sigma, tiny)].
    std::vector<std::size_t> histogram;
};

double sequence_time(double length, std::size_t stops, double speed, double overhead);

/// Perturbs every stop of both sequences trials times; a stop succeeds when
/// the perturbed position is feasible in the region of each tray it serves.
SimReport evaluate(const PlanResult& planned, const PlanResult& naive, std::span<const BaseRegion> regions,
                   const UncertaintyModel& u, const SimOptions& options = {});

void write_report(std::ostream& out, const SimReport& report);

} // namespace reachplan
