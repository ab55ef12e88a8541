#include "reachplan/robustsim.hpp"

#include "reachplan/error.hpp"
#include "reachplan/text.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

namespace reachplan {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t CounterRng::next() {
    const std::uint64_t k = splitmix64(splitmix64(seed_) ^ stream_);
    return splitmix64(k ^ splitmix64(counter_++));
}

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Offset sample_offset(const UncertaintyModel& u, CounterRng& rng, double slack) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    if (u.sigma == 0.0) {
        return {};
    }
    const double theta = kTwoPi * b;
    double r = 0.0;
    switch (u.model) {
    case ErrorModel::UniformDisk:
        r = u.sigma * std::sqrt(a);
        break;
    case ErrorModel::GaussianRadial:
        // Rayleigh radius of an isotropic normal with sigma/sqrt(2) per axis.
        r = u.sigma * std::sqrt(-std::log(1.0 - a));
        break;
    case ErrorModel::BoundaryWorstCase:
        r = u.sigma;
        break;
    }
    r = std::max(0.0, r - slack);
    return {r * std::cos(theta), r * std::sin(theta)};
}

double sequence_time(double length, std::size_t stops, double speed, double overhead) {
    return length / speed + static_cast<double>(stops) * overhead;
}

namespace {

struct Tally {
    std::vector<std::size_t> stop_ok;
    std::size_t all_ok = 0;
    std::vector<std::size_t> histogram;
};

void run_trials(const PlanResult& plan, std::span<const BaseRegion> regions, const UncertaintyModel& u,
                double slack, std::uint64_t stream, std::size_t first, std::size_t last, std::size_t bins,
                Tally& tally) {
    tally.stop_ok.assign(plan.stops.size(), 0);
    tally.histogram.assign(bins, 0);
    const double top = u.sigma > 0.0 ? u.sigma : 1.0;
    for (std::size_t t = first; t < last; ++t) {
        CounterRng rng(u.seed, 2 * t + stream);
        bool all = true;
        for (std::size_t k = 0; k < plan.stops.size(); ++k) {
            const auto off = sample_offset(u, rng, slack);
            if (bins > 0) {
                const double r = std::hypot(off.dx, off.dy);
                const auto bin = static_cast<std::size_t>(r / top * static_cast<double>(bins));
                ++tally.histogram[std::min(bin, bins - 1)];
            }
            const Point2 p{plan.stops[k].center.x + off.dx, plan.stops[k].center.y + off.dy};
            bool ok = true;
            for (auto tray : plan.stops[k].serves) {
                ok = ok && feasible_at(regions[tray].mask, regions[tray].grid, p);
            }
            if (ok) {
                ++tally.stop_ok[k];
            }
            all = all && ok;
        }
        if (all) {
            ++tally.all_ok;
        }
    }
}

SequenceStats simulate_sequence(const PlanResult& plan, std::span<const BaseRegion> regions,
                                const UncertaintyModel& u, const SimOptions& options, double slack,
                                std::uint64_t stream, std::vector<std::size_t>* histogram) {
    for (const auto& stop : plan.stops) {
        for (auto tray : stop.serves) {
            if (tray >= regions.size()) {
                throw ContractError("plan serves a tray without a region");
            }
        }
    }
    const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(options.trials, 1));
    std::vector<Tally> tallies(workers);
    const std::size_t bins = histogram ? options.histogram_bins : 0;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t first = options.trials * w / workers;
            const std::size_t last = options.trials * (w + 1) / workers;
            pool.emplace_back([&, w, first, last] {
                run_trials(plan, regions, u, slack, stream, first, last, bins, tallies[w]);
            });
        }
    }
    SequenceStats stats;
    stats.stops = plan.stops.size();
    stats.length = plan.length;
    stats.time = sequence_time(plan.length, stats.stops, options.speed, options.overhead);
    std::vector<std::size_t> ok(plan.stops.size(), 0);
    std::size_t all = 0;
    if (histogram) {
        histogram->assign(bins, 0);
    }
    for (const auto& t : tallies) {
        for (std::size_t k = 0; k < ok.size(); ++k) {
            ok[k] += t.stop_ok[k];
        }
        all += t.all_ok;
        if (histogram) {
            for (std::size_t b = 0; b < bins; ++b) {
                (*histogram)[b] += t.histogram[b];
            }
        }
    }
    const double n = static_cast<double>(std::max<std::size_t>(options.trials, 1));
    for (auto c : ok) {
        stats.stop_success.push_back(options.trials ? static_cast<double>(c) / n : 1.0);
    }
    stats.success = options.trials ? static_cast<double>(all) / n : 1.0;
    return stats;
}

} // namespace

SimReport evaluate(const PlanResult& planned, const PlanResult& naive, std::span<const BaseRegion> regions,
                   const UncertaintyModel& u, const SimOptions& options) {
    u.validate();
    if (!(options.speed > 0.0) || !(options.overhead >= 0.0)) {
        throw ContractError("speed must be positive and overhead non-negative");
    }
    if (regions.empty()) {
        throw ContractError("simulation needs the tray regions");
    }
    SimReport report;
    report.trials = options.trials;
    report.sigma = u.sigma;
    report.model = u.model;
    report.seed = u.seed;
    report.speed = options.speed;
    report.overhead = options.overhead;
    report.slack = options.quantization_slack ? regions.front().grid.cell * std::sqrt(2.0) / 2.0 : 0.0;
    report.planned = simulate_sequence(planned, regions, u, options, report.slack, 0, &report.histogram);
    report.naive = simulate_sequence(naive, regions, u, options, report.slack, 1, nullptr);
    report.time_ratio = report.naive.time > 0.0 ? report.planned.time / report.naive.time : 0.0;
    return report;
}

namespace {

void write_stats(std::ostream& out, const char* name, const SequenceStats& s) {
    out << name << " stops " << s.stops << '\n';
    out << name << " length " << format_number(s.length) << '\n';
    out << name << " time " << format_number(s.time) << '\n';
    out << name << " success " << format_number(s.success) << '\n';
    for (std::size_t k = 0; k < s.stop_success.size(); ++k) {
        out << name << " stop " << k << " success " << format_number(s.stop_success[k]) << '\n';
    }
}

} // namespace

void write_report(std::ostream& out, const SimReport& report) {
    out << "simreport v1\n";
    out << "trials " << report.trials << '\n';
    out << "sigma " << format_number(report.sigma) << '\n';
    out << "model " << to_string(report.model) << '\n';
    out << "seed " << report.seed << '\n';
    out << "speed " << format_number(report.speed) << '\n';
    out << "overhead " << format_number(report.overhead) << '\n';
    out << "slack " << format_number(report.slack) << '\n';
    write_stats(out, "planned", report.planned);
    write_stats(out, "naive", report.naive);
    out << "time_ratio " << format_number(report.time_ratio) << '\n';
    out << "histogram";
    for (auto h : report.histogram) {
        out << ' ' << h;
    }
    out << '\n';
}

} // namespace reachplan
