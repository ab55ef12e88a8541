#include <doctest.h>

#include "fixtures.hpp"

#include "reachplan/error.hpp"
#include "reachplan/robustsim.hpp"

#include <cmath>
#include <sstream>

using namespace reachplan;

namespace {

struct FiveDiscs {
    std::vector<BaseRegion> regions = fixture::five_disc_regions();
    PlanResult planned = plan(regions, UncertaintyModel{fixture::kFiveDiscSigma}, {-0.5, -0.5}, {2.6, -0.5});
    PlanResult naive = naive_plan(regions, {-0.5, -0.5}, {2.6, -0.5});
};

const FiveDiscs& five_discs() {
    static const FiveDiscs f;
    return f;
}

std::string report_text(const SimReport& r) {
    std::ostringstream out;
    write_report(out, r);
    return out.str();
}

double mean_radius(ErrorModel m, double sigma, std::size_t n) {
    CounterRng rng(5, 0);
    const UncertaintyModel u{sigma, m, 5};
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto o = sample_offset(u, rng);
        sum += std::hypot(o.dx, o.dy);
    }
    return sum / static_cast<double>(n);
}

} // namespace

TEST_CASE("counter generator is a pure function of its position") {
    CounterRng a(9, 3), b(9, 3), c(9, 4);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
    }
    CounterRng u(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("offset samplers") {
    CounterRng rng(3, 0);
    for (auto m : {ErrorModel::UniformDisk, ErrorModel::GaussianRadial, ErrorModel::BoundaryWorstCase}) {
        const auto o = sample_offset(UncertaintyModel{0.0, m, 0}, rng);
        CHECK(o.dx == 0.0);
        CHECK(o.dy == 0.0);
    }
    for (int i = 0; i < 1000; ++i) {
        const auto o = sample_offset(UncertaintyModel{0.1, ErrorModel::BoundaryWorstCase, 0}, rng);
        CHECK(std::abs(std::hypot(o.dx, o.dy) - 0.1) < 1e-12);
        const auto s = sample_offset(UncertaintyModel{0.1, ErrorModel::BoundaryWorstCase, 0}, rng, 0.03);
        CHECK(std::abs(std::hypot(s.dx, s.dy) - 0.07) < 1e-12);
        const auto d = sample_offset(UncertaintyModel{0.1, ErrorModel::UniformDisk, 0}, rng);
        CHECK(std::hypot(d.dx, d.dy) <= 0.1);
    }
    CHECK(mean_radius(ErrorModel::UniformDisk, 0.3, 100000) == doctest::Approx(0.2).epsilon(0.01));
    CHECK(mean_radius(ErrorModel::GaussianRadial, 0.3, 100000) ==
          doctest::Approx(0.3 * std::sqrt(kPi) / 2).epsilon(0.01));
}

TEST_CASE("time model") {
    CHECK(sequence_time(10.0, 2, 0.5, 20.0) == doctest::Approx(60.0));
    CHECK(sequence_time(0.0, 0, 0.5, 20.0) == 0.0);
}

TEST_CASE("plans whose radii exceed sigma never fail at the boundary") {
    const auto& f = five_discs();
    const auto r = evaluate(f.planned, f.naive, f.regions, UncertaintyModel{fixture::kFiveDiscSigma});
    CHECK(r.trials == 10000);
    CHECK(r.planned.success == 1.0);
    CHECK(r.naive.success == 1.0);
    CHECK(r.planned.stops == 3);
    CHECK(r.naive.stops == 5);
    CHECK(r.time_ratio < 1.0);
    CHECK(r.slack == doctest::Approx(0.02 * std::sqrt(2.0) / 2));
    std::size_t hist = 0;
    for (auto h : r.histogram) {
        hist += h;
    }
    CHECK(hist == 10000 * 3);
}

TEST_CASE("zero sigma always succeeds") {
    const auto& f = five_discs();
    SimOptions o;
    o.trials = 500;
    for (auto m : {ErrorModel::UniformDisk, ErrorModel::GaussianRadial, ErrorModel::BoundaryWorstCase}) {
        const auto r = evaluate(f.planned, f.naive, f.regions, UncertaintyModel{0.0, m, 1}, o);
        CHECK(r.planned.success == 1.0);
        CHECK(r.planned.stops <= r.naive.stops);
    }
}

TEST_CASE("success rates are bounded and fall with sigma") {
    const auto& f = five_discs();
    SimOptions o;
    o.trials = 10000;
    double prev = 1.0;
    for (double s = 0.0; s <= 0.3001; s += 0.03) {
        const auto r = evaluate(f.planned, f.naive, f.regions, UncertaintyModel{s, ErrorModel::UniformDisk, 4}, o);
        const double p = r.planned.success;
        double min_stop = 1.0;
        for (double v : r.planned.stop_success) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            min_stop = std::min(min_stop, v);
        }
        CHECK(p <= min_stop);
        const double se = std::sqrt(std::max(prev * (1 - prev), 1e-4) / 10000.0);
        CHECK(p <= prev + 3 * se);
        prev = p;
    }
    CHECK(prev < 0.5);
}

TEST_CASE("naive sequence succeeds below every region radius") {
    const auto& f = five_discs();
    double smallest = 1e9;
    for (const auto& r : f.regions) {
        smallest = std::min(smallest, inscribed_circle(r.mask, r.grid).radius);
    }
    SimOptions o;
    o.trials = 5000;
    const auto r = evaluate(f.planned, f.naive, f.regions,
                            UncertaintyModel{smallest, ErrorModel::BoundaryWorstCase, 2}, o);
    CHECK(r.naive.success == 1.0);
}

TEST_CASE("reports are reproducible and thread independent") {
    const auto& f = five_discs();
    SimOptions one;
    one.trials = 3000;
    SimOptions four = one;
    four.threads = 4;
    const UncertaintyModel u{0.15, ErrorModel::GaussianRadial, 77};
    const auto a = report_text(evaluate(f.planned, f.naive, f.regions, u, one));
    CHECK(a == report_text(evaluate(f.planned, f.naive, f.regions, u, one)));
    CHECK(a == report_text(evaluate(f.planned, f.naive, f.regions, u, four)));
    CHECK(a.rfind("simreport v1\n", 0) == 0);
    const UncertaintyModel other{0.15, ErrorModel::GaussianRadial, 78};
    CHECK(a != report_text(evaluate(f.planned, f.naive, f.regions, other, one)));
}
