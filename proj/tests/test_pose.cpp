#include <doctest.h>

#include "reachplan/pose.hpp"

#include <cmath>
#include <random>

using namespace reachplan;

TEST_CASE("wrap_angle lands in [-pi, pi)") {
    CHECK(wrap_angle(kPi) == doctest::Approx(-kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(-kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(wrap_angle(0.25) == 0.25);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(u(rng));
        CHECK(w >= -kPi);
        CHECK(w < kPi);
    }
}

TEST_CASE("canonicalize keeps the rotation and bounds pitch") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(-3 * kPi, 3 * kPi);
    for (int i = 0; i < 500; ++i) {
        const Pose6 p{0.1, 0.2, 0.3, a(rng), a(rng), a(rng)};
        const Pose6 c = canonicalize(p);
        CHECK(c.pitch >= -kPi / 2 - 1e-12);
        CHECK(c.pitch <= kPi / 2 + 1e-12);
        CHECK(c.roll >= -kPi);
        CHECK(c.roll < kPi);
        CHECK(c.yaw >= -kPi);
        CHECK(c.yaw < kPi);
        const Eigen::Matrix3d d = rpy_matrix(p.roll, p.pitch, p.yaw) - rpy_matrix(c.roll, c.pitch, c.yaw);
        CHECK(d.norm() < 1e-9);
    }
}

TEST_CASE("pitch beyond pi/2 uses the equivalent representation") {
    const Pose6 c = canonicalize(Pose6{0, 0, 0, 0.1, 2.0, 0.2});
    CHECK(c.pitch == doctest::Approx(kPi - 2.0));
    CHECK(c.roll == doctest::Approx(wrap_angle(0.1 + kPi)));
    CHECK(c.yaw == doctest::Approx(wrap_angle(0.2 + kPi)));
}

TEST_CASE("near-gimbal poses are flagged") {
    CHECK(canonicalize(Pose6{0, 0, 0, 0, kPi / 2, 0}).near_gimbal);
    CHECK_FALSE(canonicalize(Pose6{0, 0, 0, 0, 0.5, 0}).near_gimbal);
}

TEST_CASE("transform round trip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> a(-kPi, kPi);
    for (int i = 0; i < 500; ++i) {
        const Pose6 p = canonicalize(Pose6{a(rng), a(rng), a(rng), a(rng), 0.45 * a(rng), a(rng)});
        const Pose6 q = from_transform(to_transform(p));
        const auto d = pose_delta(p, q);
        for (double v : d) {
            CHECK(std::abs(v) < 1e-9);
        }
    }
}

TEST_CASE("pose metric wraps angles and honours the mask") {
    const Pose6 a{0, 0, 0, 0, 0, kPi - 0.01};
    const Pose6 b{0, 0, 0, 0, 0, -kPi + 0.01};
    CHECK(pose_distance(a, b) == doctest::Approx(0.02));
    CHECK(pose_distance(a, b, PoseMask::yaw_free()) == 0.0);
    const Pose6 c{3, 4, 0, 0, 0, 0};
    CHECK(pose_distance(Pose6{}, c, PoseMask::position_only()) == doctest::Approx(5.0));
    CHECK(pose_distance(Pose6{}, Pose6{0, 0, 0, 0.3, 0, 0}, PoseMask{}, 2.0) == doctest::Approx(0.6));
}
