#include <doctest.h>

#include "fixtures.hpp"

#include "reachplan/collision.hpp"
#include "reachplan/error.hpp"

#include <random>

using namespace reachplan;
using Eigen::Vector3d;

TEST_CASE("primitive examples") {
    const Sphere unit{Vector3d::Zero(), 1.0};
    CHECK(shapes_collide(unit, Sphere{Vector3d(1.5, 0, 0), 0.6}));
    CHECK_FALSE(shapes_collide(unit, Sphere{Vector3d(1.5, 0, 0), 0.4}));
    // Touching is a collision.
    CHECK(shapes_collide(unit, Sphere{Vector3d(2.0, 0, 0), 1.0}));

    const Capsule rod{Vector3d(-1, 2, 0), Vector3d(1, 2, 0), 0.5};
    CHECK_FALSE(shapes_collide(unit, rod));
    CHECK(shapes_collide(Sphere{Vector3d::Zero(), 1.5}, rod));

    const Box cube = Box::from_pose(Pose6{}, Vector3d(1, 1, 1));
    CHECK(shapes_collide(cube, Sphere{Vector3d(1.9, 1.9, 0), 1.3}));
    CHECK_FALSE(shapes_collide(cube, Sphere{Vector3d(1.9, 1.9, 0), 1.2}));

    // A corner of the turned box reaches x = 1.6 - 0.707.
    CHECK(shapes_collide(cube, Box::from_pose(Pose6{1.6, 0, 0, 0, 0, kPi / 4}, Vector3d(0.5, 0.5, 0.5))));
    CHECK_FALSE(shapes_collide(cube, Box::from_pose(Pose6{1.6, 0, 0, 0, 0, 0}, Vector3d(0.5, 0.5, 0.5))));

    const Capsule a{Vector3d(0, 0, 0), Vector3d(1, 0, 0), 0.1};
    CHECK(shapes_collide(a, Capsule{Vector3d(0.5, -1, 0.15), Vector3d(0.5, 1, 0.15), 0.1}));
    CHECK_FALSE(shapes_collide(a, Capsule{Vector3d(0.5, -1, 0.25), Vector3d(0.5, 1, 0.25), 0.1}));
}

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(validate_shape(Sphere{Vector3d::Zero(), 0.0}), ContractError);
    CHECK_THROWS_AS(validate_shape(Box::from_pose(Pose6{}, Vector3d(1, -1, 1))), ContractError);
    CHECK_NOTHROW(validate_shape(Capsule{Vector3d::Zero(), Vector3d::Zero(), 0.1}));
}

TEST_CASE("collision is symmetric") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Shape a = oracle::random_shape(rng);
        const Shape b = oracle::random_shape(rng);
        CHECK(shapes_collide(a, b) == shapes_collide(b, a));
    }
}

TEST_CASE("collision agrees with a surface sampling oracle") {
    std::mt19937_64 rng(23);
    int checked = 0;
    int collisions = 0;
    while (checked < 200) {
        const Shape a = oracle::random_shape(rng);
        const Shape b = oracle::random_shape(rng);
        const auto truth = oracle::sampled_contact(a, b);
        if (truth.ambiguous) {
            continue;
        }
        CHECK(shapes_collide(a, b) == truth.collide);
        collisions += truth.collide ? 1 : 0;
        ++checked;
    }
    CHECK(collisions > 10);
    CHECK(collisions < 190);
}

TEST_CASE("inflation only adds collisions") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const Shape a = oracle::random_shape(rng);
        const Shape b = oracle::random_shape(rng);
        if (shapes_collide(a, b)) {
            CHECK(shapes_collide(inflated(a, 0.05), b));
        }
    }
}

TEST_CASE("collision is invariant under a shared rigid motion") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const Shape a = oracle::random_shape(rng);
        const Shape b = oracle::random_shape(rng);
        const Eigen::Isometry3d t = to_transform(Pose6{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
        CHECK(shapes_collide(a, b) == shapes_collide(transformed(a, t), transformed(b, t)));
        CHECK(shapes_collide(a, t, b, t) == shapes_collide(a, b));
    }
}

TEST_CASE("bounding sphere encloses surface samples") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
        const Shape s = oracle::random_shape(rng);
        const auto [c, r] = bounding_sphere(s);
        for (const auto& p : oracle::surface_samples(s, 600).points) {
            CHECK((p - c).norm() <= r + 1e-9);
        }
    }
}

TEST_CASE("robot against the world") {
    fixture::PlanarRig rig;
    const JointConfig straight{{0.0, 0.0}};
    CHECK_FALSE(robot_in_collision(rig.chain, rig.geometry, {}, straight, rig.world));

    rig.world.add("ball", Sphere{Vector3d(0.7, 0, 0), 0.05});
    CHECK(robot_in_collision(rig.chain, rig.geometry, {}, straight, rig.world));
    CHECK_FALSE(robot_in_collision(rig.chain, rig.geometry, {}, straight, rig.world, {"ball"}));
    CHECK_FALSE(robot_in_collision(rig.chain, rig.geometry, {}, JointConfig{{kPi / 2, 0.0}}, rig.world));
    // Moving the base brings the arm clear again.
    CHECK_FALSE(robot_in_collision(rig.chain, rig.geometry, BasePose{0, 0.3, 0}, straight, rig.world));
    // Heading turns the arm back onto the ball.
    CHECK(robot_in_collision(rig.chain, rig.geometry, BasePose{0, 0, -kPi / 2}, JointConfig{{kPi / 2, 0.0}},
                             rig.world));
    // Margin reaches a near miss.
    CHECK_FALSE(robot_in_collision(rig.chain, rig.geometry, BasePose{0, 0.1, 0}, straight, rig.world));
    CHECK(robot_in_collision(rig.chain, rig.geometry, BasePose{0, 0.1, 0}, straight, rig.world, {}, 0.05));
}

TEST_CASE("base against the world") {
    fixture::PlanarRig rig;
    rig.world.add("crate", Box::from_pose(Pose6{0.3, 0, -0.3, 0, 0, 0}, Vector3d(0.1, 0.1, 0.1)));
    CHECK(base_in_collision(rig.geometry, BasePose{0.15, 0, 0}, rig.world));
    CHECK_FALSE(base_in_collision(rig.geometry, BasePose{-0.2, 0, 0}, rig.world));
}

TEST_CASE("self collision uses the listed pairs only") {
    fixture::PlanarRig rig;
    rig.geometry.links[0] = {Sphere{Vector3d::Zero(), 0.2}};
    const JointConfig folded{{0.0, kPi}};
    CHECK(robot_in_collision(rig.chain, rig.geometry, {}, folded, rig.world));
    CHECK_FALSE(robot_in_collision(rig.chain, rig.geometry, {}, JointConfig{{0.0, 0.0}}, rig.world));
    rig.geometry.self_pairs.clear();
    CHECK_FALSE(robot_in_collision(rig.chain, rig.geometry, {}, folded, rig.world));
}

TEST_CASE("geometry validation") {
    fixture::PlanarRig rig;
    CHECK_NOTHROW(rig.geometry.validate(2));
    CHECK_THROWS_AS(rig.geometry.validate(1), ContractError);
    rig.geometry.self_pairs = {{1, 2}};
    CHECK_THROWS_AS(rig.geometry.validate(2), ContractError);
}
