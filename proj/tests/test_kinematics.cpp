#include <doctest.h>

#include "fixtures.hpp"

#include "reachplan/error.hpp"
#include "reachplan/kinematics.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace reachplan;

TEST_CASE("planar forward kinematics examples") {
    const auto chain = make_planar_chain({1.0, 1.0});
    const Pose6 a = forward_kinematics(chain, JointConfig{{0, 0}});
    CHECK(a.x == doctest::Approx(2.0));
    CHECK(std::abs(a.y) < 1e-12);
    CHECK(std::abs(a.yaw) < 1e-12);

    const Pose6 b = forward_kinematics(chain, JointConfig{{kPi / 2, 0}});
    CHECK(std::abs(b.x) < 1e-12);
    CHECK(b.y == doctest::Approx(2.0));
    CHECK(b.yaw == doctest::Approx(kPi / 2));

    // Two planar rotations composed by hand.
    const Pose6 c = forward_kinematics(chain, JointConfig{{kPi / 4, kPi / 2}});
    const double x = std::cos(kPi / 4) + std::cos(3 * kPi / 4);
    const double y = std::sin(kPi / 4) + std::sin(3 * kPi / 4);
    CHECK(c.x == doctest::Approx(x).epsilon(1e-12));
    CHECK(c.y == doctest::Approx(y));
    CHECK(c.y == doctest::Approx(std::sqrt(2.0)));
    CHECK(c.yaw == doctest::Approx(3 * kPi / 4));
}

TEST_CASE("forward kinematics rejects a wrong dimension") {
    const auto chain = make_planar_chain({1.0, 1.0});
    CHECK_THROWS_AS(forward_kinematics(chain, JointConfig{{0.0}}), ContractError);
    CHECK_THROWS_AS(jacobian(chain, JointConfig{{0.0, 0.0, 0.0}}), ContractError);
}

TEST_CASE("chain validation") {
    KinematicChain empty;
    CHECK_THROWS_AS(empty.validate(), ContractError);
    auto bad = make_planar_chain({1.0});
    bad.joints[0].limit_lo = 1.0;
    bad.joints[0].limit_hi = 0.5;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad.joints[0].limit_lo = -7.0;
    bad.joints[0].limit_hi = 0.5;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("jacobian examples") {
    const auto one = make_planar_chain({1.0});
    const Jacobian j1 = jacobian(one, JointConfig{{0.0}});
    Eigen::Matrix<double, 6, 1> expect;
    expect << 0, 1, 0, 0, 0, 1;
    CHECK((j1.col(0) - expect).norm() < 1e-12);

    const auto two = make_planar_chain({1.0, 1.0});
    const Jacobian j2 = jacobian(two, JointConfig{{0.0, 0.0}});
    CHECK((j2.block<3, 1>(0, 1) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
    const auto fd = oracle::fd_jacobian(two, JointConfig{{0.0, 0.0}});
    CHECK((fd.block<3, 1>(0, 1) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-6);
}

TEST_CASE("jacobian matches central finite differences on 200 random chains") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> dof(1, 7);
    for (int k = 0; k < 200; ++k) {
        const auto chain = fixture::random_chain(rng, dof(rng));
        const auto q = fixture::random_config(rng, chain.dof());
        const Jacobian j = jacobian(chain, q);
        const auto fd = oracle::fd_jacobian(chain, q);
        CHECK((j.topRows<3>() - fd.topRows<3>()).cwiseAbs().maxCoeff() <= 1e-5);
        CHECK((j.bottomRows<3>() - fd.bottomRows<3>()).cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("manipulability examples") {
    const auto chain = make_planar_chain({1.0, 1.0});
    for (double t1 : {-2.0, 0.0, 1.3}) {
        CHECK(manipulability(chain, JointConfig{{t1, 0.0}}) < 1e-9);
    }
    const JointConfig q{{0.0, kPi / 2}};
    const double w = manipulability(chain, q);
    CHECK(w == doctest::Approx(1.0).epsilon(1e-6));
    const Eigen::Matrix2d jp = jacobian(chain, q).topRows<2>();
    CHECK(w == doctest::Approx(std::sqrt((jp * jp.transpose()).determinant())).epsilon(1e-9));
    CHECK(manipulability(chain, JointConfig{{0.4, kPi / 2}}) > 0.5);
}

TEST_CASE("manipulability matches the singular values of J") {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 50; ++k) {
        const auto chain = fixture::random_chain(rng, 3);
        const auto q = fixture::random_config(rng, 3);
        const Eigen::MatrixXd jpos = jacobian(chain, q).topRows<3>();
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jpos);
        const double expect = svd.singularValues().prod();
        CHECK(std::abs(manipulability(chain, q) - expect) <= 1e-8);
        CHECK(manipulability(chain, q) >= 0.0);
    }
}

TEST_CASE("planar two-link IK examples") {
    const auto edge = planar_two_link_ik(1, 1, 2, 0);
    REQUIRE(edge.solutions.size() == 1);
    CHECK(std::abs(edge.solutions[0][0]) < 1e-12);
    CHECK(std::abs(edge.solutions[0][1]) < 1e-12);

    CHECK(planar_two_link_ik(1, 1, 0, 0).degenerate);
    CHECK(planar_two_link_ik(1, 1, 3, 0).solutions.empty());

    const auto both = planar_two_link_ik(1, 1, 1, 1);
    REQUIRE(both.solutions.size() == 2);
    const auto chain = make_planar_chain({1.0, 1.0});
    std::vector<double> t1;
    for (const auto& s : both.solutions) {
        CHECK(std::abs(std::abs(s[1]) - kPi / 2) < 1e-12);
        t1.push_back(s[0]);
        const Pose6 p = forward_kinematics(chain, JointConfig{{s[0], s[1]}});
        CHECK(std::hypot(p.x - 1, p.y - 1) < 1e-9);
    }
    std::sort(t1.begin(), t1.end());
    CHECK(std::abs(t1[0]) < 1e-12);
    CHECK(t1[1] == doctest::Approx(kPi / 2));
}

TEST_CASE("planar two-link IK is complete on random targets") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> rad(0.35, 1.65), ang(-kPi, kPi);
    const double l1 = 1.0, l2 = 0.7;
    const auto chain = make_planar_chain({l1, l2});
    for (int k = 0; k < 1000; ++k) {
        const double r = rad(rng), a = ang(rng);
        const double x = r * std::cos(a), y = r * std::sin(a);
        const auto res = planar_two_link_ik(l1, l2, x, y);
        REQUIRE(res.solutions.size() == 2);
        for (const auto& s : res.solutions) {
            const Pose6 p = forward_kinematics(chain, JointConfig{{s[0], s[1]}});
            CHECK(std::hypot(p.x - x, p.y - y) < 1e-9);
        }
        if (k % 50 == 0) {
            // Dense theta2 sweep: every solution lies near one returned branch.
            for (double t2 = -kPi; t2 < kPi; t2 += 1e-3) {
                const double reach = std::sqrt(l1 * l1 + l2 * l2 + 2 * l1 * l2 * std::cos(t2));
                if (std::abs(reach - r) < 1e-4) {
                    const double gap = std::min(oracle::wrapped_gap(t2, res.solutions[0][1]),
                                                oracle::wrapped_gap(t2, res.solutions[1][1]));
                    CHECK(gap < 0.05);
                }
            }
        }
    }
}

TEST_CASE("refine_ik recovers an analytic branch from a nearby seed") {
    const double l1 = 1.0, l2 = 0.8;
    const auto chain = make_planar_chain({l1, l2});
    const Pose6 target{1.2, 0.5, 0, 0, 0, 0};
    IkOptions opt;
    opt.mask = PoseMask::yaw_free();
    const auto branches = oracle::planar_branches(l1, l2, 1.2, 0.5);
    JointConfig seed{{branches[0][0] + 0.05, branches[0][1] - 0.04}};
    const auto sol = refine_ik(chain, seed, target, opt);
    REQUIRE(sol.has_value());
    CHECK(sol->error <= opt.tol);
    CHECK(pose_distance(forward_kinematics(chain, sol->config), target, opt.mask) <= opt.tol);
    CHECK(within_limits(chain, sol->config));
    bool matched = false;
    for (const auto& b : branches) {
        matched = matched || (oracle::wrapped_gap(sol->config[0], b[0]) < 1e-6 &&
                              oracle::wrapped_gap(sol->config[1], b[1]) < 1e-6);
    }
    CHECK(matched);
}

TEST_CASE("refine_ik fixed point and unreachable target") {
    const auto chain = make_planar_chain({1.0, 0.8});
    const JointConfig q{{0.3, 1.1}};
    IkOptions opt;
    const auto exact = refine_ik(chain, q, forward_kinematics(chain, q), opt);
    REQUIRE(exact.has_value());
    CHECK(exact->iterations <= 1);
    CHECK(exact->error <= opt.tol);
    CHECK(oracle::wrapped_gap(exact->config[0], 0.3) < 1e-9);

    opt.mask = PoseMask::yaw_free();
    opt.max_iter = 100;
    CHECK_FALSE(refine_ik(chain, q, Pose6{2.5, 0, 0, 0, 0, 0}, opt).has_value());
}

TEST_CASE("refine_ik success is always sound on a spatial chain") {
    std::mt19937_64 rng(14);
    for (int k = 0; k < 40; ++k) {
        const auto chain = fixture::random_chain(rng, 6);
        const auto q = fixture::random_config(rng, 6);
        const Pose6 target = forward_kinematics(chain, q);
        JointConfig seed = q;
        for (auto& a : seed.angles) {
            a += 0.05;
        }
        IkOptions opt;
        opt.tol = 1e-8;
        if (const auto sol = refine_ik(chain, seed, target, opt)) {
            CHECK(pose_distance(forward_kinematics(chain, sol->config), target) <= opt.tol);
            CHECK(within_limits(chain, sol->config));
        }
    }
}
