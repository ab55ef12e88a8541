#include "reachplan/collision.hpp"

#include "reachplan/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace reachplan {

namespace {

using Vec3 = Eigen::Vector3d;

double point_segment_dist2(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (a + t * ab - p).squaredNorm();
}

// Closest points between segments p1q1 and p2q2 (Ericson, Real-Time Collision Detection 5.1.9).
double segment_segment_dist2(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
    constexpr double eps = 1e-15;
    const Vec3 d1 = q1 - p1;
    const Vec3 d2 = q2 - p2;
    const Vec3 r = p1 - p2;
    const double a = d1.squaredNorm();
    const double e = d2.squaredNorm();
    const double f = d2.dot(r);
    double s = 0.0;
    double t = 0.0;
    if (a <= eps && e <= eps) {
        return r.squaredNorm();
    }
    if (a <= eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return ((p1 + d1 * s) - (p2 + d2 * t)).squaredNorm();
}

double point_box_dist2(const Vec3& p, const Box& box) {
    const Vec3 local = box.rotation.transpose() * (p - box.center);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double v = local[k];
        const double h = box.half_extents[k];
        const double excess = v - std::clamp(v, -h, h);
        sum += excess * excess;
    }
    return sum;
}

// Exact segment-to-box distance: the squared distance along the segment is a
// convex piecewise quadratic whose pieces change where a coordinate crosses a slab face.
double segment_box_dist2(const Vec3& p, const Vec3& q, const Box& box) {
    const Vec3 a = box.rotation.transpose() * (p - box.center);
    const Vec3 d = box.rotation.transpose() * (q - p);
    const Vec3& h = box.half_extents;

    auto f = [&](double t) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double v = a[k] + t * d[k];
            const double excess = v - std::clamp(v, -h[k], h[k]);
            sum += excess * excess;
        }
        return sum;
    };

    std::array<double, 8> breaks{};
    std::size_t nb = 0;
    breaks[nb++] = 0.0;
    breaks[nb++] = 1.0;
    for (int k = 0; k < 3; ++k) {
        if (d[k] == 0.0) {
            continue;
        }
        for (double face : {-h[k], h[k]}) {
            const double t = (face - a[k]) / d[k];
            if (t > 0.0 && t < 1.0) {
                breaks[nb++] = t;
            }
        }
    }
    std::sort(breaks.begin(), breaks.begin() + static_cast<std::ptrdiff_t>(nb));

    double best = std::min(f(0.0), f(1.0));
    for (std::size_t i = 0; i + 1 < nb; ++i) {
        const double t0 = breaks[i];
        const double t1 = breaks[i + 1];
        if (t1 <= t0) {
            continue;
        }
        const double tm = 0.5 * (t0 + t1);
        double qa = 0.0;
        double qb = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double v = a[k] + tm * d[k];
            if (v > h[k] || v < -h[k]) {
                const double s = v > h[k] ? h[k] : -h[k];
                qa += d[k] * d[k];
                qb += 2.0 * d[k] * (a[k] - s);
            }
        }
        double t = qa > 0.0 ? std::clamp(-qb / (2.0 * qa), t0, t1) : t0;
        best = std::min({best, f(t), f(t0), f(t1)});
    }
    return best;
}

// Separating-axis test for oriented boxes (Ericson 4.4.1); touching overlaps.
bool boxes_overlap(const Box& a, const Box& b) {
    constexpr double eps = 1e-12;
    Eigen::Matrix3d r = a.rotation.transpose() * b.rotation;
    Eigen::Matrix3d abs_r = r.cwiseAbs().array() + eps;
    const Vec3 t = a.rotation.transpose() * (b.center - a.center);
    const Vec3& ea = a.half_extents;
    const Vec3& eb = b.half_extents;

    for (int i = 0; i < 3; ++i) {
        const double ra = ea[i];
        const double rb = eb[0] * std::abs(r(i, 0)) + eb[1] * std::abs(r(i, 1)) + eb[2] * std::abs(r(i, 2));
        if (std::abs(t[i]) > ra + rb) {
            return false;
        }
    }
    for (int j = 0; j < 3; ++j) {
        const double ra = ea[0] * std::abs(r(0, j)) + ea[1] * std::abs(r(1, j)) + ea[2] * std::abs(r(2, j));
        const double rb = eb[j];
        if (std::abs(t[0] * r(0, j) + t[1] * r(1, j) + t[2] * r(2, j)) > ra + rb) {
            return false;
        }
    }
    // Edge-edge axes. The epsilon in abs_r keeps near-parallel edges from
    // producing spurious separations.
    for (int i = 0; i < 3; ++i) {
        const int i1 = (i + 1) % 3;
        const int i2 = (i + 2) % 3;
        for (int j = 0; j < 3; ++j) {
            const int j1 = (j + 1) % 3;
            const int j2 = (j + 2) % 3;
            const double ra = ea[i1] * abs_r(i2, j) + ea[i2] * abs_r(i1, j);
            const double rb = eb[j1] * abs_r(i, j2) + eb[j2] * abs_r(i, j1);
            const double dist = std::abs(t[i2] * r(i1, j) - t[i1] * r(i2, j));
            if (dist > ra + rb) {
                return false;
            }
        }
    }
    return true;
}

bool collide(const Sphere& a, const Sphere& b) {
    const double r = a.radius + b.radius;
    return (a.center - b.center).squaredNorm() <= r * r;
}
bool collide(const Sphere& a, const Capsule& b) {
    const double r = a.radius + b.radius;
    return point_segment_dist2(a.center, b.p0, b.p1) <= r * r;
}
bool collide(const Sphere& a, const Box& b) { return point_box_dist2(a.center, b) <= a.radius * a.radius; }
bool collide(const Capsule& a, const Capsule& b) {
    const double r = a.radius + b.radius;
    return segment_segment_dist2(a.p0, a.p1, b.p0, b.p1) <= r * r;
}
bool collide(const Capsule& a, const Box& b) { return segment_box_dist2(a.p0, a.p1, b) <= a.radius * a.radius; }
bool collide(const Box& a, const Box& b) { return boxes_overlap(a, b); }

template <typename A, typename B>
bool dispatch(const A& a, const B& b) {
    if constexpr (requires { collide(a, b); }) {
        return collide(a, b);
    } else {
        return collide(b, a);
    }
}

} // namespace

Box Box::from_pose(const Pose6& pose, const Eigen::Vector3d& half_extents) {
    Box b;
    b.center = Eigen::Vector3d(pose.x, pose.y, pose.z);
    b.rotation = rpy_matrix(pose.roll, pose.pitch, pose.yaw);
    b.half_extents = half_extents;
    return b;
}

void validate_shape(const Shape& s) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Box>) {
                if (!(v.half_extents.minCoeff() > 0.0)) {
                    throw ContractError("box half extents must be positive");
                }
            } else {
                if (!(v.radius > 0.0)) {
                    throw ContractError("shape radius must be positive");
                }
            }
        },
        s);
}

Shape transformed(const Shape& s, const Eigen::Isometry3d& t) {
    return std::visit(
        [&](const auto& v) -> Shape {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                return Sphere{t * v.center, v.radius};
            } else if constexpr (std::is_same_v<T, Capsule>) {
                return Capsule{t * v.p0, t * v.p1, v.radius};
            } else {
                Box b = v;
                b.center = t * v.center;
                b.rotation = t.linear() * v.rotation;
                return b;
            }
        },
        s);
}

Shape inflated(const Shape& s, double margin) {
    if (margin == 0.0) {
        return s;
    }
    return std::visit(
        [&](auto v) -> Shape {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Box>) {
                v.half_extents.array() += margin;
            } else {
                v.radius += margin;
            }
            return v;
        },
        s);
}

bool shapes_collide(const Shape& a, const Shape& b) {
    return std::visit([](const auto& x, const auto& y) { return dispatch(x, y); }, a, b);
}

bool shapes_collide(const Shape& a, const Eigen::Isometry3d& pose_a, const Shape& b,
                    const Eigen::Isometry3d& pose_b) {
    return shapes_collide(transformed(a, pose_a), transformed(b, pose_b));
}

std::pair<Eigen::Vector3d, double> bounding_sphere(const Shape& s) {
    return std::visit(
        [](const auto& v) -> std::pair<Eigen::Vector3d, double> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sphere>) {
                return {v.center, v.radius};
            } else if constexpr (std::is_same_v<T, Capsule>) {
                return {0.5 * (v.p0 + v.p1), 0.5 * (v.p1 - v.p0).norm() + v.radius};
            } else {
                return {v.center, v.half_extents.norm()};
            }
        },
        s);
}

void RobotGeometry::validate(std::size_t dof) const {
    if (links.size() > dof + 1) {
        throw ContractError("robot geometry lists more links than the chain has");
    }
    for (const auto& link : links) {
        for (const auto& s : link) {
            validate_shape(s);
        }
    }
    for (const auto& [i, j] : self_pairs) {
        if (i > dof || j > dof) {
            throw ContractError("self-collision pair references an unknown link");
        }
        if ((i > j ? i - j : j - i) <= 1) {
            throw ContractError("self-collision pairs must not include adjacent links");
        }
    }
}

void World::add(const std::string& group, const Shape& shape, const Pose6& pose) {
    validate_shape(shape);
    shapes.push_back(WorldShape{group, transformed(shape, to_transform(pose))});
}

Eigen::Isometry3d BasePose::transform() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = Eigen::AngleAxisd(heading, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    t.translation() = Eigen::Vector3d(x, y, 0.0);
    return t;
}

namespace {

struct Placed {
    Shape shape;
    Eigen::Vector3d center;
    double radius;
};

Placed place(const Shape& s, const Eigen::Isometry3d& t, double margin) {
    Shape world = inflated(transformed(s, t), margin);
    auto [c, r] = bounding_sphere(world);
    return Placed{std::move(world), c, r};
}

bool collide_placed(const Placed& a, const Shape& b, const Eigen::Vector3d& bc, double br) {
    const double r = a.radius + br;
    if ((a.center - bc).squaredNorm() > r * r) {
        return false;
    }
    return shapes_collide(a.shape, b);
}

bool hits_world(const std::vector<Placed>& shapes, const World& world, const std::set<std::string>& ignore) {
    for (const auto& ws : world.shapes) {
        if (!ignore.empty() && ignore.count(ws.group) != 0) {
            continue;
        }
        const auto [wc, wr] = bounding_sphere(ws.shape);
        for (const auto& p : shapes) {
            if (collide_placed(p, ws.shape, wc, wr)) {
                return true;
            }
        }
    }
    return false;
}

} // namespace

bool base_in_collision(const RobotGeometry& geometry, const BasePose& base, const World& world, double margin) {
    if (geometry.links.empty()) {
        return false;
    }
    const Eigen::Isometry3d tb = base.transform();
    std::vector<Placed> placed;
    for (const auto& s : geometry.links[0]) {
        placed.push_back(place(s, tb, margin));
    }
    return hits_world(placed, world, {});
}

bool robot_in_collision(const KinematicChain& chain, const RobotGeometry& geometry, const BasePose& base,
                        const JointConfig& config, const World& world, const std::set<std::string>& ignore,
                        double margin) {
    const Eigen::Isometry3d tb = base.transform();
    const auto frames = joint_frames(chain, config);
    std::vector<std::vector<Placed>> links(geometry.links.size());
    std::vector<Placed> all;
    for (std::size_t i = 0; i < geometry.links.size(); ++i) {
        const Eigen::Isometry3d t = tb * frames[i];
        for (const auto& s : geometry.links[i]) {
            links[i].push_back(place(s, t, margin));
            all.push_back(links[i].back());
        }
    }
    for (const auto& [i, j] : geometry.self_pairs) {
        if (i >= links.size() || j >= links.size()) {
            continue;
        }
        for (const auto& a : links[i]) {
            for (const auto& b : links[j]) {
                if (collide_placed(a, b.shape, b.center, b.radius)) {
                    return true;
                }
            }
        }
    }
    return hits_world(all, world, ignore);
}

} // namespace reachplan
