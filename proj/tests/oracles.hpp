#pragma once

// Independent reference implementations used to check the library.

#include "reachplan/collision.hpp"
#include "reachplan/grid.hpp"
#include "reachplan/kinematics.hpp"
#include "reachplan/sequencer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using namespace reachplan;

// ---- grids -------------------------------------------------------------

inline Mask disk_mask(const BaseGridSpec& g, double cx, double cy, double r) {
    Mask m(g.width, g.height);
    for (int row = 0; row < g.height; ++row) {
        for (int col = 0; col < g.width; ++col) {
            const double x = g.x0 + (col + 0.5) * g.cell;
            const double y = g.y0 + (row + 0.5) * g.cell;
            m.set(row, col, std::hypot(x - cx, y - cy) <= r);
        }
    }
    return m;
}

inline Mask random_mask(std::mt19937_64& rng, int w, int h, double fill) {
    std::bernoulli_distribution b(fill);
    Mask m(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            m.set(r, c, b(rng));
        }
    }
    return m;
}

// Blobby mask: union of random discs, so clearances are non-trivial.
inline Mask blob_mask(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h), ur(1.0, 0.4 * std::max(w, h));
    std::uniform_int_distribution<int> n(1, 4);
    Mask m(w, h);
    const int discs = n(rng);
    for (int k = 0; k < discs; ++k) {
        const double cx = ux(rng), cy = uy(rng), r = ur(rng);
        for (int row = 0; row < h; ++row) {
            for (int col = 0; col < w; ++col) {
                if (std::hypot(col + 0.5 - cx, row + 0.5 - cy) <= r) {
                    m.set(row, col, true);
                }
            }
        }
    }
    return m;
}

struct BruteCircle {
    std::int64_t d2 = -1;
    int row = 0;
    int col = 0;
};

// O(W^2 H^2): max over feasible cells of min squared distance to any
// infeasible cell or to the ring of virtual cells around the grid.
inline BruteCircle brute_inscribed(const Mask& m) {
    BruteCircle best;
    for (int r = 0; r < m.height(); ++r) {
        for (int c = 0; c < m.width(); ++c) {
            if (!m.at(r, c)) {
                continue;
            }
            std::int64_t d = std::min<std::int64_t>({r + 1, c + 1, m.height() - r, m.width() - c});
            d *= d;
            for (int r2 = 0; r2 < m.height(); ++r2) {
                for (int c2 = 0; c2 < m.width(); ++c2) {
                    if (!m.at(r2, c2)) {
                        const std::int64_t dr = r - r2, dc = c - c2;
                        d = std::min(d, dr * dr + dc * dc);
                    }
                }
            }
            if (d > best.d2) {
                best = {d, r, c};
            }
        }
    }
    return best;
}

// Union-find labelling; returns components as sorted cell-index sets.
inline std::set<std::vector<int>> union_find_components(const Mask& m) {
    const int w = m.width(), h = m.height();
    std::vector<int> parent(static_cast<std::size_t>(w * h));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!m.at(r, c)) {
                continue;
            }
            if (c + 1 < w && m.at(r, c + 1)) {
                parent[find(r * w + c)] = find(r * w + c + 1);
            }
            if (r + 1 < h && m.at(r + 1, c)) {
                parent[find(r * w + c)] = find((r + 1) * w + c);
            }
        }
    }
    std::map<int, std::vector<int>> groups;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (m.at(r, c)) {
                groups[find(r * w + c)].push_back(r * w + c);
            }
        }
    }
    std::set<std::vector<int>> out;
    for (auto& [k, v] : groups) {
        out.insert(v);
    }
    return out;
}

// ---- set cover ---------------------------------------------------------

struct CoverAnswer {
    std::size_t size = 0;
    std::vector<std::size_t> chosen; // ascending original indices
};

// Every subset of candidates, same objective and tie-break as documented.
inline CoverAnswer exhaustive_cover(const CoverInstance& inst) {
    const std::size_t n = inst.candidates.size();
    std::vector<std::size_t> rank_order(n);
    std::iota(rank_order.begin(), rank_order.end(), std::size_t{0});
    std::sort(rank_order.begin(), rank_order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ta = inst.candidates[a].trays;
        const auto& tb = inst.candidates[b].trays;
        if (ta.size() != tb.size()) return ta.size() > tb.size();
        if (ta != tb) return ta < tb;
        return a < b;
    });
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[rank_order[r]] = r;

    bool found = false;
    std::size_t best_size = 0;
    bool best_exact = false;
    std::vector<std::size_t> best_key;
    std::vector<std::size_t> best_set;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        std::vector<int> hits(inst.tray_count, 0);
        std::vector<std::size_t> set;
        for (std::size_t i = 0; i < n; ++i) {
            if (bits >> i & 1) {
                set.push_back(i);
                for (auto t : inst.candidates[i].trays) ++hits[t];
            }
        }
        if (std::any_of(hits.begin(), hits.end(), [](int h) { return h == 0; })) continue;
        const bool exact = std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
        std::vector<std::size_t> key;
        for (auto i : set) key.push_back(rank[i]);
        std::sort(key.begin(), key.end());
        const bool better = !found || set.size() < best_size ||
                            (set.size() == best_size && exact && !best_exact) ||
                            (set.size() == best_size && exact == best_exact && key < best_key);
        if (better) {
            found = true;
            best_size = set.size();
            best_exact = exact;
            best_key = key;
            best_set = set;
        }
    }
    return {best_size, best_set};
}

// ---- routing -----------------------------------------------------------

struct Route {
    std::vector<std::size_t> order;
    double length = std::numeric_limits<double>::infinity();
};

// Recursive enumeration that tries the highest index first; ties resolved
// towards the lexicographically smaller permutation.
inline Route brute_route(const Point2& s, const Point2& g, const std::vector<Point2>& stops) {
    Route best;
    std::vector<std::size_t> cur;
    std::vector<bool> used(stops.size(), false);
    std::function<void(Point2, double)> go = [&](Point2 at, double len) {
        if (cur.size() == stops.size()) {
            const double total = len + std::hypot(g.x - at.x, g.y - at.y);
            if (total < best.length - 1e-12 || (std::abs(total - best.length) <= 1e-12 && cur < best.order)) {
                best = {cur, total};
            }
            return;
        }
        for (std::size_t k = stops.size(); k-- > 0;) {
            if (used[k]) continue;
            used[k] = true;
            cur.push_back(k);
            go(stops[k], len + std::hypot(stops[k].x - at.x, stops[k].y - at.y));
            cur.pop_back();
            used[k] = false;
        }
    };
    go(s, 0.0);
    return best;
}

// ---- kinematics --------------------------------------------------------

inline Eigen::Matrix<double, 6, Eigen::Dynamic> fd_jacobian(const KinematicChain& chain, const JointConfig& q,
                                                             double h = 1e-6) {
    Eigen::Matrix<double, 6, Eigen::Dynamic> J(6, q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        JointConfig a = q, b = q;
        a[i] += h;
        b[i] -= h;
        const Eigen::Isometry3d ta = end_effector_transform(chain, a);
        const Eigen::Isometry3d tb = end_effector_transform(chain, b);
        J.block<3, 1>(0, i) = (ta.translation() - tb.translation()) / (2 * h);
        const Eigen::AngleAxisd w(ta.linear() * tb.linear().transpose());
        J.block<3, 1>(3, i) = w.axis() * w.angle() / (2 * h);
    }
    return J;
}

// Law-of-cosines branches for a planar two-link arm, written independently
// of the library's closed form.
inline std::vector<std::array<double, 2>> planar_branches(double l1, double l2, double x, double y) {
    const double r2 = x * x + y * y;
    const double c2 = (r2 - l1 * l1 - l2 * l2) / (2 * l1 * l2);
    if (c2 < -1.0 || c2 > 1.0) return {};
    std::vector<std::array<double, 2>> out;
    for (double sign : {1.0, -1.0}) {
        const double t2 = sign * std::acos(c2);
        const double k1 = l1 + l2 * std::cos(t2);
        const double k2 = l2 * std::sin(t2);
        out.push_back({std::atan2(y, x) - std::atan2(k2, k1), t2});
    }
    return out;
}

inline double wrapped_gap(double a, double b) {
    double d = std::fmod(a - b, 2 * M_PI);
    if (d > M_PI) d -= 2 * M_PI;
    if (d < -M_PI) d += 2 * M_PI;
    return std::abs(d);
}

// ---- collision ---------------------------------------------------------

inline double point_segment(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const Eigen::Vector3d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (a + t * ab - p).norm();
}

// Signed distance from a point to a solid (negative inside).
inline double signed_distance(const Shape& s, const Eigen::Vector3d& p) {
    if (const auto* sp = std::get_if<Sphere>(&s)) return (p - sp->center).norm() - sp->radius;
    if (const auto* c = std::get_if<Capsule>(&s)) return point_segment(p, c->p0, c->p1) - c->radius;
    const auto& b = std::get<Box>(s);
    const Eigen::Vector3d local = b.rotation.transpose() * (p - b.center);
    const Eigen::Vector3d q = local.cwiseAbs() - b.half_extents;
    return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

struct Samples {
    std::vector<Eigen::Vector3d> points;
    double spacing = 0.0;
};

inline std::vector<Eigen::Vector3d> fibonacci(int n) {
    std::vector<Eigen::Vector3d> out;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(1.0 - z * z);
        out.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    return out;
}

inline Samples surface_samples(const Shape& s, int n = 10000) {
    Samples out;
    if (const auto* sp = std::get_if<Sphere>(&s)) {
        for (const auto& u : fibonacci(n)) out.points.push_back(sp->center + sp->radius * u);
        out.spacing = std::sqrt(4 * M_PI * sp->radius * sp->radius / n) * 1.5;
        return out;
    }
    if (const auto* c = std::get_if<Capsule>(&s)) {
        // Points on the swept sphere: every sphere sample moved along the axis,
        // keeping only those on the outer surface.
        const Eigen::Vector3d axis = c->p1 - c->p0;
        const int rings = 50;
        const auto dirs = fibonacci(n / rings);
        for (int k = 0; k <= rings; ++k) {
            const Eigen::Vector3d center = c->p0 + axis * (static_cast<double>(k) / rings);
            for (const auto& u : dirs) {
                const Eigen::Vector3d p = center + c->radius * u;
                if (point_segment(p, c->p0, c->p1) >= c->radius - 1e-9) out.points.push_back(p);
            }
        }
        const double area = 4 * M_PI * c->radius * c->radius + 2 * M_PI * c->radius * axis.norm();
        out.spacing = std::max(std::sqrt(area / static_cast<double>(out.points.size())),
                               axis.norm() / rings) * 1.5;
        return out;
    }
    const auto& b = std::get<Box>(s);
    const int k = std::max(2, static_cast<int>(std::sqrt(n / 6.0)));
    for (int axis = 0; axis < 3; ++axis) {
        for (double side : {-1.0, 1.0}) {
            for (int i = 0; i <= k; ++i) {
                for (int j = 0; j <= k; ++j) {
                    Eigen::Vector3d local;
                    local[axis] = side * b.half_extents[axis];
                    local[(axis + 1) % 3] = b.half_extents[(axis + 1) % 3] * (2.0 * i / k - 1.0);
                    local[(axis + 2) % 3] = b.half_extents[(axis + 2) % 3] * (2.0 * j / k - 1.0);
                    out.points.push_back(b.center + b.rotation * local);
                }
            }
        }
    }
    out.spacing = 2.0 * b.half_extents.maxCoeff() / k * 1.5;
    return out;
}

struct SampledContact {
    bool collide = false;
    bool ambiguous = false;
};

inline SampledContact sampled_contact(const Shape& a, const Shape& b) {
    const auto sa = surface_samples(a);
    const auto sb = surface_samples(b);
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& p : sa.points) gap = std::min(gap, signed_distance(b, p));
    for (const auto& p : sb.points) gap = std::min(gap, signed_distance(a, p));
    const double h = std::max(sa.spacing, sb.spacing);
    return {gap <= 0.0, std::abs(gap) <= 2.0 * h};
}

inline Shape random_shape(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-0.5, 0.5), size(0.05, 0.35), ang(-M_PI, M_PI);
    std::uniform_int_distribution<int> kind(0, 2);
    const Eigen::Vector3d c(pos(rng), pos(rng), pos(rng));
    switch (kind(rng)) {
    case 0: return Sphere{c, size(rng)};
    case 1: {
        const Eigen::Vector3d d(pos(rng), pos(rng), pos(rng));
        return Capsule{c - 0.5 * d, c + 0.5 * d, 0.5 * size(rng)};
    }
    default:
        return Box::from_pose(Pose6{c.x(), c.y(), c.z(), ang(rng), 0.5 * ang(rng), ang(rng)},
                              Eigen::Vector3d(size(rng), size(rng), size(rng)));
    }
}

} // namespace oracle
