#include "reachplan/baseregion.hpp"

#include "reachplan/error.hpp"
#include "reachplan/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace reachplan {

class QueryCache {
  public:
    using Key = std::tuple<std::string, std::size_t, std::array<std::int64_t, 6>>;
    std::map<Key, std::vector<std::span<const ReachRecord>>> entries;
};

namespace {

std::array<std::int64_t, 6> quantize(const Pose6& p) {
    std::array<std::int64_t, 6> q{};
    const auto v = p.values();
    for (std::size_t i = 0; i < 6; ++i) {
        q[i] = static_cast<std::int64_t>(std::llround(v[i] * 1e9));
    }
    return q;
}

double joint_norm2(const JointConfig& c) {
    double s = 0.0;
    for (double a : c.angles) {
        s += a * a;
    }
    return s;
}

} // namespace

Pose6 grasp_in_base_frame(const Pose6& grasp, const Pose6& object_pose, const BasePose& base) {
    return from_transform(base.transform().inverse() * to_transform(object_pose) * to_transform(grasp));
}

std::optional<GraspWitness> object_graspable(const PlanningContext& ctx, const GraspSet& object,
                                             const BasePose& base, const GraspOptions& options,
                                             QueryCache* cache) {
    const std::set<std::string> ignore{object.object_id};
    for (std::size_t gi = 0; gi < object.grasps.size(); ++gi) {
        const Pose6 target = grasp_in_base_frame(object.grasps[gi], object.object_pose, base);

        std::vector<std::span<const ReachRecord>> local;
        const std::vector<std::span<const ReachRecord>>* spans = &local;
        auto lookup = [&] {
            return options.mode == QueryMode::Interval ? ctx.db.interval_voxels(target, options.mask)
                                                       : ctx.db.query_voxels(target, options.mask);
        };
        if (cache != nullptr) {
            QueryCache::Key key{object.object_id, gi, quantize(target)};
            auto it = cache->entries.find(key);
            if (it == cache->entries.end()) {
                it = cache->entries.emplace(std::move(key), lookup()).first;
            }
            spans = &it->second;
        } else {
            local = lookup();
        }

        auto accept = [&](const ReachRecord& rec) -> std::optional<GraspWitness> {
            if (robot_in_collision(ctx.chain, ctx.geometry, base, rec.config, ctx.world, ignore, options.margin)) {
                return std::nullopt;
            }
            GraspWitness w{gi, rec.config, rec.pose, target, false};
            if (options.refine) {
                IkOptions ik = options.ik;
                ik.mask = options.mask;
                const auto refined = refine_ik(ctx.chain, rec.config, target, ik);
                if (refined && !robot_in_collision(ctx.chain, ctx.geometry, base, refined->config, ctx.world,
                                                   ignore, options.margin)) {
                    w.config = refined->config;
                    w.record_pose = forward_kinematics(ctx.chain, refined->config);
                    w.refined = true;
                }
            }
            return w;
        };

        if (options.strategy == WitnessStrategy::SingleSolution) {
            const ReachRecord* best = nullptr;
            double best_norm = std::numeric_limits<double>::infinity();
            for (const auto& span : *spans) {
                for (const auto& rec : span) {
                    const double n = joint_norm2(rec.config);
                    if (n < best_norm) {
                        best_norm = n;
                        best = &rec;
                    }
                }
            }
            if (best != nullptr) {
                if (auto w = accept(*best)) {
                    return w;
                }
            }
            continue;
        }

        for (const auto& span : *spans) {
            for (const auto& rec : span) {
                if (auto w = accept(rec)) {
                    return w;
                }
            }
        }
    }
    return std::nullopt;
}

RegionResult compute_base_region(const PlanningContext& ctx, std::span<const GraspSet> objects,
                                 const BaseGridSpec& grid, const std::string& tray_id,
                                 const RegionOptions& options) {
    grid.validate();
    ctx.db.verify_chain(ctx.chain);
    if (objects.empty()) {
        throw ContractError("tray " + tray_id + " has no objects");
    }
    for (const auto& o : objects) {
        if (o.grasps.empty()) {
            throw ContractError("object " + o.object_id + " has no grasp poses");
        }
    }

    RegionResult result;
    result.region.tray_id = tray_id;
    result.region.grid = grid;
    result.region.mask = Mask(grid.width, grid.height);
    result.witnesses.resize(static_cast<std::size_t>(grid.width) * static_cast<std::size_t>(grid.height));

    auto run_rows = [&](int row_begin, int row_end) {
        QueryCache cache;
        for (int row = row_begin; row < row_end; ++row) {
            for (int col = 0; col < grid.width; ++col) {
                const Point2 c = grid.cell_center(row, col);
                const BasePose base{c.x, c.y, grid.heading};
                if (base_in_collision(ctx.geometry, base, ctx.world, options.grasp.margin)) {
                    continue;
                }
                std::vector<GraspWitness> witnesses;
                for (const auto& object : objects) {
                    auto w = object_graspable(ctx, object, base, options.grasp, &cache);
                    if (!w) {
                        break;
                    }
                    witnesses.push_back(std::move(*w));
                }
                if (witnesses.size() == objects.size()) {
                    result.region.mask.set(row, col, true);
                    result.witnesses[static_cast<std::size_t>(row) * static_cast<std::size_t>(grid.width) +
                                     static_cast<std::size_t>(col)] = std::move(witnesses);
                }
            }
        }
    };

    const unsigned threads = std::clamp<unsigned>(options.threads, 1, static_cast<unsigned>(grid.height));
    if (threads == 1) {
        run_rows(0, grid.height);
    } else {
        // Rows are interleaved in blocks so threads see similar workloads;
        // every cell is written by exactly one thread.
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                for (int row = static_cast<int>(t); row < grid.height; row += static_cast<int>(threads)) {
                    run_rows(row, row + 1);
                }
            });
        }
    }
    return result;
}

void write_region(std::ostream& out, const BaseRegion& region) {
    const auto& g = region.grid;
    out << "baseregion v1 " << region.tray_id << ' ' << format_number(g.x0) << ' ' << format_number(g.y0) << ' '
        << format_number(g.cell) << ' ' << g.width << ' ' << g.height << ' ' << format_number(g.heading) << '\n';
    for (int row = 0; row < region.mask.height(); ++row) {
        std::string line(static_cast<std::size_t>(region.mask.width()), '.');
        for (int col = 0; col < region.mask.width(); ++col) {
            if (region.mask.at(row, col)) {
                line[static_cast<std::size_t>(col)] = '#';
            }
        }
        out << line << '\n';
    }
}

BaseRegion read_region(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw FormatError("empty region file");
    }
    std::istringstream hs(header);
    std::string magic, version, x0, y0, cell, phi;
    BaseRegion region;
    int width = 0;
    int height = 0;
    if (!(hs >> magic >> version >> region.tray_id >> x0 >> y0 >> cell >> width >> height >> phi) ||
        magic != "baseregion" || version != "v1") {
        throw FormatError("bad region header: " + header);
    }
    try {
        region.grid = BaseGridSpec{parse_number(x0), parse_number(y0), parse_number(cell), width, height,
                                   parse_number(phi)};
        region.grid.validate();
    } catch (const ContractError& e) {
        throw FormatError(std::string("bad region header: ") + e.what());
    }
    region.mask = Mask(width, height);
    for (int row = 0; row < height; ++row) {
        std::string line;
        if (!std::getline(in, line) || static_cast<int>(line.size()) != width) {
            throw FormatError("region row " + std::to_string(row) + " missing or of wrong width");
        }
        for (int col = 0; col < width; ++col) {
            const char c = line[static_cast<std::size_t>(col)];
            if (c != '#' && c != '.') {
                throw FormatError("unexpected character in region row " + std::to_string(row));
            }
            region.mask.set(row, col, c == '#');
        }
    }
    return region;
}

} // namespace reachplan
