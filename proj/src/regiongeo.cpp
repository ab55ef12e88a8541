#include "reachplan/regiongeo.hpp"

#include "reachplan/error.hpp"
#include "reachplan/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>

namespace reachplan {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) with exact
// rational breakpoints. f holds squared distances or kInf for "no site".
void edt_1d(std::vector<std::int64_t>& f) {
    const auto n = static_cast<std::int64_t>(f.size());
    std::vector<std::int64_t> v;
    // Breakpoint z[k] = num[k] / den[k] (den > 0); den == 0 encodes -infinity.
    std::vector<std::int64_t> num;
    std::vector<std::int64_t> den;
    for (std::int64_t q = 0; q < n; ++q) {
        if (f[static_cast<std::size_t>(q)] >= kInf) {
            continue;
        }
        const std::int64_t fq = f[static_cast<std::size_t>(q)] + q * q;
        while (!v.empty()) {
            const std::int64_t p = v.back();
            const std::int64_t s_num = fq - (f[static_cast<std::size_t>(p)] + p * p);
            const std::int64_t s_den = 2 * (q - p);
            // Drop the last parabola when the new one overtakes it before its breakpoint.
            if (den.back() != 0 && s_num * den.back() <= num.back() * s_den) {
                v.pop_back();
                num.pop_back();
                den.pop_back();
                continue;
            }
            v.push_back(q);
            num.push_back(s_num);
            den.push_back(s_den);
            break;
        }
        if (v.empty()) {
            v.push_back(q);
            num.push_back(0);
            den.push_back(0);
        }
    }
    if (v.empty()) {
        return;
    }
    std::vector<std::int64_t> out(f.size());
    std::size_t k = 0;
    for (std::int64_t q = 0; q < n; ++q) {
        // Advance while the next breakpoint lies strictly left of q.
        while (k + 1 < v.size() && num[k + 1] < q * den[k + 1]) {
            ++k;
        }
        const std::int64_t p = v[k];
        out[static_cast<std::size_t>(q)] = (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
    }
    f = std::move(out);
}

const BaseGridSpec& common_grid(std::span<const BaseRegion> regions) {
    if (regions.empty()) {
        throw ContractError("no regions given");
    }
    for (const auto& r : regions) {
        if (!(r.grid == regions.front().grid) || !r.mask.same_shape(regions.front().mask) ||
            r.mask.width() != r.grid.width || r.mask.height() != r.grid.height) {
            throw GridMismatchError("regions " + regions.front().tray_id + " and " + r.tray_id +
                                    " use different base grids");
        }
    }
    return regions.front().grid;
}

} // namespace

Mask intersect(std::span<const BaseRegion> regions) {
    common_grid(regions);
    Mask out = regions.front().mask;
    for (std::size_t i = 1; i < regions.size(); ++i) {
        out &= regions[i].mask;
    }
    return out;
}

std::vector<Mask> connected_components(const Mask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
    std::vector<Mask> comps;
    std::vector<std::size_t> sizes;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto idx = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c);
            if (!mask.at(r, c) || label[idx] >= 0) {
                continue;
            }
            const int id = static_cast<int>(comps.size());
            Mask comp(w, h);
            std::size_t size = 0;
            std::queue<std::pair<int, int>> todo;
            todo.push({r, c});
            label[idx] = id;
            while (!todo.empty()) {
                const auto [cr, cc] = todo.front();
                todo.pop();
                comp.set(cr, cc, true);
                ++size;
                constexpr int dr[4] = {-1, 1, 0, 0};
                constexpr int dc[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int nr = cr + dr[k];
                    const int nc = cc + dc[k];
                    if (!mask.get(nr, nc)) {
                        continue;
                    }
                    const auto nidx =
                        static_cast<std::size_t>(nr) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nc);
                    if (label[nidx] < 0) {
                        label[nidx] = id;
                        todo.push({nr, nc});
                    }
                }
            }
            comps.push_back(std::move(comp));
            sizes.push_back(size);
        }
    }
    std::vector<std::size_t> order(comps.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    std::vector<Mask> sorted;
    for (auto i : order) {
        sorted.push_back(std::move(comps[i]));
    }
    return sorted;
}

std::vector<std::int64_t> squared_clearance(const Mask& mask) {
    const int w = mask.width() + 2;
    const int h = mask.height() + 2;
    // Padded grid: a one-cell infeasible ring stands in for everything outside.
    std::vector<std::int64_t> d(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    auto at = [&](int r, int c) -> std::int64_t& {
        return d[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)];
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            at(r, c) = mask.get(r - 1, c - 1) ? kInf : 0;
        }
    }
    std::vector<std::int64_t> line;
    for (int c = 0; c < w; ++c) {
        line.resize(static_cast<std::size_t>(h));
        for (int r = 0; r < h; ++r) {
            line[static_cast<std::size_t>(r)] = at(r, c);
        }
        edt_1d(line);
        for (int r = 0; r < h; ++r) {
            at(r, c) = line[static_cast<std::size_t>(r)];
        }
    }
    for (int r = 0; r < h; ++r) {
        line.resize(static_cast<std::size_t>(w));
        for (int c = 0; c < w; ++c) {
            line[static_cast<std::size_t>(c)] = at(r, c);
        }
        edt_1d(line);
        for (int c = 0; c < w; ++c) {
            at(r, c) = line[static_cast<std::size_t>(c)];
        }
    }
    std::vector<std::int64_t> out(static_cast<std::size_t>(mask.width()) * static_cast<std::size_t>(mask.height()));
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            out[static_cast<std::size_t>(r) * static_cast<std::size_t>(mask.width()) + static_cast<std::size_t>(c)] =
                at(r + 1, c + 1);
        }
    }
    return out;
}

InscribedCircle inscribed_circle(const Mask& mask, const BaseGridSpec& grid) {
    if (!mask.any()) {
        throw ContractError("inscribed circle of an empty mask");
    }
    const auto d2 = squared_clearance(mask);
    std::int64_t best = -1;
    int best_r = 0;
    int best_c = 0;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            const auto v = d2[static_cast<std::size_t>(r) * static_cast<std::size_t>(mask.width()) + static_cast<std::size_t>(c)];
            if (mask.at(r, c) && v > best) {
                best = v;
                best_r = r;
                best_c = c;
            }
        }
    }
    return InscribedCircle{grid.cell_center(best_r, best_c), std::sqrt(static_cast<double>(best)) * grid.cell,
                           best_r, best_c};
}

const RegionComponent& IntersectionRecord::best_component() const {
    if (components.empty()) {
        throw ContractError("intersection record has no components");
    }
    const RegionComponent* best = &components.front();
    for (const auto& c : components) {
        if (c.circle.radius > best->circle.radius) {
            best = &c;
        }
    }
    return *best;
}

IntersectionRecord make_record(std::vector<std::size_t> trays, Mask mask, const BaseGridSpec& grid) {
    IntersectionRecord rec;
    rec.trays = std::move(trays);
    for (auto& comp : connected_components(mask)) {
        RegionComponent rc;
        rc.cells = comp.count();
        rc.circle = inscribed_circle(comp, grid);
        rc.mask = std::move(comp);
        rec.components.push_back(std::move(rc));
    }
    rec.mask = std::move(mask);
    return rec;
}

std::vector<IntersectionRecord> enumerate_intersections(std::span<const BaseRegion> regions, std::size_t max_order) {
    const BaseGridSpec& grid = common_grid(regions);
    const std::size_t n = regions.size();
    const std::size_t limit = max_order == 0 ? n : std::min(max_order, n);

    std::vector<std::pair<std::vector<std::size_t>, Mask>> level;
    for (std::size_t i = 0; i < n; ++i) {
        if (regions[i].mask.any()) {
            level.push_back({{i}, regions[i].mask});
        }
    }
    std::vector<std::pair<std::vector<std::size_t>, Mask>> all = level;
    for (std::size_t k = 1; k < limit && !level.empty(); ++k) {
        std::set<std::vector<std::size_t>> present;
        for (const auto& [s, m] : level) {
            present.insert(s);
        }
        std::vector<std::pair<std::vector<std::size_t>, Mask>> next;
        for (const auto& [s, m] : level) {
            for (std::size_t j = s.back() + 1; j < n; ++j) {
                std::vector<std::size_t> t = s;
                t.push_back(j);
                bool viable = true;
                for (std::size_t drop = 0; drop + 1 < t.size() && viable; ++drop) {
                    std::vector<std::size_t> sub;
                    for (std::size_t e = 0; e < t.size(); ++e) {
                        if (e != drop) {
                            sub.push_back(t[e]);
                        }
                    }
                    viable = present.count(sub) != 0;
                }
                if (!viable) {
                    continue;
                }
                Mask joint = m & regions[j].mask;
                if (joint.any()) {
                    next.push_back({std::move(t), std::move(joint)});
                }
            }
        }
        all.insert(all.end(), next.begin(), next.end());
        level = std::move(next);
    }

    std::vector<IntersectionRecord> out;
    out.reserve(all.size());
    for (auto& [s, m] : all) {
        out.push_back(make_record(std::move(s), std::move(m), grid));
    }
    return out;
}

std::string to_string(ErrorModel m) {
    switch (m) {
    case ErrorModel::UniformDisk: return "uniform";
    case ErrorModel::GaussianRadial: return "gaussian";
    default: return "boundary";
    }
}

ErrorModel parse_error_model(const std::string& s) {
    if (s == "uniform") {
        return ErrorModel::UniformDisk;
    }
    if (s == "gaussian") {
        return ErrorModel::GaussianRadial;
    }
    if (s == "boundary") {
        return ErrorModel::BoundaryWorstCase;
    }
    throw ContractError("unknown error model '" + s + "' (expected uniform, gaussian or boundary)");
}

void UncertaintyModel::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ContractError("positioning uncertainty must be a finite value >= 0");
    }
}

std::vector<IntersectionRecord> filter_by_uncertainty(std::vector<IntersectionRecord> records,
                                                      const UncertaintyModel& u) {
    u.validate();
    std::vector<IntersectionRecord> kept;
    for (auto& rec : records) {
        if (rec.components.empty() || rec.best_radius() < u.sigma) {
            continue;
        }
        rec.robust = rec.best_component().circle;
        kept.push_back(std::move(rec));
    }
    return kept;
}

void write_intersection(std::ostream& out, const IntersectionRecord& record, std::span<const std::string> tray_ids,
                        const BaseGridSpec& grid) {
    std::string ids;
    for (std::size_t i = 0; i < record.trays.size(); ++i) {
        ids += (i ? "," : "") + tray_ids[record.trays[i]];
    }
    out << "intersection v1 " << ids << ' ' << format_number(grid.x0) << ' ' << format_number(grid.y0) << ' '
        << format_number(grid.cell) << ' ' << grid.width << ' ' << grid.height << ' ' << format_number(grid.heading)
        << '\n';
    for (int row = 0; row < record.mask.height(); ++row) {
        std::string line(static_cast<std::size_t>(record.mask.width()), '.');
        for (int col = 0; col < record.mask.width(); ++col) {
            if (record.mask.at(row, col)) {
                line[static_cast<std::size_t>(col)] = '#';
            }
        }
        out << line << '\n';
    }
}

} // namespace reachplan
