#include "reachplan/sequencer.hpp"

#include "reachplan/error.hpp"
#include "reachplan/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace reachplan {

void CoverInstance::validate() const {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& t = candidates[i].trays;
        if (t.empty()) {
            throw ContractError("cover candidate " + std::to_string(i) + " covers no tray");
        }
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] >= tray_count || (k > 0 && t[k] <= t[k - 1])) {
                throw ContractError("cover candidate " + std::to_string(i) + " has an invalid tray list");
            }
        }
    }
}

std::vector<std::vector<std::uint8_t>> CoverInstance::coverage() const {
    std::vector<std::vector<std::uint8_t>> a(tray_count, std::vector<std::uint8_t>(candidates.size(), 0));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (auto s : candidates[i].trays) {
            a[s][i] = 1;
        }
    }
    return a;
}

namespace {

struct CoverSearch {
    const CoverInstance& inst;
    std::vector<std::size_t> by_rank; // rank -> candidate index
    std::vector<std::vector<std::size_t>> covering; // tray -> ranks covering it, ascending
    std::size_t max_cover = 1;

    std::vector<int> hits;
    std::vector<std::size_t> chosen; // ranks
    std::size_t best_size = std::numeric_limits<std::size_t>::max();
    bool best_exact = false;
    std::vector<std::size_t> best; // ranks, ascending

    explicit CoverSearch(const CoverInstance& in) : inst(in), covering(in.tray_count), hits(in.tray_count, 0) {
        by_rank.resize(in.candidates.size());
        std::iota(by_rank.begin(), by_rank.end(), std::size_t{0});
        std::stable_sort(by_rank.begin(), by_rank.end(), [&](std::size_t a, std::size_t b) {
            const auto& ta = in.candidates[a].trays;
            const auto& tb = in.candidates[b].trays;
            if (ta.size() != tb.size()) {
                return ta.size() > tb.size();
            }
            return ta < tb;
        });
        for (std::size_t r = 0; r < by_rank.size(); ++r) {
            const auto& t = in.candidates[by_rank[r]].trays;
            max_cover = std::max(max_cover, t.size());
            for (auto s : t) {
                covering[s].push_back(r);
            }
        }
    }

    void offer() {
        const bool exact = std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
        std::vector<std::size_t> key = chosen;
        std::sort(key.begin(), key.end());
        bool better = false;
        if (key.size() != best_size) {
            better = key.size() < best_size;
        } else if (exact != best_exact) {
            better = exact;
        } else {
            better = key < best;
        }
        if (better) {
            best_size = key.size();
            best_exact = exact;
            best = std::move(key);
        }
    }

    void search(std::size_t uncovered) {
        if (uncovered == 0) {
            offer();
            return;
        }
        const std::size_t bound = chosen.size() + (uncovered + max_cover - 1) / max_cover;
        if (bound > best_size) {
            return;
        }
        std::size_t tray = 0;
        while (hits[tray] > 0) {
            ++tray;
        }
        for (auto r : covering[tray]) {
            if (std::find(chosen.begin(), chosen.end(), r) != chosen.end()) {
                continue;
            }
            std::size_t newly = 0;
            for (auto s : inst.candidates[by_rank[r]].trays) {
                newly += hits[s] == 0 ? 1 : 0;
                ++hits[s];
            }
            chosen.push_back(r);
            search(uncovered - newly);
            chosen.pop_back();
            for (auto s : inst.candidates[by_rank[r]].trays) {
                --hits[s];
            }
        }
    }
};

} // namespace

std::vector<std::size_t> min_cover(const CoverInstance& instance) {
    instance.validate();
    if (instance.tray_count == 0) {
        return {};
    }
    CoverSearch search(instance);
    std::vector<std::string> missing;
    for (std::size_t s = 0; s < instance.tray_count; ++s) {
        if (search.covering[s].empty()) {
            missing.push_back(std::to_string(s));
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) {
            list += (list.empty() ? "" : ",") + m;
        }
        throw InfeasibleError(missing, "no candidate covers trays " + list);
    }
    search.search(instance.tray_count);
    std::vector<std::size_t> out;
    for (auto r : search.best) {
        out.push_back(search.by_rank[r]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double path_length(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                   std::span<const std::size_t> order) {
    double len = 0.0;
    Point2 at = start;
    for (auto i : order) {
        len += distance(at, stops[i]);
        at = stops[i];
    }
    return len + distance(at, goal);
}

StopOrder order_stops_exact(const Point2& start, const Point2& goal, std::span<const Point2> stops) {
    if (stops.size() > kExactStopLimit) {
        throw ContractError(std::to_string(stops.size()) + " stops exceed the exact enumeration limit of " +
                            std::to_string(kExactStopLimit) + "; use simulated annealing");
    }
    std::vector<std::size_t> perm(stops.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    StopOrder best{perm, path_length(start, goal, stops, perm)};
    while (std::next_permutation(perm.begin(), perm.end())) {
        const double len = path_length(start, goal, stops, perm);
        if (len < best.length - 1e-12) {
            best = {perm, len};
        }
    }
    return best;
}

StopOrder greedy_order(const Point2& start, const Point2& goal, std::span<const Point2> stops) {
    std::vector<bool> used(stops.size(), false);
    std::vector<std::size_t> order;
    Point2 at = start;
    for (std::size_t step = 0; step < stops.size(); ++step) {
        std::size_t pick = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < stops.size(); ++i) {
            if (!used[i] && distance(at, stops[i]) < best) {
                best = distance(at, stops[i]);
                pick = i;
            }
        }
        used[pick] = true;
        order.push_back(pick);
        at = stops[pick];
    }
    return {order, path_length(start, goal, stops, order)};
}

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t below(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n)));
}

} // namespace

StopOrder order_stops_sa(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                         const SaSchedule& schedule, std::uint64_t seed) {
    StopOrder current = greedy_order(start, goal, stops);
    const std::size_t m = stops.size();
    if (m < 2) {
        return current;
    }
    StopOrder best = current;
    double temp = schedule.t0 > 0.0 ? schedule.t0 : current.length / static_cast<double>(m + 1);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> trial;
    for (std::size_t it = 0; it < schedule.iterations; ++it) {
        trial = current.order;
        std::size_t i = below(rng, m);
        std::size_t j = below(rng, m - 1);
        if (j >= i) {
            ++j;
        }
        if (below(rng, 5) < 4) {
            if (i > j) {
                std::swap(i, j);
            }
            std::reverse(trial.begin() + static_cast<std::ptrdiff_t>(i),
                         trial.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        } else {
            const std::size_t v = trial[i];
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
            trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(j), v);
        }
        const double len = path_length(start, goal, stops, trial);
        const double delta = len - current.length;
        const double u = unit(rng);
        if (delta <= 0.0 || (temp > 0.0 && u < std::exp(-delta / temp))) {
            current.order.swap(trial);
            current.length = len;
            if (current.length < best.length - 1e-12) {
                best = current;
            }
        }
        temp *= schedule.alpha;
    }
    return best;
}

StopOrder order_stops_sa_chains(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                                const SaSchedule& schedule, std::uint64_t seed, std::size_t chains,
                                unsigned threads) {
    chains = std::max<std::size_t>(chains, 1);
    std::vector<StopOrder> results(chains);
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, chains);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < chains; c += workers) {
                    results[c] = order_stops_sa(start, goal, stops, schedule, seed + c);
                }
            });
        }
    }
    std::size_t pick = 0;
    for (std::size_t c = 1; c < chains; ++c) {
        if (results[c].length < results[pick].length - 1e-12) {
            pick = c;
        }
    }
    return results[pick];
}

StopOrder route(const Point2& start, const Point2& goal, std::span<const Point2> stops,
                const PlanOptions& options) {
    if (stops.size() <= std::min(options.exact_limit, kExactStopLimit)) {
        return order_stops_exact(start, goal, stops);
    }
    return order_stops_sa_chains(start, goal, stops, options.schedule, options.sa_seed, options.sa_chains,
                                 options.threads);
}

namespace {

std::string join_ids(std::span<const std::size_t> trays, std::span<const std::string> tray_ids) {
    std::string out;
    for (auto t : trays) {
        out += (out.empty() ? "" : ",") + (t < tray_ids.size() ? tray_ids[t] : std::to_string(t));
    }
    return out;
}

void assign(PlanResult& result, std::size_t tray_count) {
    result.assignment.assign(tray_count, 0);
    std::vector<bool> done(tray_count, false);
    for (std::size_t k = 0; k < result.stops.size(); ++k) {
        for (auto t : result.stops[k].trays) {
            if (!done[t]) {
                done[t] = true;
                result.assignment[t] = k;
                result.stops[k].serves.push_back(t);
            }
        }
    }
}

} // namespace

PlanResult plan_from_candidates(std::vector<IntersectionRecord> candidates, std::size_t tray_count,
                                std::span<const std::string> tray_ids, const Point2& start, const Point2& goal,
                                const PlanOptions& options) {
    std::vector<std::size_t> missing;
    for (std::size_t t = 0; t < tray_count; ++t) {
        const bool own = std::any_of(candidates.begin(), candidates.end(), [&](const IntersectionRecord& r) {
            return r.trays.size() == 1 && r.trays.front() == t;
        });
        if (!own) {
            missing.push_back(t);
        }
    }
    if (!missing.empty()) {
        std::vector<std::string> names;
        for (auto t : missing) {
            names.push_back(t < tray_ids.size() ? tray_ids[t] : std::to_string(t));
        }
        throw InfeasibleError(names, "no robust base position for trays " + join_ids(missing, tray_ids));
    }

    CoverInstance inst;
    inst.tray_count = tray_count;
    for (const auto& rec : candidates) {
        const auto& circle = rec.robust ? *rec.robust : rec.best_component().circle;
        inst.candidates.push_back({rec.trays, circle.center, circle.radius});
    }
    const auto selected = min_cover(inst);

    std::vector<Point2> points;
    for (auto i : selected) {
        points.push_back(inst.candidates[i].position);
    }
    const StopOrder order = route(start, goal, points, options);

    PlanResult result;
    result.start = start;
    result.goal = goal;
    for (auto k : order.order) {
        const auto& c = inst.candidates[selected[k]];
        result.stops.push_back({c.trays, {}, c.position, c.radius});
    }
    assign(result, tray_count);
    result.length = order.length;
    result.candidates = std::move(candidates);
    result.selected = selected;
    return result;
}

PlanResult plan(std::span<const BaseRegion> regions, const UncertaintyModel& uncertainty, const Point2& start,
                const Point2& goal, const PlanOptions& options) {
    std::vector<std::string> ids;
    for (const auto& r : regions) {
        ids.push_back(r.tray_id);
    }
    auto kept = filter_by_uncertainty(enumerate_intersections(regions, options.max_order), uncertainty);
    return plan_from_candidates(std::move(kept), regions.size(), ids, start, goal, options);
}

PlanResult naive_plan(std::span<const BaseRegion> regions, const Point2& start, const Point2& goal,
                      const PlanOptions& options) {
    std::vector<std::string> ids;
    std::vector<IntersectionRecord> own;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        ids.push_back(regions[i].tray_id);
        if (regions[i].mask.any()) {
            own.push_back(make_record({i}, regions[i].mask, regions[i].grid));
        }
    }
    return plan_from_candidates(std::move(own), regions.size(), ids, start, goal, options);
}

void write_plan(std::ostream& out, const PlanResult& plan, std::span<const std::string> tray_ids) {
    out << "plan v1\n";
    out << "start " << format_number(plan.start.x) << ' ' << format_number(plan.start.y) << '\n';
    out << "goal " << format_number(plan.goal.x) << ' ' << format_number(plan.goal.y) << '\n';
    out << "stops " << plan.stops.size() << '\n';
    for (const auto& s : plan.stops) {
        out << "stop " << join_ids(s.trays, tray_ids) << ' ' << join_ids(s.serves, tray_ids) << ' '
            << format_number(s.center.x) << ' ' << format_number(s.center.y) << ' ' << format_number(s.radius)
            << '\n';
    }
    out << "length " << format_number(plan.length) << '\n';
}

namespace {

std::vector<std::size_t> parse_ids(const std::string& field, const std::map<std::string, std::size_t>& index) {
    std::vector<std::size_t> out;
    for (const auto& id : split(field, ',')) {
        auto it = index.find(id);
        if (it == index.end()) {
            throw FormatError("plan refers to unknown tray '" + id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

Point2 parse_point(std::istringstream& line, const std::string& what) {
    std::string x;
    std::string y;
    if (!(line >> x >> y)) {
        throw FormatError("plan: malformed " + what + " line");
    }
    return {parse_number(x), parse_number(y)};
}

std::istringstream expect(std::istream& in, const std::string& keyword) {
    std::string text;
    if (!std::getline(in, text)) {
        throw FormatError("plan: missing '" + keyword + "' line");
    }
    std::istringstream line(text);
    std::string word;
    line >> word;
    if (word != keyword) {
        throw FormatError("plan: expected '" + keyword + "', found '" + word + "'");
    }
    return line;
}

} // namespace

PlanResult read_plan(std::istream& in, std::span<const std::string> tray_ids) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < tray_ids.size(); ++i) {
        index[tray_ids[i]] = i;
    }
    PlanResult plan;
    {
        auto header = expect(in, "plan");
        std::string version;
        header >> version;
        if (version != "v1") {
            throw FormatError("plan: unsupported version '" + version + "'");
        }
    }
    try {
        auto s = expect(in, "start");
        plan.start = parse_point(s, "start");
        auto g = expect(in, "goal");
        plan.goal = parse_point(g, "goal");
        auto c = expect(in, "stops");
        std::size_t count = 0;
        if (!(c >> count)) {
            throw FormatError("plan: malformed stops line");
        }
        for (std::size_t k = 0; k < count; ++k) {
            auto line = expect(in, "stop");
            std::string trays;
            std::string serves;
            std::string cx;
            std::string cy;
            std::string r;
            if (!(line >> trays >> serves >> cx >> cy >> r)) {
                throw FormatError("plan: malformed stop line " + std::to_string(k));
            }
            plan.stops.push_back({parse_ids(trays, index), parse_ids(serves, index),
                                  {parse_number(cx), parse_number(cy)}, parse_number(r)});
        }
        auto l = expect(in, "length");
        std::string len;
        l >> len;
        plan.length = parse_number(len);
    } catch (const ContractError& e) {
        throw FormatError(std::string("plan: ") + e.what());
    }
    plan.assignment.assign(tray_ids.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t k = 0; k < plan.stops.size(); ++k) {
        for (auto t : plan.stops[k].serves) {
            if (plan.assignment[t] != std::numeric_limits<std::size_t>::max()) {
                throw FormatError("plan: tray " + tray_ids[t] + " assigned twice");
            }
            plan.assignment[t] = k;
        }
    }
    return plan;
}

} // namespace reachplan
