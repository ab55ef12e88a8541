#include "cli.hpp"

#include "reachplan/baseregion.hpp"
#include "reachplan/error.hpp"
#include "reachplan/reachdb.hpp"
#include "reachplan/regiongeo.hpp"
#include "reachplan/robustsim.hpp"
#include "reachplan/scene.hpp"
#include "reachplan/sequencer.hpp"
#include "reachplan/svg.hpp"
#include "reachplan/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace reachplan::cli {

namespace fs = std::filesystem;

namespace {

class IoError : public Error {
  public:
    using Error::Error;
};

class UsageError : public Error {
  public:
    using Error::Error;
};

std::string quoted(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c == '\n' ? ' ' : c;
    }
    return '"' + out + '"';
}

void report(std::ostream& err, const std::string& code, const std::string& message, const std::string& extra = {}) {
    err << "error: code=" << code;
    if (!extra.empty()) {
        err << ' ' << extra;
    }
    err << " message=" << quoted(message) << '\n';
}

unsigned thread_count(int requested) {
    if (const char* env = std::getenv("REACHPLAN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<unsigned>(v);
        }
        throw UsageError(std::string("REACHPLAN_THREADS must be a positive integer, got '") + env + "'");
    }
    if (requested > 0) {
        return static_cast<unsigned>(requested);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) {
        throw IoError("cannot write " + path.string());
    }
}

Scene scene_from(const std::string& path) { return parse_scene(read_file(path)); }

std::vector<double> numbers_arg(const std::string& text, std::size_t count, const std::string& flag) {
    std::vector<double> v;
    try {
        v = parse_number_list(text);
    } catch (const ContractError& e) {
        throw UsageError(flag + ": " + e.what());
    }
    if (v.size() != count) {
        throw UsageError(flag + " expects " + std::to_string(count) + " comma-separated numbers");
    }
    return v;
}

Point2 point_arg(const std::string& text, const std::string& flag) {
    const auto v = numbers_arg(text, 2, flag);
    return {v[0], v[1]};
}

PoseMask mask_arg(const std::string& text) {
    const auto v = numbers_arg(text, 6, "--mask");
    PoseMask m;
    for (std::size_t i = 0; i < 6; ++i) {
        if (v[i] != 0.0 && v[i] != 1.0) {
            throw UsageError("--mask entries are 0 or 1");
        }
        m.constrained[i] = v[i] == 1.0;
    }
    return m;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? " " : "") + format_number(v[i]);
    }
    return out;
}

std::string ids_of(const std::vector<std::size_t>& trays, const std::vector<std::string>& ids, char sep) {
    std::string out;
    for (std::size_t i = 0; i < trays.size(); ++i) {
        if (i) {
            out += sep;
        }
        out += ids[trays[i]];
    }
    return out;
}

std::vector<BaseRegion> load_regions(const Scene& scene, const std::string& dir) {
    std::vector<BaseRegion> regions;
    for (const auto& tray : scene.task_trays()) {
        const fs::path path = fs::path(dir) / (tray + ".region");
        std::istringstream in(read_file(path));
        BaseRegion r;
        try {
            r = read_region(in);
        } catch (const Error& e) {
            throw IoError(path.string() + ": " + e.what());
        }
        if (r.tray_id != tray) {
            throw IoError(path.string() + " holds the region of tray '" + r.tray_id + "'");
        }
        if (!(r.grid == scene.grid)) {
            throw GridMismatchError(path.string() + " uses a different base grid than the scene");
        }
        regions.push_back(std::move(r));
    }
    return regions;
}

struct Flags {
    std::string scene;
    std::string db;
    std::string out;
    std::string regions;
    std::string plan;
    std::string svg;
    std::string histogram;
    int threads = 0;

    // build-db
    double dtheta = 0.0;
    std::string voxel;
    double wmin = 0.0;
    double thin_exponent = 0.0;
    double thin_reference = 1.0;
    std::uint64_t build_seed = 0;

    // query-ik
    std::string pose;
    std::string mask;
    bool interval = false;
    bool refine = false;

    // region
    std::vector<std::string> trays;
    std::string strategy = "all";
    std::string mode = "interval";
    double margin = 0.0;

    // intersect / plan / simulate
    std::optional<double> sigma;
    std::size_t max_order = 0;
    std::string start;
    std::string goal;
    std::uint64_t sa_seed = 42;
    std::size_t sa_chains = 1;
    std::size_t trials = 10000;
    std::optional<std::string> model;
    std::optional<std::uint64_t> seed;
    double speed = 0.5;
    double overhead = 20.0;
    bool no_slack = false;
};

int build_db(const Flags& f, std::ostream& out) {
    const Scene scene = scene_from(f.scene);
    const auto v = numbers_arg(f.voxel, 6, "--voxel");
    VoxelSpec spec;
    std::copy(v.begin(), v.end(), spec.cell.begin());
    SamplingSpec sampling;
    sampling.steps = {f.dtheta};
    sampling.w_min = f.wmin;
    sampling.thin_exponent = f.thin_exponent;
    sampling.thin_reference = f.thin_reference;
    sampling.seed = f.build_seed;
    ReachDB db;
    try {
        spec.validate();
        db = build(scene.chain, sampling, spec, BuildOptions{thread_count(f.threads)});
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
    if (fs::path(f.out).has_parent_path()) {
        std::error_code ec;
        fs::create_directories(fs::path(f.out).parent_path(), ec);
    }
    save(db, f.out);
    std::string hex;
    for (auto b : db.fingerprint()) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", b);
        hex += buf;
    }
    out << "samples " << sample_count(scene.chain, sampling) << '\n';
    out << "records " << db.record_count() << '\n';
    out << "voxels " << db.voxel_count() << '\n';
    out << "fingerprint " << hex << '\n';
    if (!f.svg.empty()) {
        write_file(f.svg, svg_projection(reachability_projection(db), db.voxel_spec()));
    }
    return kOk;
}

int query_ik(const Flags& f, std::ostream& out) {
    const ReachDB db = load(f.db);
    const auto v = numbers_arg(f.pose, 6, "--pose");
    const Pose6 target = canonicalize(Pose6::from_values({v[0], v[1], v[2], v[3], v[4], v[5]}));
    const PoseMask mask = f.mask.empty() ? PoseMask{} : mask_arg(f.mask);
    std::optional<Scene> scene;
    if (f.refine) {
        if (f.scene.empty()) {
            throw UsageError("--refine needs --scene for the kinematic chain");
        }
        scene = scene_from(f.scene);
        db.verify_chain(scene->chain);
    }
    std::vector<const ReachRecord*> hits;
    if (f.interval) {
        hits = db.query_interval(target, mask);
    } else {
        for (auto span : db.query_voxels(target, mask)) {
            for (const auto& r : span) {
                hits.push_back(&r);
            }
        }
    }
    out << "target " << join({target.x, target.y, target.z, target.roll, target.pitch, target.yaw}) << '\n';
    out << hits.size() << " configurations\n";
    for (const auto* r : hits) {
        out << "config " << join(r->config.angles) << " manipulability " << format_number(r->manipulability)
            << " pose " << join({r->pose.x, r->pose.y, r->pose.z, r->pose.roll, r->pose.pitch, r->pose.yaw})
            << '\n';
        if (scene) {
            IkOptions ik;
            ik.mask = mask;
            const auto sol = refine_ik(scene->chain, r->config, target, ik);
            if (sol) {
                out << "refined " << join(sol->config.angles) << " iterations " << sol->iterations << " error "
                    << format_number(sol->error) << '\n';
            } else {
                out << "refined none\n";
            }
        }
    }
    return kOk;
}

int region(const Flags& f, std::ostream& out) {
    const Scene scene = scene_from(f.scene);
    const ReachDB db = load(f.db);
    db.verify_chain(scene.chain);
    const RobotGeometry geometry = scene.geometry();
    const World world = scene.world();
    const PlanningContext ctx{db, scene.chain, geometry, world};

    RegionOptions options;
    options.threads = thread_count(f.threads);
    options.grasp.mask = scene.grasp_mask;
    options.grasp.margin = f.margin;
    if (f.strategy == "single") {
        options.grasp.strategy = WitnessStrategy::SingleSolution;
    } else if (f.strategy != "all") {
        throw UsageError("--strategy is all or single");
    }
    if (f.mode == "exact") {
        options.grasp.mode = QueryMode::Exact;
    } else if (f.mode != "interval") {
        throw UsageError("--mode is interval or exact");
    }

    std::vector<std::string> trays = f.trays.empty() ? scene.task_trays() : f.trays;
    for (const auto& tray : trays) {
        const auto objects = scene.grasp_sets(tray);
        const auto result = compute_base_region(ctx, objects, scene.grid, tray, options);
        std::ostringstream text;
        write_region(text, result.region);
        write_file(fs::path(f.out) / (tray + ".region"), text.str());
        write_file(fs::path(f.out) / (tray + ".svg"), svg_region(result.region));
        out << "region " << tray << " cells " << result.region.mask.count() << '\n';
    }
    return kOk;
}

UncertaintyModel uncertainty_of(const Scene& scene, const Flags& f) {
    UncertaintyModel u = scene.uncertainty;
    if (f.sigma) {
        u.sigma = *f.sigma;
    }
    if (f.model) {
        try {
            u.model = parse_error_model(*f.model);
        } catch (const ContractError& e) {
            throw UsageError(e.what());
        }
    }
    if (f.seed) {
        u.seed = *f.seed;
    }
    if (!(u.sigma >= 0.0)) {
        throw UsageError("--sigma must be >= 0");
    }
    return u;
}

int intersect(const Flags& f, std::ostream& out) {
    const Scene scene = scene_from(f.scene);
    const auto regions = load_regions(scene, f.regions);
    const auto ids = scene.task_trays();
    const UncertaintyModel u = uncertainty_of(scene, f);
    auto records = enumerate_intersections(regions, f.max_order);
    std::ostringstream rep;
    rep << "intersections v1\n";
    rep << "sigma " << format_number(u.sigma) << '\n';
    std::size_t kept = 0;
    for (auto& rec : records) {
        const bool keep = rec.best_radius() >= u.sigma;
        kept += keep ? 1 : 0;
        const auto& c = rec.best_component().circle;
        if (keep) {
            rec.robust = c;
        }
        rep << "record " << ids_of(rec.trays, ids, ',') << " order " << rec.order() << " cells "
            << rec.mask.count() << " components " << rec.components.size() << " radius "
            << format_number(c.radius) << " center " << format_number(c.center.x) << ' '
            << format_number(c.center.y) << ' ' << (keep ? "kept" : "discarded") << '\n';
        std::ostringstream grid;
        write_intersection(grid, rec, ids, scene.grid);
        write_file(fs::path(f.out) / (ids_of(rec.trays, ids, '+') + ".isect"), grid.str());
    }
    rep << "kept " << kept << " discarded " << records.size() - kept << '\n';
    write_file(fs::path(f.out) / "intersections.txt", rep.str());
    std::vector<IntersectionRecord> shown;
    for (const auto& r : records) {
        if (r.robust) {
            shown.push_back(r);
        }
    }
    write_file(fs::path(f.out) / "intersections.svg", svg_intersections(regions, shown));
    out << rep.str();
    return kOk;
}

PlanOptions plan_options(const Flags& f) {
    PlanOptions o;
    o.max_order = f.max_order;
    o.sa_seed = f.sa_seed;
    o.sa_chains = f.sa_chains;
    o.threads = thread_count(f.threads);
    return o;
}

int plan_cmd(const Flags& f, std::ostream& out) {
    const Scene scene = scene_from(f.scene);
    const auto regions = load_regions(scene, f.regions);
    const auto ids = scene.task_trays();
    const UncertaintyModel u = uncertainty_of(scene, f);
    const Point2 start = f.start.empty() ? scene.start : point_arg(f.start, "--start");
    const Point2 goal = f.goal.empty() ? scene.goal : point_arg(f.goal, "--goal");
    const PlanOptions options = plan_options(f);
    const PlanResult result = plan(regions, u, start, goal, options);
    const PlanResult naive = naive_plan(regions, start, goal, options);

    std::ostringstream text;
    write_plan(text, result, ids);
    if (!f.out.empty()) {
        write_file(f.out, text.str());
    }
    if (!f.svg.empty()) {
        write_file(f.svg, svg_plan(regions, result));
    }
    out << text.str();
    out << "candidates " << result.candidates.size() << '\n';
    for (auto i : result.selected) {
        const auto& rec = result.candidates[i];
        out << "selected " << ids_of(rec.trays, ids, ',') << " radius " << format_number(rec.robust->radius) << '\n';
    }
    out << "naive stops " << naive.stops.size() << " length " << format_number(naive.length) << '\n';
    return kOk;
}

int simulate(const Flags& f, std::ostream& out) {
    const Scene scene = scene_from(f.scene);
    const auto regions = load_regions(scene, f.regions);
    const auto ids = scene.task_trays();
    const UncertaintyModel u = uncertainty_of(scene, f);
    PlanResult planned;
    {
        std::istringstream in(read_file(f.plan));
        try {
            planned = read_plan(in, ids);
        } catch (const FormatError& e) {
            throw IoError(f.plan + ": " + e.what());
        }
    }
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (planned.assignment[t] >= planned.stops.size()) {
            throw UsageError("plan does not serve tray " + ids[t]);
        }
    }
    const PlanResult naive = naive_plan(regions, planned.start, planned.goal, plan_options(f));
    SimOptions options;
    options.trials = f.trials;
    options.speed = f.speed;
    options.overhead = f.overhead;
    options.quantization_slack = !f.no_slack;
    options.threads = thread_count(f.threads);
    SimReport rep;
    try {
        rep = evaluate(planned, naive, regions, u, options);
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
    std::ostringstream text;
    write_report(text, rep);
    if (!f.out.empty()) {
        write_file(f.out, text.str());
    }
    if (!f.histogram.empty()) {
        write_file(f.histogram, svg_histogram(rep.histogram, u.sigma));
    }
    out << text.str();
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reachability-database base placement and stop sequencing", "reachplan"};
    app.require_subcommand(1);
    Flags f;

    auto* b = app.add_subcommand("build-db", "Sample joint space and save a reachability database");
    b->add_option("--scene", f.scene)->required();
    b->add_option("--dtheta", f.dtheta, "joint sampling step (rad)")->required();
    b->add_option("--voxel", f.voxel, "dx,dy,dz,droll,dpitch,dyaw")->required();
    b->add_option("--wmin", f.wmin, "minimum manipulability");
    b->add_option("--thin-exponent", f.thin_exponent);
    b->add_option("--thin-reference", f.thin_reference);
    b->add_option("--seed", f.build_seed);
    b->add_option("--out", f.out)->required();
    b->add_option("--svg", f.svg, "x-y projection image");
    b->add_option("--threads", f.threads);

    auto* q = app.add_subcommand("query-ik", "Look up stored configurations for a pose");
    q->add_option("--db", f.db)->required();
    q->add_option("--pose", f.pose, "x,y,z,roll,pitch,yaw")->required();
    q->add_option("--mask", f.mask, "six 0/1 flags, 1 = constrained");
    q->add_flag("--interval", f.interval);
    q->add_flag("--refine", f.refine);
    q->add_option("--scene", f.scene);

    auto* r = app.add_subcommand("region", "Compute base regions of task trays");
    r->add_option("--scene", f.scene)->required();
    r->add_option("--db", f.db)->required();
    r->add_option("--tray", f.trays, "tray id (repeatable, default: every task tray)");
    r->add_option("--out", f.out)->required();
    r->add_option("--strategy", f.strategy, "all | single");
    r->add_option("--mode", f.mode, "interval | exact");
    r->add_option("--margin", f.margin);
    r->add_option("--threads", f.threads);

    auto* i = app.add_subcommand("intersect", "Intersect base regions and filter by uncertainty");
    i->add_option("--scene", f.scene)->required();
    i->add_option("--regions", f.regions)->required();
    i->add_option("--sigma", f.sigma);
    i->add_option("--max-order", f.max_order);
    i->add_option("--out", f.out)->required();

    auto* p = app.add_subcommand("plan", "Select robust stops and order them");
    p->add_option("--scene", f.scene)->required();
    p->add_option("--regions", f.regions)->required();
    p->add_option("--sigma", f.sigma);
    p->add_option("--start", f.start, "x,y");
    p->add_option("--goal", f.goal, "x,y");
    p->add_option("--max-order", f.max_order);
    p->add_option("--sa-seed", f.sa_seed);
    p->add_option("--sa-chains", f.sa_chains);
    p->add_option("--out", f.out, "plan file");
    p->add_option("--svg", f.svg);
    p->add_option("--threads", f.threads);

    auto* s = app.add_subcommand("simulate", "Monte-Carlo evaluation of a plan under base error");
    s->add_option("--scene", f.scene)->required();
    s->add_option("--plan", f.plan)->required();
    s->add_option("--regions", f.regions)->required();
    s->add_option("--trials", f.trials);
    s->add_option("--sigma", f.sigma);
    s->add_option("--model", f.model, "uniform | gaussian | boundary");
    s->add_option("--seed", f.seed);
    s->add_option("--speed", f.speed, "m/s");
    s->add_option("--overhead", f.overhead, "s per stop");
    s->add_flag("--no-slack", f.no_slack, "do not subtract the cell quantization slack");
    s->add_option("--max-order", f.max_order);
    s->add_option("--out", f.out);
    s->add_option("--histogram", f.histogram, "SVG of sampled offset radii");
    s->add_option("--threads", f.threads);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        if (msg.empty()) {
            msg = "a subcommand is required";
        }
        report(err, "USAGE", msg);
        return kUsage;
    }

    try {
        if (b->parsed()) {
            return build_db(f, out);
        }
        if (q->parsed()) {
            return query_ik(f, out);
        }
        if (r->parsed()) {
            return region(f, out);
        }
        if (i->parsed()) {
            return intersect(f, out);
        }
        if (p->parsed()) {
            return plan_cmd(f, out);
        }
        return simulate(f, out);
    } catch (const SceneError& e) {
        report(err, e.code(), e.what(), e.path().empty() ? "" : "path=" + e.path());
        return kSceneError;
    } catch (const FingerprintMismatchError& e) {
        report(err, "FINGERPRINT_MISMATCH", e.what());
        return kSceneError;
    } catch (const GridMismatchError& e) {
        report(err, "GRID_MISMATCH", e.what());
        return kSceneError;
    } catch (const InfeasibleError& e) {
        std::string trays;
        for (const auto& t : e.trays()) {
            trays += (trays.empty() ? "" : ",") + t;
        }
        report(err, "INFEASIBLE", e.what(), "trays=" + trays);
        return kInfeasible;
    } catch (const UsageError& e) {
        report(err, "USAGE", e.what());
        return kUsage;
    } catch (const DbLoadError& e) {
        report(err, "DB_LOAD", e.what());
        return kIoError;
    } catch (const IoError& e) {
        report(err, "IO", e.what());
        return kIoError;
    } catch (const std::ios_base::failure& e) {
        report(err, "IO", e.what());
        return kIoError;
    } catch (const ContractError& e) {
        report(err, "INVALID_ARGUMENT", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        report(err, "INTERNAL", e.what());
        return 1;
    }
}

} // namespace reachplan::cli
