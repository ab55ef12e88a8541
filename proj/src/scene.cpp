#include "reachplan/scene.hpp"

#include "reachplan/error.hpp"
#include "reachplan/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace reachplan {

using nlohmann::json;

Shape ShapeSpec::build() const {
    auto vec = [](const std::array<double, 3>& a) { return Eigen::Vector3d(a[0], a[1], a[2]); };
    switch (kind) {
    case Kind::Capsule: return Capsule{vec(p0), vec(p1), radius};
    case Kind::Box: return Box::from_pose(pose, vec(half_extents));
    default: return Sphere{vec(center), radius};
    }
}

RobotGeometry Scene::geometry() const {
    RobotGeometry g;
    for (const auto& link : links) {
        std::vector<Shape> shapes;
        for (const auto& s : link) {
            shapes.push_back(s.build());
        }
        g.links.push_back(std::move(shapes));
    }
    g.self_pairs = self_pairs;
    return g;
}

World Scene::world() const {
    World w;
    for (const auto& t : trays) {
        for (const auto& s : t.shapes) {
            w.add(t.id, s.build(), t.pose);
        }
    }
    for (const auto& task : tasks) {
        for (const auto& o : task.objects) {
            for (const auto& s : o.shapes) {
                w.add(o.id, s.build(), o.pose);
            }
        }
    }
    for (const auto& o : obstacles) {
        w.add(o.id.empty() ? "obstacle" : o.id, o.shape.build());
    }
    return w;
}

std::vector<std::string> Scene::task_trays() const {
    std::vector<std::string> ids;
    for (const auto& t : tasks) {
        ids.push_back(t.tray);
    }
    return ids;
}

const SceneTask& Scene::task(const std::string& tray) const {
    for (const auto& t : tasks) {
        if (t.tray == tray) {
            return t;
        }
    }
    throw SceneError("SCENE_UNKNOWN_TRAY", "tasks", "no task for tray '" + tray + "'");
}

std::vector<GraspSet> Scene::grasp_sets(const std::string& tray) const {
    std::vector<GraspSet> out;
    for (const auto& o : task(tray).objects) {
        out.push_back(GraspSet{o.id, o.grasps, o.pose});
    }
    return out;
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

[[noreturn]] void fail(const char* code, const std::string& path, const std::string& msg) {
    throw SceneError(code, path, msg);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) {
        fail("SCENE_TYPE", path, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        fail("SCENE_MISSING_FIELD", join(path, key), "required field is missing");
    }
    return *it;
}

const json* optional_field(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        fail("SCENE_TYPE", path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        fail("SCENE_INVALID", path, "number must be finite");
    }
    return v;
}

double positive(const json& j, const std::string& path) {
    const double v = number(j, path);
    if (!(v > 0.0)) {
        fail("SCENE_NONPOSITIVE", path, "must be > 0");
    }
    return v;
}

const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) {
        fail("SCENE_TYPE", path, "expected an array");
    }
    return j;
}

template <std::size_t N>
std::array<double, N> numbers(const json& j, const std::string& path) {
    array(j, path);
    if (j.size() != N) {
        fail("SCENE_TYPE", path, "expected " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = number(j[i], join(path, i));
    }
    return out;
}

Pose6 pose(const json& j, const std::string& path) { return Pose6::from_values(numbers<6>(j, path)); }

std::string identifier(const json& j, const std::string& path) {
    if (!j.is_string()) {
        fail("SCENE_TYPE", path, "expected a string");
    }
    const auto s = j.get<std::string>();
    const bool ok = !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
    if (!ok) {
        fail("SCENE_BAD_ID", path, "ids use letters, digits, '_', '-' or '.' only, got '" + s + "'");
    }
    return s;
}

ShapeSpec shape(const json& j, const std::string& path) {
    const json& type = field(j, "type", path);
    if (!type.is_string()) {
        fail("SCENE_TYPE", join(path, "type"), "expected a string");
    }
    const auto t = type.get<std::string>();
    ShapeSpec s;
    if (t == "sphere") {
        s.kind = ShapeSpec::Kind::Sphere;
        s.center = numbers<3>(field(j, "center", path), join(path, "center"));
        s.radius = positive(field(j, "radius", path), join(path, "radius"));
    } else if (t == "capsule") {
        s.kind = ShapeSpec::Kind::Capsule;
        s.p0 = numbers<3>(field(j, "p0", path), join(path, "p0"));
        s.p1 = numbers<3>(field(j, "p1", path), join(path, "p1"));
        s.radius = positive(field(j, "radius", path), join(path, "radius"));
    } else if (t == "box") {
        s.kind = ShapeSpec::Kind::Box;
        s.pose = pose(field(j, "pose", path), join(path, "pose"));
        s.half_extents = numbers<3>(field(j, "half_extents", path), join(path, "half_extents"));
        for (std::size_t i = 0; i < 3; ++i) {
            if (!(s.half_extents[i] > 0.0)) {
                fail("SCENE_NONPOSITIVE", join(join(path, "half_extents"), i), "must be > 0");
            }
        }
    } else {
        fail("SCENE_INVALID", join(path, "type"), "unknown shape type '" + t + "'");
    }
    return s;
}

std::vector<ShapeSpec> shapes(const json& j, const std::string& path) {
    std::vector<ShapeSpec> out;
    for (std::size_t i = 0; i < array(j, path).size(); ++i) {
        out.push_back(shape(j[i], join(path, i)));
    }
    return out;
}

int grid_count(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        fail("SCENE_TYPE", path, "expected an integer");
    }
    const auto v = j.get<long long>();
    if (v <= 0) {
        fail("SCENE_NONPOSITIVE", path, "must be > 0");
    }
    if (v > 100000) {
        fail("SCENE_INVALID", path, "grid dimension too large");
    }
    return static_cast<int>(v);
}

void claim(std::set<std::string>& ids, const std::string& id, const std::string& path) {
    if (!ids.insert(id).second) {
        fail("SCENE_DUPLICATE_ID", path, "id '" + id + "' is used twice");
    }
}

void parse_robot(const json& r, Scene& s) {
    const std::string path = "robot";
    const json& joints = array(field(r, "joints", path), join(path, "joints"));
    if (joints.empty()) {
        fail("SCENE_INVALID", join(path, "joints"), "robot needs at least one joint");
    }
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const std::string jp = join(join(path, "joints"), i);
        DhJoint dh;
        dh.a = number(field(joints[i], "a", jp), join(jp, "a"));
        dh.alpha = number(field(joints[i], "alpha", jp), join(jp, "alpha"));
        dh.d = number(field(joints[i], "d", jp), join(jp, "d"));
        if (const json* off = optional_field(joints[i], "theta_offset")) {
            dh.theta_offset = number(*off, join(jp, "theta_offset"));
        }
        if (const json* lo = optional_field(joints[i], "limit_lo")) {
            dh.limit_lo = number(*lo, join(jp, "limit_lo"));
        }
        if (const json* hi = optional_field(joints[i], "limit_hi")) {
            dh.limit_hi = number(*hi, join(jp, "limit_hi"));
        }
        if (!(dh.limit_lo < dh.limit_hi) || dh.limit_lo < -kTwoPi - 1e-12 || dh.limit_hi > kTwoPi + 1e-12) {
            fail("SCENE_INVALID", jp, "joint limits must satisfy -2pi <= lo < hi <= 2pi");
        }
        s.chain.joints.push_back(dh);
    }
    if (const json* tool = optional_field(r, "tool")) {
        s.chain.tool = pose(*tool, join(path, "tool"));
    }
    const json& links = array(field(r, "links", path), join(path, "links"));
    if (links.size() != joints.size() + 1) {
        fail("SCENE_INVALID", join(path, "links"),
             "expected " + std::to_string(joints.size() + 1) + " links (base first)");
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
        const std::string lp = join(join(path, "links"), i);
        s.links.push_back(shapes(field(links[i], "shapes", lp), join(lp, "shapes")));
    }
    if (const json* pairs = optional_field(r, "self_collision")) {
        const std::string pp = join(path, "self_collision");
        for (std::size_t i = 0; i < array(*pairs, pp).size(); ++i) {
            const std::string ep = join(pp, i);
            const auto v = numbers<2>((*pairs)[i], ep);
            const auto a = static_cast<std::size_t>(v[0]);
            const auto b = static_cast<std::size_t>(v[1]);
            if (v[0] < 0 || v[1] < 0 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]) || a >= links.size() ||
                b >= links.size() || (a > b ? a - b : b - a) < 2) {
                fail("SCENE_INVALID", ep, "self-collision pairs name two non-adjacent links");
            }
            s.self_pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    if (const json* h = optional_field(r, "heading")) {
        s.heading = number(*h, join(path, "heading"));
    }
}

Scene parse_document(const json& doc) {
    if (!doc.is_object()) {
        fail("SCENE_TYPE", "", "scene must be a JSON object");
    }
    Scene s;
    parse_robot(field(doc, "robot", ""), s);

    std::set<std::string> ids;
    const json& world = field(doc, "world", "");
    const json& trays = array(field(world, "trays", "world"), "world.trays");
    for (std::size_t i = 0; i < trays.size(); ++i) {
        const std::string tp = join("world.trays", i);
        SceneTray t;
        t.id = identifier(field(trays[i], "id", tp), join(tp, "id"));
        claim(ids, t.id, join(tp, "id"));
        t.pose = pose(field(trays[i], "pose", tp), join(tp, "pose"));
        t.shapes = shapes(field(trays[i], "shapes", tp), join(tp, "shapes"));
        s.trays.push_back(std::move(t));
    }
    if (const json* obstacles = optional_field(world, "obstacles")) {
        for (std::size_t i = 0; i < array(*obstacles, "world.obstacles").size(); ++i) {
            const std::string op = join("world.obstacles", i);
            SceneObstacle o;
            if (const json* id = (*obstacles)[i].is_object() ? optional_field((*obstacles)[i], "id") : nullptr) {
                o.id = identifier(*id, join(op, "id"));
                claim(ids, o.id, join(op, "id"));
            }
            o.shape = shape((*obstacles)[i], op);
            s.obstacles.push_back(std::move(o));
        }
    }

    const json& tasks = array(field(doc, "tasks", ""), "tasks");
    std::set<std::string> task_trays;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string tp = join("tasks", i);
        SceneTask task;
        task.tray = identifier(field(tasks[i], "tray", tp), join(tp, "tray"));
        const bool known = std::any_of(s.trays.begin(), s.trays.end(),
                                       [&](const SceneTray& t) { return t.id == task.tray; });
        if (!known) {
            fail("SCENE_UNKNOWN_TRAY", join(tp, "tray"), "tray '" + task.tray + "' is not in the world");
        }
        if (!task_trays.insert(task.tray).second) {
            fail("SCENE_DUPLICATE_ID", join(tp, "tray"), "tray '" + task.tray + "' has two tasks");
        }
        const json& objects = array(field(tasks[i], "objects", tp), join(tp, "objects"));
        for (std::size_t k = 0; k < objects.size(); ++k) {
            const std::string op = join(join(tp, "objects"), k);
            SceneObject o;
            o.id = identifier(field(objects[k], "id", op), join(op, "id"));
            claim(ids, o.id, join(op, "id"));
            o.pose = pose(field(objects[k], "pose", op), join(op, "pose"));
            const json& grasps = array(field(objects[k], "grasps", op), join(op, "grasps"));
            if (grasps.empty()) {
                fail("SCENE_EMPTY_GRASPSET", join(op, "grasps"), "object '" + o.id + "' has no grasps");
            }
            for (std::size_t g = 0; g < grasps.size(); ++g) {
                o.grasps.push_back(pose(grasps[g], join(join(op, "grasps"), g)));
            }
            if (const json* sh = optional_field(objects[k], "shapes")) {
                o.shapes = shapes(*sh, join(op, "shapes"));
            }
            task.objects.push_back(std::move(o));
        }
        s.tasks.push_back(std::move(task));
    }

    const json& grid = field(doc, "grid", "");
    s.grid.x0 = number(field(grid, "x0", "grid"), "grid.x0");
    s.grid.y0 = number(field(grid, "y0", "grid"), "grid.y0");
    s.grid.cell = positive(field(grid, "cell", "grid"), "grid.cell");
    s.grid.width = grid_count(field(grid, "width", "grid"), "grid.width");
    s.grid.height = grid_count(field(grid, "height", "grid"), "grid.height");
    s.grid.heading = s.heading;

    if (const json* u = optional_field(doc, "uncertainty")) {
        s.uncertainty.sigma = number(field(*u, "sigma", "uncertainty"), "uncertainty.sigma");
        if (s.uncertainty.sigma < 0.0) {
            fail("SCENE_INVALID", "uncertainty.sigma", "must be >= 0");
        }
        if (const json* m = optional_field(*u, "model")) {
            if (!m->is_string()) {
                fail("SCENE_TYPE", "uncertainty.model", "expected a string");
            }
            try {
                s.uncertainty.model = parse_error_model(m->get<std::string>());
            } catch (const ContractError& e) {
                fail("SCENE_INVALID", "uncertainty.model", e.what());
            }
        }
        if (const json* seed = optional_field(*u, "seed")) {
            if (!seed->is_number_unsigned()) {
                fail("SCENE_TYPE", "uncertainty.seed", "expected a non-negative integer");
            }
            s.uncertainty.seed = seed->get<std::uint64_t>();
        }
    }
    auto point = [&](const char* key) {
        const auto v = numbers<2>(field(doc, key, ""), key);
        return Point2{v[0], v[1]};
    };
    s.start = point("start");
    s.goal = point("goal");
    if (const json* m = optional_field(doc, "grasp_mask")) {
        array(*m, "grasp_mask");
        if (m->size() != 6) {
            fail("SCENE_TYPE", "grasp_mask", "expected 6 booleans");
        }
        for (std::size_t i = 0; i < 6; ++i) {
            if (!(*m)[i].is_boolean()) {
                fail("SCENE_TYPE", join("grasp_mask", i), "expected a boolean");
            }
            s.grasp_mask.constrained[i] = (*m)[i].get<bool>();
        }
    }
    return s;
}

} // namespace

Scene parse_scene(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        const auto pos = msg.find("syntax error");
        throw SceneError("SCENE_SYNTAX", "", "line " + std::to_string(line) + " column " + std::to_string(col) +
                                                 ": " + (pos == std::string::npos ? msg : msg.substr(pos)));
    }
    return parse_document(doc);
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open scene file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

namespace {

// Minimal document tree for the canonical emitter: keys sorted by std::map.
struct Node {
    enum class Kind { Number, Integer, Boolean, String, Array, Object } kind = Kind::Object;
    std::string scalar;
    std::vector<Node> items;
    std::map<std::string, Node> fields;

    static Node number(double v) { return {Kind::Number, format_number(v, 9), {}, {}}; }
    static Node integer(long long v) { return {Kind::Integer, std::to_string(v), {}, {}}; }
    static Node boolean(bool v) { return {Kind::Boolean, v ? "true" : "false", {}, {}}; }
    static Node string(const std::string& v) { return {Kind::String, json(v).dump(), {}, {}}; }
    static Node array() { return {Kind::Array, {}, {}, {}}; }
    static Node object() { return {Kind::Object, {}, {}, {}}; }

    template <class Range>
    static Node numbers(const Range& r) {
        Node n = array();
        for (double v : r) {
            n.items.push_back(number(v));
        }
        return n;
    }

    bool flat() const {
        return std::all_of(items.begin(), items.end(),
                           [](const Node& c) { return c.kind != Kind::Array && c.kind != Kind::Object; });
    }

    void write(std::string& out, int indent) const {
        const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
        const std::string close(static_cast<std::size_t>(indent), ' ');
        switch (kind) {
        case Kind::Array:
            if (items.empty()) {
                out += "[]";
            } else if (flat()) {
                out += '[';
                for (std::size_t i = 0; i < items.size(); ++i) {
                    out += (i ? ", " : "") + items[i].scalar;
                }
                out += ']';
            } else {
                out += "[\n";
                for (std::size_t i = 0; i < items.size(); ++i) {
                    out += pad;
                    items[i].write(out, indent + 2);
                    out += i + 1 < items.size() ? ",\n" : "\n";
                }
                out += close + "]";
            }
            break;
        case Kind::Object:
            if (fields.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            for (auto it = fields.begin(); it != fields.end(); ++it) {
                out += pad + json(it->first).dump() + ": ";
                it->second.write(out, indent + 2);
                out += std::next(it) != fields.end() ? ",\n" : "\n";
            }
            out += close + "}";
            break;
        default:
            out += scalar;
        }
    }
};

Node emit_shape(const ShapeSpec& s) {
    Node n = Node::object();
    switch (s.kind) {
    case ShapeSpec::Kind::Sphere:
        n.fields["type"] = Node::string("sphere");
        n.fields["center"] = Node::numbers(s.center);
        n.fields["radius"] = Node::number(s.radius);
        break;
    case ShapeSpec::Kind::Capsule:
        n.fields["type"] = Node::string("capsule");
        n.fields["p0"] = Node::numbers(s.p0);
        n.fields["p1"] = Node::numbers(s.p1);
        n.fields["radius"] = Node::number(s.radius);
        break;
    case ShapeSpec::Kind::Box:
        n.fields["type"] = Node::string("box");
        n.fields["pose"] = Node::numbers(s.pose.values());
        n.fields["half_extents"] = Node::numbers(s.half_extents);
        break;
    }
    return n;
}

Node emit_shapes(const std::vector<ShapeSpec>& shapes) {
    Node n = Node::array();
    for (const auto& s : shapes) {
        n.items.push_back(emit_shape(s));
    }
    return n;
}

} // namespace

std::string emit_scene(const Scene& s) {
    Node robot = Node::object();
    Node joints = Node::array();
    for (const auto& j : s.chain.joints) {
        Node n = Node::object();
        n.fields["a"] = Node::number(j.a);
        n.fields["alpha"] = Node::number(j.alpha);
        n.fields["d"] = Node::number(j.d);
        n.fields["theta_offset"] = Node::number(j.theta_offset);
        n.fields["limit_lo"] = Node::number(j.limit_lo);
        n.fields["limit_hi"] = Node::number(j.limit_hi);
        joints.items.push_back(std::move(n));
    }
    robot.fields["joints"] = std::move(joints);
    robot.fields["tool"] = Node::numbers(s.chain.tool.values());
    Node links = Node::array();
    for (const auto& l : s.links) {
        Node n = Node::object();
        n.fields["shapes"] = emit_shapes(l);
        links.items.push_back(std::move(n));
    }
    robot.fields["links"] = std::move(links);
    Node pairs = Node::array();
    for (const auto& [a, b] : s.self_pairs) {
        Node p = Node::array();
        p.items.push_back(Node::integer(static_cast<long long>(a)));
        p.items.push_back(Node::integer(static_cast<long long>(b)));
        pairs.items.push_back(std::move(p));
    }
    robot.fields["self_collision"] = std::move(pairs);
    robot.fields["heading"] = Node::number(s.heading);

    Node trays = Node::array();
    for (const auto& t : s.trays) {
        Node n = Node::object();
        n.fields["id"] = Node::string(t.id);
        n.fields["pose"] = Node::numbers(t.pose.values());
        n.fields["shapes"] = emit_shapes(t.shapes);
        trays.items.push_back(std::move(n));
    }
    Node obstacles = Node::array();
    for (const auto& o : s.obstacles) {
        Node n = emit_shape(o.shape);
        if (!o.id.empty()) {
            n.fields["id"] = Node::string(o.id);
        }
        obstacles.items.push_back(std::move(n));
    }
    Node world = Node::object();
    world.fields["trays"] = std::move(trays);
    world.fields["obstacles"] = std::move(obstacles);

    Node tasks = Node::array();
    for (const auto& t : s.tasks) {
        Node n = Node::object();
        n.fields["tray"] = Node::string(t.tray);
        Node objects = Node::array();
        for (const auto& o : t.objects) {
            Node on = Node::object();
            on.fields["id"] = Node::string(o.id);
            on.fields["pose"] = Node::numbers(o.pose.values());
            Node grasps = Node::array();
            for (const auto& g : o.grasps) {
                grasps.items.push_back(Node::numbers(g.values()));
            }
            on.fields["grasps"] = std::move(grasps);
            on.fields["shapes"] = emit_shapes(o.shapes);
            objects.items.push_back(std::move(on));
        }
        n.fields["objects"] = std::move(objects);
        tasks.items.push_back(std::move(n));
    }

    Node grid = Node::object();
    grid.fields["x0"] = Node::number(s.grid.x0);
    grid.fields["y0"] = Node::number(s.grid.y0);
    grid.fields["cell"] = Node::number(s.grid.cell);
    grid.fields["width"] = Node::integer(s.grid.width);
    grid.fields["height"] = Node::integer(s.grid.height);

    Node unc = Node::object();
    unc.fields["sigma"] = Node::number(s.uncertainty.sigma);
    unc.fields["model"] = Node::string(to_string(s.uncertainty.model));
    unc.fields["seed"] = Node{Node::Kind::Integer, std::to_string(s.uncertainty.seed), {}, {}};

    Node mask = Node::array();
    for (bool b : s.grasp_mask.constrained) {
        mask.items.push_back(Node::boolean(b));
    }

    Node doc = Node::object();
    doc.fields["robot"] = std::move(robot);
    doc.fields["world"] = std::move(world);
    doc.fields["tasks"] = std::move(tasks);
    doc.fields["grid"] = std::move(grid);
    doc.fields["uncertainty"] = std::move(unc);
    doc.fields["start"] = Node::numbers(std::array<double, 2>{s.start.x, s.start.y});
    doc.fields["goal"] = Node::numbers(std::array<double, 2>{s.goal.x, s.goal.y});
    doc.fields["grasp_mask"] = std::move(mask);

    std::string out;
    doc.write(out, 0);
    out += '\n';
    return out;
}

} // namespace reachplan
