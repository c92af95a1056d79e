#include "bubble/level.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bubble {

using json = nlohmann::json;

const BlockTemplate* Level::find_template(int id) const {
    for (const BlockTemplate& t : inventory)
        if (t.id == id) return &t;
    return nullptr;
}

bool Placement::uses(int id) const {
    for (const PlacedBlock& e : entries)
        if (e.id == id) return true;
    return false;
}

namespace {

ShapeKind parse_shape(const std::string& s, const std::string& where,
                      std::vector<std::string>& errors) {
    if (s == "rectangle") return ShapeKind::Rect;
    if (s == "square") return ShapeKind::Square;
    if (s == "circle-segment") return ShapeKind::CircleSeg;
    errors.push_back(where + ": unknown shape '" + s + "'");
    return ShapeKind::Rect;
}

std::string shape_name(ShapeKind k) {
    switch (k) {
        case ShapeKind::Rect: return "rectangle";
        case ShapeKind::Square: return "square";
        case ShapeKind::CircleSeg: return "circle-segment";
    }
    return "rectangle";
}

Vec2 parse_vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

void require_finite(double v, const std::string& where, std::vector<std::string>& errors) {
    if (!std::isfinite(v)) errors.push_back(where + ": value is not finite");
}

}  // namespace

Level load_level(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw LevelError(std::string("level parse error: ") + e.what());
    }

    Level lv;
    std::vector<std::string> errors;
    try {
        if (j.contains("name")) lv.name = j.at("name").get<std::string>();
        const json& b = j.at("bounds");
        lv.bounds = {parse_vec2(json{b.at(0), b.at(1)}), parse_vec2(json{b.at(2), b.at(3)})};

        const json& ball = j.at("ball");
        const json& start = ball.at("start");
        lv.ball_start.pos = {start.at(0).get<double>(), start.at(1).get<double>()};
        lv.ball_start.vel = {start.at(2).get<double>(), start.at(3).get<double>()};
        lv.ball_radius = ball.at("radius").get<double>();

        const json& tgt = j.at("target");
        lv.target = parse_vec2(tgt.at("pos"));
        lv.target_eps = tgt.at("eps").get<double>();

        lv.horizon = j.at("horizon").get<int>();

        int qi = 0;
        for (const json& e : j.at("env")) {
            EnvBlock blk;
            std::string where = "env[" + std::to_string(qi) + "]";
            blk.geom.kind = parse_shape(e.at("shape").get<std::string>(), where, errors);
            blk.pose.pos = parse_vec2(e.at("pos"));
            blk.pose.angle = e.at("angle").get<double>();
            blk.geom.w = e.at("w").get<double>();
            blk.geom.h = e.at("h").get<double>();
            if (blk.geom.w <= 0.0 || blk.geom.h <= 0.0)
                errors.push_back(where + ": width and height must be positive");
            lv.env.push_back(blk);
            ++qi;
        }

        for (const json& t : j.at("inventory")) {
            BlockTemplate tpl;
            tpl.id = t.at("id").get<int>();
            std::string where = "inventory id " + std::to_string(tpl.id);
            tpl.geom.kind = parse_shape(t.at("shape").get<std::string>(), where, errors);
            tpl.geom.w = t.at("w").get<double>();
            tpl.geom.h = t.at("h").get<double>();
            std::string mat = t.at("material").get<std::string>();
            if (mat == "wood") tpl.material = Material::Wood;
            else if (mat == "metal") tpl.material = Material::Metal;
            else errors.push_back(where + ": unknown material '" + mat + "'");
            if (tpl.geom.w <= 0.0 || tpl.geom.h <= 0.0)
                errors.push_back(where + ": width and height must be positive");
            lv.inventory.push_back(tpl);
        }
    } catch (const json::exception& e) {
        throw LevelError(std::string("level schema error: ") + e.what());
    }

    // invariants
    std::set<int> seen;
    for (const BlockTemplate& t : lv.inventory) {
        if (!seen.insert(t.id).second)
            errors.push_back("inventory id " + std::to_string(t.id) + ": duplicate id");
    }
    require_finite(lv.ball_start.pos.x, "ball.start", errors);
    require_finite(lv.ball_start.pos.y, "ball.start", errors);
    require_finite(lv.ball_start.vel.x, "ball.start", errors);
    require_finite(lv.ball_start.vel.y, "ball.start", errors);
    if (lv.ball_radius <= 0.0) errors.push_back("ball.radius: must be positive");
    if (lv.horizon <= 0) errors.push_back("horizon: must be positive");
    if (!lv.bounds.contains(lv.ball_start.pos))
        errors.push_back("ball.start: outside level bounds");
    if (!lv.bounds.contains(lv.target)) errors.push_back("target.pos: outside level bounds");
    for (size_t q = 0; q < lv.env.size(); ++q) {
        if (circle_block_overlap_strict(lv.ball_start.pos, lv.ball_radius, lv.env[q].geom,
                                        lv.env[q].pose))
            errors.push_back("ball.start: penetrates env[" + std::to_string(q) + "]");
    }

    if (!errors.empty()) {
        std::ostringstream os;
        os << "level invariant violations:";
        for (const std::string& e : errors) os << "\n  - " << e;
        throw LevelError(os.str());
    }
    return lv;
}

Level load_level_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LevelError("cannot open level file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    Level lv = load_level(ss.str());
    if (lv.name.empty()) {
        size_t slash = path.find_last_of('/');
        std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        size_t dot = base.find_last_of('.');
        lv.name = dot == std::string::npos ? base : base.substr(0, dot);
    }
    return lv;
}

std::string save_level(const Level& lv) {
    json j;
    if (!lv.name.empty()) j["name"] = lv.name;
    j["bounds"] = {lv.bounds.lo.x, lv.bounds.lo.y, lv.bounds.hi.x, lv.bounds.hi.y};
    j["ball"] = {{"start", {lv.ball_start.pos.x, lv.ball_start.pos.y, lv.ball_start.vel.x,
                            lv.ball_start.vel.y}},
                 {"radius", lv.ball_radius}};
    j["target"] = {{"pos", {lv.target.x, lv.target.y}}, {"eps", lv.target_eps}};
    j["horizon"] = lv.horizon;
    j["env"] = json::array();
    for (const EnvBlock& e : lv.env) {
        j["env"].push_back({{"shape", shape_name(e.geom.kind)},
                            {"pos", {e.pose.pos.x, e.pose.pos.y}},
                            {"angle", e.pose.angle},
                            {"w", e.geom.w},
                            {"h", e.geom.h}});
    }
    j["inventory"] = json::array();
    for (const BlockTemplate& t : lv.inventory) {
        j["inventory"].push_back({{"id", t.id},
                                  {"shape", shape_name(t.geom.kind)},
                                  {"w", t.geom.w},
                                  {"h", t.geom.h},
                                  {"material", t.material == Material::Wood ? "wood" : "metal"}});
    }
    return j.dump(2) + "\n";
}

Placement load_placement(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw LevelError(std::string("placement parse error: ") + e.what());
    }
    Placement p;
    try {
        for (const json& e : j.at("placement")) {
            PlacedBlock blk;
            blk.id = e.at("id").get<int>();
            blk.pose.pos = parse_vec2(e.at("pos"));
            blk.pose.angle = e.at("angle").get<double>();
            p.entries.push_back(blk);
        }
    } catch (const json::exception& e) {
        throw LevelError(std::string("placement schema error: ") + e.what());
    }
    return p;
}

Placement load_placement_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LevelError("cannot open placement file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_placement(ss.str());
}

std::string save_placement(const Placement& p) {
    json j;
    j["placement"] = json::array();
    for (const PlacedBlock& e : p.entries) {
        j["placement"].push_back(
            {{"id", e.id}, {"pos", {e.pose.pos.x, e.pose.pos.y}}, {"angle", e.pose.angle}});
    }
    return j.dump(2) + "\n";
}

bool in_target_set(const BallState& s, const Level& level) {
    return dist(s.pos, level.target) <= level.target_eps;
}

namespace {

bool block_in_bounds(const ShapeGeom& g, const Pose& pose, const AABB& bounds) {
    for (const Vec2& v : world_polygon(g, pose))
        if (!bounds.contains(v)) return false;
    return true;
}

bool blocks_overlap(const ShapeGeom& ga, const Pose& pa, const ShapeGeom& gb, const Pose& pb) {
    return polygons_overlap_strict(world_polygon(ga, pa), world_polygon(gb, pb));
}

}  // namespace

FeasibilityReport placement_feasible(const Placement& p, const Level& level) {
    FeasibilityReport rep;
    std::set<int> used;

    for (size_t i = 0; i < p.entries.size(); ++i) {
        const PlacedBlock& e = p.entries[i];
        const BlockTemplate* tpl = level.find_template(e.id);
        if (!tpl) throw LevelError("placement uses unknown template id " + std::to_string(e.id));
        if (!used.insert(e.id).second) {
            rep.violations.push_back("template id " + std::to_string(e.id) + " used twice");
            continue;
        }
        std::string tag = "block " + std::to_string(e.id);
        if (!block_in_bounds(tpl->geom, e.pose, level.bounds))
            rep.violations.push_back(tag + " extends outside bounds");
        for (size_t q = 0; q < level.env.size(); ++q) {
            if (blocks_overlap(tpl->geom, e.pose, level.env[q].geom, level.env[q].pose))
                rep.violations.push_back(tag + " overlaps env[" + std::to_string(q) + "]");
        }
        if (circle_block_overlap_strict(level.ball_start.pos, level.ball_radius, tpl->geom,
                                        e.pose))
            rep.violations.push_back(tag + " overlaps the ball start");
        for (size_t k = 0; k < i; ++k) {
            const PlacedBlock& o = p.entries[k];
            const BlockTemplate* otpl = level.find_template(o.id);
            if (otpl && blocks_overlap(tpl->geom, e.pose, otpl->geom, o.pose))
                rep.violations.push_back(tag + " overlaps block " + std::to_string(o.id));
        }
    }
    rep.ok = rep.violations.empty();
    return rep;
}

}  // namespace bubble
