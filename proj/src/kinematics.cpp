#include "bubble/kinematics.hpp"

#include <cmath>

#include <json.hpp>

namespace bubble {

using json = nlohmann::json;

std::string contact_type_name(ContactType t) {
    switch (t) {
        case ContactType::FreeFall: return "FreeFall";
        case ContactType::RollOnSegment: return "RollOnSegment";
        case ContactType::BounceOffSegment: return "BounceOffSegment";
        case ContactType::BounceOffCircle: return "BounceOffCircle";
        case ContactType::SlideOnSegment: return "SlideOnSegment";
    }
    return "?";
}

const KinParams& KinParamsSet::for_type(ContactType t) const {
    switch (t) {
        case ContactType::RollOnSegment: return roll;
        case ContactType::BounceOffSegment: return bounce_seg;
        case ContactType::BounceOffCircle: return bounce_circle;
        case ContactType::SlideOnSegment: return slide;
        case ContactType::FreeFall: break;
    }
    return roll;  // FreeFall has no parameters; callers never use this slot
}

KinParams& KinParamsSet::for_type(ContactType t) {
    return const_cast<KinParams&>(static_cast<const KinParamsSet*>(this)->for_type(t));
}

namespace {
json params_to_json(const KinParams& p) {
    return {{"e_n", p.e_n}, {"e_t", p.e_t}, {"a_roll", p.a_roll}};
}
KinParams params_from_json(const json& j) {
    return {j.at("e_n").get<double>(), j.at("e_t").get<double>(), j.at("a_roll").get<double>()};
}
}  // namespace

std::string KinParamsSet::to_json() const {
    json j;
    j["RollOnSegment"] = params_to_json(roll);
    j["BounceOffSegment"] = params_to_json(bounce_seg);
    j["BounceOffCircle"] = params_to_json(bounce_circle);
    j["SlideOnSegment"] = params_to_json(slide);
    return j.dump(2) + "\n";
}

KinParamsSet KinParamsSet::from_json(const std::string& text) {
    json j = json::parse(text);
    KinParamsSet s;
    s.roll = params_from_json(j.at("RollOnSegment"));
    s.bounce_seg = params_from_json(j.at("BounceOffSegment"));
    s.bounce_circle = params_from_json(j.at("BounceOffCircle"));
    s.slide = params_from_json(j.at("SlideOnSegment"));
    return s;
}

Surface surface_at(const ShapeGeom& g, const Pose& pose, const Vec2& ball_pos, ObjRef owner) {
    ClosestFeature f = closest_feature(g, pose, ball_pos);
    Surface surf;
    surf.owner = owner;
    surf.normal = f.normal;

    if (f.on_arc) {
        surf.geom = Surface::Geom::Circle;
        surf.center = pose.to_world(g.arc_center_local());
        surf.radius = g.arc_radius();
        return surf;
    }

    std::vector<Vec2> poly = world_polygon(g, pose);
    if (f.edge_a >= 0) {
        Vec2 a = poly[f.edge_a];
        Vec2 b = poly[(f.edge_a + 1) % poly.size()];
        Vec2 edge_n = (b - a).perp().normalized() * -1.0;
        if (edge_n.dot(f.normal) > 0.996) {  // face contact, within ~5 deg
            surf.a = a;
            surf.b = b;
            return surf;
        }
    }
    // corner contact: tangent segment through the contact point
    Vec2 t = f.normal.perp();
    surf.a = f.point - t * 4.0;
    surf.b = f.point + t * 4.0;
    return surf;
}

ContactType classify_speeds(double approach_speed, const Surface& surf) {
    if (approach_speed >= kBounceSpeedThreshold) {
        return surf.geom == Surface::Geom::Circle ? ContactType::BounceOffCircle
                                                  : ContactType::BounceOffSegment;
    }
    // captured contact: roll, unless the incline exceeds the friction cone
    Vec2 t = surf.geom == Surface::Geom::Circle ? surf.normal.perp() : surf.tangent();
    double slope = std::abs(t.y) / std::max(std::abs(t.x), 1e-12);
    if (std::atan(slope) > std::atan(kFrictionBall)) return ContactType::SlideOnSegment;
    return ContactType::RollOnSegment;
}

ContactType classify(const BallState& ball, const Surface& surf) {
    double approach = -ball.vel.dot(surf.normal);
    return classify_speeds(std::max(approach, 0.0), surf);
}

std::optional<BallState> predict_freefall(const BallState& s, double dx) {
    if (dx == 0.0) return s;
    if (s.vel.x == 0.0) return std::nullopt;
    double t = dx / s.vel.x;
    BallState out = s;
    out.pos.x += dx;
    out.pos.y += s.vel.y * t + 0.5 * kGravity * t * t;
    out.vel.y += kGravity * t;
    return out;
}

std::optional<double> freefall_duration(const BallState& s, double dx) {
    if (dx == 0.0) return 0.0;
    if (s.vel.x == 0.0) return std::nullopt;
    return dx / s.vel.x;
}

BallState predict_freefall_y(const BallState& s, double dy) {
    BallState out = s;
    if (dy <= 0.0) return out;
    // solve 0.5 g t^2 + vy t = dy for the positive root
    double disc = s.vel.y * s.vel.y + 2.0 * kGravity * dy;
    double t = (-s.vel.y + std::sqrt(disc)) / kGravity;
    out.pos.x += s.vel.x * t;
    out.pos.y += dy;
    out.vel.y += kGravity * t;
    return out;
}

RollResult predict_roll(const BallState& s, const Surface& surf, const KinParams& beta) {
    RollResult res;
    Vec2 t = surf.tangent();
    double v0 = s.vel.dot(t);
    if (v0 < 0.0) {
        t = -t;
        v0 = -v0;
    }

    if (v0 <= 1e-9) {
        // from rest: motion can only start downhill, and only if gravity
        // along the slope beats the rolling resistance
        v0 = 0.0;
        if (t.y < 0.0) t = -t;  // downhill has a positive y component
        if (kGravity * t.y <= beta.a_roll) {
            res.exit = s;
            res.exit.vel = {0.0, 0.0};
            res.rest = true;
            return res;
        }
    }

    // tangential gravity minus resistance, resistance opposing motion
    double a = kGravity * t.y - beta.a_roll;

    // distance along t to the segment end the motion is heading for
    Vec2 contact = closest_point_on_segment(s.pos, surf.a, surf.b);
    double to_a = (surf.a - contact).dot(t);
    double to_b = (surf.b - contact).dot(t);
    double L = std::max(to_a, to_b);  // the endpoint ahead
    if (L <= 1e-9) L = 0.0;

    double t_exit = -1.0;
    if (std::abs(a) < 1e-9) {
        if (v0 > 1e-9) t_exit = L / v0;
    } else {
        double disc = v0 * v0 + 2.0 * a * L;
        if (disc >= 0.0) {
            double root = (-v0 + std::sqrt(disc)) / a;
            if (a > 0.0) {
                t_exit = root;
            } else {
                // decelerating: valid only if the end is reached before stopping
                double t_stop = v0 / -a;
                if (root >= 0.0 && root <= t_stop) t_exit = root;
            }
        }
    }

    if (t_exit < 0.0) {
        // comes to rest on the segment
        double t_stop = v0 / -a;
        double travel = v0 * t_stop + 0.5 * a * t_stop * t_stop;
        res.exit.pos = s.pos + t * travel;
        res.exit.vel = {0.0, 0.0};
        res.duration = t_stop;
        res.rest = true;
        return res;
    }

    double v_exit = v0 + a * t_exit;
    res.exit.pos = s.pos + t * (v0 * t_exit + 0.5 * a * t_exit * t_exit);
    res.exit.vel = t * v_exit;
    res.duration = t_exit;
    return res;
}

BallState predict_bounce(const BallState& s, const Surface& surf, const KinParams& beta) {
    Vec2 n = surf.normal;
    Vec2 t = n.perp();
    double vn = s.vel.dot(n);
    double vt = s.vel.dot(t);
    BallState out = s;
    out.vel = n * (-beta.e_n * vn) + t * (beta.e_t * vt);
    return out;
}

std::optional<Transition> event_transition(const BallState& s, const Surface* surf,
                                           ContactType j, double freefall_dx,
                                           const KinParamsSet& beta) {
    Transition tr;
    switch (j) {
        case ContactType::FreeFall: {
            auto out = predict_freefall(s, freefall_dx);
            if (!out) return std::nullopt;
            auto dur = freefall_duration(s, freefall_dx);
            tr.out = *out;
            tr.duration = *dur;
            return tr;
        }
        case ContactType::RollOnSegment:
        case ContactType::SlideOnSegment: {
            if (!surf) return std::nullopt;
            RollResult r = predict_roll(s, *surf, beta.for_type(j));
            tr.out = r.exit;
            tr.duration = r.duration;
            tr.terminal_rest = r.rest;
            return tr;
        }
        case ContactType::BounceOffSegment:
        case ContactType::BounceOffCircle: {
            if (!surf) return std::nullopt;
            tr.out = predict_bounce(s, *surf, beta.for_type(j));
            tr.duration = 0.0;
            return tr;
        }
    }
    return std::nullopt;
}

}  // namespace bubble
