#pragma once

#include <optional>
#include <string>

#include "bubble/constants.hpp"
#include "bubble/geometry.hpp"
#include "bubble/level.hpp"

namespace bubble {

struct ObjRef {
    enum class Kind { None, Env, Block };
    Kind kind = Kind::None;
    int index = -1;  // env index q or movable template id l

    bool operator==(const ObjRef& o) const { return kind == o.kind && index == o.index; }
    bool operator!=(const ObjRef& o) const { return !(*this == o); }
    static ObjRef none() { return {}; }
    static ObjRef env(int q) { return {Kind::Env, q}; }
    static ObjRef block(int l) { return {Kind::Block, l}; }
};

// the closed contact catalog: every simulator event maps to exactly one entry
enum class ContactType {
    FreeFall,
    RollOnSegment,
    BounceOffSegment,
    BounceOffCircle,
    SlideOnSegment,
};

std::string contact_type_name(ContactType t);

// per-contact-type model parameters (the beta vector refit after failed trials)
struct KinParams {
    double e_n = 0.0;    // normal restitution
    double e_t = 1.0;    // tangential retention
    double a_roll = 0.0; // rolling deceleration, px/s^2
};

struct KinParamsSet {
    KinParams roll{0.0, 1.0, kRollingResist};
    KinParams bounce_seg{kRestitutionWood, 0.9, 0.0};
    KinParams bounce_circle{kRestitutionWood, 0.9, 0.0};
    KinParams slide{0.0, 1.0, kRollingResist};

    const KinParams& for_type(ContactType t) const;
    KinParams& for_type(ContactType t);

    std::string to_json() const;
    static KinParamsSet from_json(const std::string& text);
};

// contacted geometry extracted from a block: a world-space segment or circle,
// with the outward normal on the ball's side
struct Surface {
    enum class Geom { Segment, Circle };
    Geom geom = Geom::Segment;
    Vec2 a, b;          // segment endpoints
    Vec2 center;        // circle center
    double radius = 0.0;
    Vec2 normal;        // unit, pointing toward the ball
    ObjRef owner;

    Vec2 tangent() const { return (b - a).normalized(); }
};

// surface under a ball touching the block; tangent-line fallback for corner
// and arc contacts so the segment models stay applicable
Surface surface_at(const ShapeGeom& g, const Pose& pose, const Vec2& ball_pos, ObjRef owner);

// shared classification rule, also used to label simulator contacts
ContactType classify_speeds(double approach_speed, const Surface& surf);
ContactType classify(const BallState& ball, const Surface& surf);

// closed-form ballistic flight over a horizontal distance dx; empty when
// vx == 0 and dx != 0 (no horizontal progress possible)
std::optional<BallState> predict_freefall(const BallState& s, double dx);
// vertical-drop overload over a downward distance dy >= 0
BallState predict_freefall_y(const BallState& s, double dy);
// flight duration for the dx form (same validity condition)
std::optional<double> freefall_duration(const BallState& s, double dx);

struct RollResult {
    BallState exit;     // state at the segment end, or the rest state
    double duration = 0.0;
    bool rest = false;  // stopped before reaching an endpoint
};

// constant-acceleration roll along the surface tangent until the contact
// point reaches a segment endpoint or the ball stops on flat/uphill ground
RollResult predict_roll(const BallState& s, const Surface& surf, const KinParams& beta);

// instantaneous reflection: v_n <- -e_n v_n, v_t <- e_t v_t, position unchanged
BallState predict_bounce(const BallState& s, const Surface& surf, const KinParams& beta);

struct Transition {
    BallState out;
    double duration = 0.0;
    bool terminal_rest = false;
};

// event-dependent transition dispatch; freefall_dx is consumed only by the
// FreeFall branch
std::optional<Transition> event_transition(const BallState& s, const Surface* surf,
                                           ContactType j, double freefall_dx,
                                           const KinParamsSet& beta);

}  // namespace bubble
