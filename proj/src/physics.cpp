#include "bubble/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bubble {

namespace {

struct Body {
    bool is_ball = false;
    bool is_static = false;
    ShapeGeom geom;
    Pose pose;
    Vec2 vel;
    double angvel = 0.0;
    double inv_mass = 0.0;
    double inv_inertia = 0.0;
    Material material = Material::Wood;
    ObjRef ref;
    std::vector<Vec2> poly;  // cached world polygon (blocks only)
    AABB box;
};

struct CPoint {
    Vec2 point;
    Vec2 r_a, r_b;
    double separation = 0.0;   // signed, negative = penetrating
    double target_vn = 0.0;    // lower bound on separating normal velocity
    double target_vt = 0.0;    // ball impacts: retained tangential velocity
    double approach0 = 0.0;    // pre-solve normal approach speed
    bool impact = false;       // restitution fired on this point
    double accum_n = 0.0;
    double accum_t = 0.0;
};

struct CPair {
    int ia = 0, ib = 0;
    Vec2 normal;  // pushes body ia away from body ib
    CPoint pts[2];
    int npts = 0;
    double friction = 0.0;
};

double pair_restitution(const Body& a, const Body& b, const SimParams& p) {
    if (!a.is_ball && !b.is_ball) return 0.0;  // blocks do not bounce
    const Body& other = a.is_ball ? b : a;
    return other.material == Material::Metal ? p.restitution_metal : p.restitution_wood;
}

Vec2 velocity_at(const Body& b, const Vec2& r) {
    return b.vel + Vec2{-b.angvel * r.y, b.angvel * r.x};
}

AABB body_aabb(const Body& b, double ball_radius) {
    if (b.is_ball) {
        return {b.pose.pos - Vec2{ball_radius, ball_radius},
                b.pose.pos + Vec2{ball_radius, ball_radius}};
    }
    AABB box = AABB::around(b.poly[0]);
    for (const Vec2& v : b.poly) box.include(v);
    box.expand(0.5);  // arc hull slack
    return box;
}

// --- polygon clipping manifold (reference/incident faces) ---

struct FaceQuery {
    double separation = -std::numeric_limits<double>::max();
    int face = 0;
};

FaceQuery max_separation(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    FaceQuery q;
    size_t n = a.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 normal = (a[(i + 1) % n] - a[i]).perp().normalized() * -1.0;
        double best = std::numeric_limits<double>::max();
        for (const Vec2& v : b) best = std::min(best, normal.dot(v - a[i]));
        if (best > q.separation) {
            q.separation = best;
            q.face = int(i);
        }
    }
    return q;
}

int incident_face(const std::vector<Vec2>& poly, const Vec2& ref_normal) {
    int best = 0;
    double best_dot = std::numeric_limits<double>::max();
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 normal = (poly[(i + 1) % n] - poly[i]).perp().normalized() * -1.0;
        double d = normal.dot(ref_normal);
        if (d < best_dot) {
            best_dot = d;
            best = int(i);
        }
    }
    return best;
}

int clip_points(Vec2 pts[2], const Vec2& plane_n, double offset) {
    Vec2 out[2];
    int n = 0;
    double d0 = plane_n.dot(pts[0]) - offset;
    double d1 = plane_n.dot(pts[1]) - offset;
    if (d0 <= 0.0) out[n++] = pts[0];
    if (d1 <= 0.0) out[n++] = pts[1];
    if (d0 * d1 < 0.0 && n < 2) {
        double t = d0 / (d0 - d1);
        out[n++] = pts[0] + (pts[1] - pts[0]) * t;
    }
    pts[0] = out[0];
    pts[1] = n > 1 ? out[1] : out[0];
    return n;
}

bool polygon_manifold(const Body& a, const Body& b, double margin, CPair& pair) {
    FaceQuery qa = max_separation(a.poly, b.poly);
    if (qa.separation > margin) return false;
    FaceQuery qb = max_separation(b.poly, a.poly);
    if (qb.separation > margin) return false;

    const std::vector<Vec2>* ref_poly;
    const std::vector<Vec2>* inc_poly;
    int ref_face;
    bool flip;  // reference face lives on b
    if (qb.separation > qa.separation + 1e-4) {
        ref_poly = &b.poly;
        inc_poly = &a.poly;
        ref_face = qb.face;
        flip = true;
    } else {
        ref_poly = &a.poly;
        inc_poly = &b.poly;
        ref_face = qa.face;
        flip = false;
    }

    size_t rn = ref_poly->size();
    Vec2 rv1 = (*ref_poly)[ref_face];
    Vec2 rv2 = (*ref_poly)[(ref_face + 1) % rn];
    Vec2 ref_normal = (rv2 - rv1).perp().normalized() * -1.0;
    Vec2 ref_tangent = (rv2 - rv1).normalized();

    int inc = incident_face(*inc_poly, ref_normal);
    size_t in = inc_poly->size();
    Vec2 pts[2] = {(*inc_poly)[inc], (*inc_poly)[(inc + 1) % in]};

    if (clip_points(pts, -ref_tangent, -ref_tangent.dot(rv1)) < 2) return false;
    if (clip_points(pts, ref_tangent, ref_tangent.dot(rv2)) < 2) return false;

    pair.npts = 0;
    for (int i = 0; i < 2; ++i) {
        double sep = ref_normal.dot(pts[i] - rv1);
        if (sep <= margin) {
            CPoint& cp = pair.pts[pair.npts++];
            cp.point = pts[i];
            cp.separation = sep;
        }
    }
    if (pair.npts == 0) return false;

    // normal must push body a away from b
    pair.normal = flip ? ref_normal : -ref_normal;
    return true;
}

struct StepScratch {
    std::vector<Body> bodies;
    std::vector<CPair> pairs;
};

void build_bodies(const WorldState& w, const Level& level, const SimParams& params,
                  StepScratch& s) {
    s.bodies.clear();
    Body ball;
    ball.is_ball = true;
    ball.pose.pos = w.ball.pos;
    ball.vel = w.ball.vel;
    double ball_mass = params.density * M_PI * level.ball_radius * level.ball_radius;
    ball.inv_mass = 1.0 / ball_mass;
    ball.inv_inertia = 0.0;  // the ball carries no spin state
    ball.ref = ObjRef::none();
    s.bodies.push_back(ball);

    for (size_t i = 0; i < w.blocks.size(); ++i) {
        const BlockState& bs = w.blocks[i];
        const BlockTemplate* tpl = level.find_template(w.block_ids[i]);
        Body b;
        b.geom = tpl ? tpl->geom : ShapeGeom{ShapeKind::Rect, bs.w, bs.h};
        b.geom.w = bs.w;
        b.geom.h = bs.h;
        b.pose = {bs.pos, bs.angle};
        b.vel = bs.vel;
        b.angvel = bs.angvel;
        double mass = params.density * b.geom.area();
        b.inv_mass = 1.0 / mass;
        b.inv_inertia = 1.0 / (mass * b.geom.inertia_per_mass());
        b.material = tpl ? tpl->material : Material::Wood;
        b.ref = ObjRef::block(w.block_ids[i]);
        b.poly = world_polygon(b.geom, b.pose);
        s.bodies.push_back(b);
    }
    for (size_t q = 0; q < level.env.size(); ++q) {
        Body b;
        b.is_static = true;
        b.geom = level.env[q].geom;
        b.pose = level.env[q].pose;
        b.ref = ObjRef::env(int(q));
        b.poly = world_polygon(b.geom, b.pose);
        s.bodies.push_back(b);
    }
}

void find_contacts(StepScratch& s, const Level& level, const SimParams& params,
                   bool speculative) {
    s.pairs.clear();
    double r = level.ball_radius;
    size_t n = s.bodies.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            Body& a = s.bodies[i];
            Body& b = s.bodies[j];
            if (a.is_static && b.is_static) continue;

            double speed = (a.vel - b.vel).norm() + std::abs(a.angvel) * 50.0 +
                           std::abs(b.angvel) * 50.0;
            double margin = params.contact_margin + (speculative ? speed * params.dt : 0.0);

            AABB ba = body_aabb(a, r);
            AABB bb = body_aabb(b, r);
            ba.expand(margin + 1.0);
            if (!ba.overlaps(bb)) continue;

            CPair pair;
            pair.ia = int(i);
            pair.ib = int(j);
            if (a.is_ball) {
                ClosestFeature f = closest_feature(b.geom, b.pose, a.pose.pos);
                double sep = f.separation - r;
                if (sep > margin) continue;
                pair.normal = f.normal;
                pair.npts = 1;
                pair.pts[0].point = f.point;
                pair.pts[0].separation = sep;
            } else {
                if (!polygon_manifold(a, b, speculative ? margin : params.contact_margin, pair))
                    continue;
            }
            s.pairs.push_back(pair);
        }
    }
}

}  // namespace

WorldState make_world(const Level& level, const Placement& p) {
    WorldState w;
    w.ball = level.ball_start;
    for (const PlacedBlock& e : p.entries) {
        const BlockTemplate* tpl = level.find_template(e.id);
        if (!tpl) throw LevelError("placement uses unknown template id " + std::to_string(e.id));
        BlockState bs;
        bs.pos = e.pose.pos;
        bs.angle = e.pose.angle;
        bs.w = tpl->geom.w;
        bs.h = tpl->geom.h;
        w.blocks.push_back(bs);
        w.block_ids.push_back(e.id);
    }
    return w;
}

namespace {

WorldState step_impl(const WorldState& w, const Level& level, const SimParams& params,
                     std::vector<Contact>* ball_contacts) {
    StepScratch s;
    build_bodies(w, level, params, s);
    find_contacts(s, level, params, true);

    // restitution targets from pre-gravity approach speeds
    for (CPair& pair : s.pairs) {
        Body& a = s.bodies[pair.ia];
        Body& b = s.bodies[pair.ib];
        double e = pair_restitution(a, b, params);
        bool ball_pair = a.is_ball || b.is_ball;
        pair.friction = ball_pair ? 0.0 : params.friction_block;
        for (int i = 0; i < pair.npts; ++i) {
            CPoint& cp = pair.pts[i];
            cp.r_a = cp.point - a.pose.pos;
            cp.r_b = cp.point - b.pose.pos;
            Vec2 vrel = velocity_at(a, cp.r_a) - velocity_at(b, cp.r_b);
            double vn = vrel.dot(pair.normal);
            cp.approach0 = -vn;
            double bound = -std::max(cp.separation, 0.0) / params.dt;
            // speculative restitution: fire at a distance only when the
            // extrapolated touch point really lands on this feature, so a
            // corner graze is not reflected as a full impact; the impulse
            // frame comes from the touch point, where the surface normal is
            // the one the ball will actually meet
            bool lands = cp.separation <= params.contact_margin;
            if (!lands && a.is_ball && -vn > params.bounce_speed_threshold) {
                double t_c = cp.separation / -vn;
                if (t_c <= params.dt * 1.5) {
                    Vec2 p_touch = a.pose.pos + a.vel * t_c;
                    ClosestFeature f_touch = closest_feature(b.geom, b.pose, p_touch);
                    if (f_touch.separation - level.ball_radius <= params.contact_margin * 2.0) {
                        lands = true;
                        pair.normal = f_touch.normal;
                        cp.point = f_touch.point;
                        cp.r_a = cp.point - a.pose.pos;
                        cp.r_b = cp.point - b.pose.pos;
                        vrel = velocity_at(a, cp.r_a) - velocity_at(b, cp.r_b);
                        vn = vrel.dot(pair.normal);
                        cp.approach0 = -vn;
                    }
                }
            }
            if (-vn > params.bounce_speed_threshold && e > 0.0 && lands) {
                cp.target_vn = std::max(e * -vn, bound);
                cp.impact = true;
                // tangential loss follows the retention model but can never
                // exceed what Coulomb friction could transmit in this impact
                double vt0 = vrel.dot(pair.normal.perp());
                double loss = std::min((1.0 - params.tangential_retention) * std::abs(vt0),
                                       params.friction_ball * (1.0 + e) * -vn);
                cp.target_vt = vt0 - (vt0 > 0.0 ? loss : -loss);
            } else {
                cp.target_vn = bound;
            }
        }
    }

    if (ball_contacts) {
        ball_contacts->clear();
        for (const CPair& pair : s.pairs) {
            const Body& a = s.bodies[pair.ia];
            const Body& b = s.bodies[pair.ib];
            if (!a.is_ball) continue;
            if (pair.pts[0].approach0 < -5.0) continue;  // separating, not a contact event
            // far speculative pairs that did not fire are not contact events yet
            if (pair.pts[0].separation > params.contact_margin && !pair.pts[0].impact) continue;
            Contact c;
            c.a = ObjRef::none();
            c.b = b.ref;
            c.point = pair.pts[0].point;
            c.normal = pair.normal;
            c.penetration = std::max(0.0, -pair.pts[0].separation);
            c.approach_speed = pair.pts[0].approach0;
            c.surface = surface_at(b.geom, b.pose, a.pose.pos, b.ref);
            ball_contacts->push_back(c);
        }
    }

    // an impact consumes the ball's whole step: the restitution target is
    // built on the pre-step approach, so gravity and travel are suspended
    bool ball_impact = false;
    for (const CPair& pair : s.pairs) {
        if (!s.bodies[pair.ia].is_ball) continue;
        for (int i = 0; i < pair.npts; ++i) ball_impact = ball_impact || pair.pts[i].impact;
    }

    // gravity, then speed cap
    double min_feature = std::numeric_limits<double>::max();
    for (const EnvBlock& e : level.env) min_feature = std::min(min_feature, std::min(e.geom.w, e.geom.h));
    for (const BlockTemplate& t : level.inventory)
        min_feature = std::min(min_feature, std::min(t.geom.w, t.geom.h));
    double cap = 0.9 * min_feature / params.dt;
    for (Body& b : s.bodies) {
        if (b.is_static) continue;
        if (b.is_ball && ball_impact) continue;
        b.vel.y += params.gravity * params.dt;
        double sp = b.vel.norm();
        if (sp > cap) b.vel = b.vel * (cap / sp);
    }

    // sequential impulses
    for (int it = 0; it < params.velocity_iterations; ++it) {
        for (CPair& pair : s.pairs) {
            Body& a = s.bodies[pair.ia];
            Body& b = s.bodies[pair.ib];
            const Vec2& n = pair.normal;
            Vec2 t = n.perp();
            for (int i = 0; i < pair.npts; ++i) {
                CPoint& cp = pair.pts[i];
                double kn = a.inv_mass + b.inv_mass;
                double ra_n = cp.r_a.cross(n), rb_n = cp.r_b.cross(n);
                kn += a.inv_inertia * ra_n * ra_n + b.inv_inertia * rb_n * rb_n;

                double vn = (velocity_at(a, cp.r_a) - velocity_at(b, cp.r_b)).dot(n);
                double dl = (cp.target_vn - vn) / kn;
                double new_accum = std::max(cp.accum_n + dl, 0.0);
                dl = new_accum - cp.accum_n;
                cp.accum_n = new_accum;
                Vec2 impulse = n * dl;
                a.vel += impulse * a.inv_mass;
                a.angvel += a.inv_inertia * cp.r_a.cross(impulse);
                b.vel -= impulse * b.inv_mass;
                b.angvel -= b.inv_inertia * cp.r_b.cross(impulse);

                // tangential stage: ball impacts retain a fixed fraction of
                // the tangential velocity (no spin state to absorb slip);
                // block contacts get Coulomb friction; resting ball contacts
                // roll freely and see only rolling resistance
                bool ball_pair = a.is_ball || b.is_ball;
                if (ball_pair && !cp.impact) continue;
                double kt = a.inv_mass + b.inv_mass;
                double ra_t = cp.r_a.cross(t), rb_t = cp.r_b.cross(t);
                kt += a.inv_inertia * ra_t * ra_t + b.inv_inertia * rb_t * rb_t;
                double vt = (velocity_at(a, cp.r_a) - velocity_at(b, cp.r_b)).dot(t);
                double dt_imp;
                if (ball_pair) {
                    dt_imp = (cp.target_vt - vt) / kt;
                    cp.accum_t += dt_imp;
                } else {
                    dt_imp = -vt / kt;
                    double max_f = pair.friction * cp.accum_n;
                    double new_t = std::clamp(cp.accum_t + dt_imp, -max_f, max_f);
                    dt_imp = new_t - cp.accum_t;
                    cp.accum_t = new_t;
                }
                Vec2 f_imp = t * dt_imp;
                a.vel += f_imp * a.inv_mass;
                a.angvel += a.inv_inertia * cp.r_a.cross(f_imp);
                b.vel -= f_imp * b.inv_mass;
                b.angvel -= b.inv_inertia * cp.r_b.cross(f_imp);
            }
        }
    }

    // rolling resistance on the deepest persistent ball contact
    {
        const CPair* best = nullptr;
        for (const CPair& pair : s.pairs) {
            if (!s.bodies[pair.ia].is_ball) continue;
            if (pair.pts[0].impact || pair.pts[0].accum_n <= 0.0) continue;
            if (!best || pair.pts[0].separation < best->pts[0].separation) best = &pair;
        }
        if (best) {
            Body& ball = s.bodies[0];
            const Body& other = s.bodies[best->ib];
            Vec2 t = best->normal.perp();
            double vt = (ball.vel - velocity_at(other, best->pts[0].r_b)).dot(t);
            double dv = std::min(std::abs(vt), params.rolling_resist * params.dt);
            ball.vel -= t * (vt > 0.0 ? dv : -dv);
        }
    }

    // integrate positions
    for (Body& b : s.bodies) {
        if (b.is_static) continue;
        if (b.is_ball && ball_impact) continue;
        b.pose.pos += b.vel * params.dt;
        b.pose.angle += b.angvel * params.dt;
        if (!b.is_ball) b.poly = world_polygon(b.geom, b.pose);
    }

    // positional penetration correction (projection, no velocity change)
    for (int it = 0; it < params.position_iterations; ++it) {
        find_contacts(s, level, params, false);
        for (const CPair& pair : s.pairs) {
            Body& a = s.bodies[pair.ia];
            Body& b = s.bodies[pair.ib];
            double inv_sum = a.inv_mass + b.inv_mass;
            if (inv_sum <= 0.0) continue;
            for (int i = 0; i < pair.npts; ++i) {
                double pen = -pair.pts[i].separation;
                if (pen <= params.slop) continue;
                double push = params.baumgarte * (pen - params.slop);
                a.pose.pos += pair.normal * (push * a.inv_mass / inv_sum);
                b.pose.pos -= pair.normal * (push * b.inv_mass / inv_sum);
            }
        }
        for (Body& b : s.bodies) {
            if (!b.is_static && !b.is_ball) b.poly = world_polygon(b.geom, b.pose);
        }
    }

    WorldState out;
    out.ball.pos = s.bodies[0].pose.pos;
    out.ball.vel = s.bodies[0].vel;
    out.block_ids = w.block_ids;
    for (size_t i = 0; i < w.blocks.size(); ++i) {
        const Body& b = s.bodies[1 + i];
        BlockState bs = w.blocks[i];
        bs.pos = b.pose.pos;
        bs.angle = b.pose.angle;
        bs.vel = b.vel;
        bs.angvel = b.angvel;
        out.blocks.push_back(bs);
    }
    out.step = w.step + 1;
    return out;
}

}  // namespace

WorldState step(const WorldState& w, const Level& level, const SimParams& params) {
    return step_impl(w, level, params, nullptr);
}

TrialRecord simulate(const Level& level, const Placement& p, const SimParams& params) {
    FeasibilityReport feas = placement_feasible(p, level);
    if (!feas.ok) {
        std::ostringstream os;
        os << "infeasible placement:";
        for (const std::string& v : feas.violations) os << "\n  - " << v;
        throw LevelError(os.str());
    }

    TrialRecord tr;
    WorldState w = make_world(level, p);
    tr.block_ids = w.block_ids;

    // contact labels for the initial state
    {
        StepScratch s;
        build_bodies(w, level, params, s);
        find_contacts(s, level, params, false);
        std::vector<Contact> cs;
        for (const CPair& pair : s.pairs) {
            const Body& a = s.bodies[pair.ia];
            const Body& b = s.bodies[pair.ib];
            if (!a.is_ball) continue;
            Contact c;
            c.b = b.ref;
            c.point = pair.pts[0].point;
            c.normal = pair.normal;
            c.penetration = std::max(0.0, -pair.pts[0].separation);
            c.approach_speed =
                -(velocity_at(a, pair.pts[0].point - a.pose.pos) -
                  velocity_at(b, pair.pts[0].point - b.pose.pos))
                     .dot(pair.normal);
            c.surface = surface_at(b.geom, b.pose, a.pose.pos, b.ref);
            cs.push_back(c);
        }
        tr.contacts.push_back(cs);
    }
    tr.trajectory.push_back({0, w.ball});
    tr.block_history.push_back(w.blocks);
    if (in_target_set(w.ball, level)) {
        tr.outcome = Outcome::ReachedTarget;
        tr.tau = 0;
        return tr;
    }

    for (int k = 1; k <= level.horizon; ++k) {
        std::vector<Contact> cs;
        w = step_impl(w, level, params, &cs);
        tr.contacts.push_back(cs);
        tr.trajectory.push_back({k, w.ball});
        tr.block_history.push_back(w.blocks);
        if (in_target_set(w.ball, level)) {
            tr.outcome = Outcome::ReachedTarget;
            tr.tau = k;
            return tr;
        }
    }
    tr.outcome = Outcome::Timeout;
    return tr;
}

namespace {

struct StepLabel {
    ContactType kind = ContactType::FreeFall;
    ObjRef object;
    bool operator==(const StepLabel& o) const { return kind == o.kind && object == o.object; }
    bool operator!=(const StepLabel& o) const { return !(*this == o); }
};

bool is_bounce(ContactType t) {
    return t == ContactType::BounceOffSegment || t == ContactType::BounceOffCircle;
}

}  // namespace

std::vector<Event> detect_events(const TrialRecord& tr) {
    std::vector<Event> events;
    if (tr.trajectory.empty()) return events;

    size_t n = tr.trajectory.size();
    std::vector<StepLabel> labels(n);
    for (size_t k = 0; k < n; ++k) {
        const std::vector<Contact>& cs = tr.contacts[k];
        if (cs.empty()) continue;
        const Contact* primary = &cs[0];
        for (const Contact& c : cs)
            if (c.penetration > primary->penetration) primary = &c;
        labels[k].kind = classify_speeds(std::max(primary->approach_speed, 0.0),
                                         primary->surface);
        labels[k].object = primary->b;
    }

    struct Run {
        int start, end;
        StepLabel label;
    };
    auto collapse = [](const std::vector<StepLabel>& ls) {
        std::vector<Run> runs;
        for (int k = 0; k < int(ls.size()); ++k) {
            if (!runs.empty() && runs.back().label == ls[k]) {
                runs.back().end = k;
            } else {
                runs.push_back({k, k, ls[k]});
            }
        }
        return runs;
    };

    std::vector<Run> runs = collapse(labels);

    // debounce: short non-impact runs are flicker; absorb them
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < runs.size(); ++i) {
            Run& r = runs[i];
            int len = r.end - r.start + 1;
            if (len >= 3 || is_bounce(r.label.kind)) continue;
            if (runs.size() == 1) break;
            if (i > 0 && i + 1 < runs.size() && runs[i - 1].label == runs[i + 1].label) {
                runs[i - 1].end = runs[i + 1].end;
                runs.erase(runs.begin() + i, runs.begin() + i + 2);
            } else if (i > 0) {
                runs[i - 1].end = r.end;
                runs.erase(runs.begin() + i);
            } else {
                runs[i + 1].start = r.start;
                runs.erase(runs.begin() + i);
            }
            changed = true;
            break;
        }
    }

    // merge adjacent equals left by absorption
    std::vector<Run> merged;
    for (const Run& r : runs) {
        if (!merged.empty() && merged.back().label == r.label) {
            merged.back().end = r.end;
        } else {
            merged.push_back(r);
        }
    }

    for (const Run& r : merged) {
        Event ev;
        ev.start_step = tr.trajectory[r.start].k;
        ev.end_step = tr.trajectory[r.end].k;
        ev.kind = r.label.kind;
        ev.object = r.label.object;
        events.push_back(ev);
    }
    return events;
}

std::string obj_ref_label(const ObjRef& o) {
    switch (o.kind) {
        case ObjRef::Kind::None: return "-";
        case ObjRef::Kind::Env: return "E" + std::to_string(o.index);
        case ObjRef::Kind::Block: return "B" + std::to_string(o.index);
    }
    return "-";
}

std::string trial_to_csv(const TrialRecord& tr) {
    std::vector<Event> events = detect_events(tr);
    std::ostringstream os;
    os << "k,x,y,vx,vy,event_kind,object_id\n";
    size_t ei = 0;
    for (const TrajSample& s : tr.trajectory) {
        while (ei + 1 < events.size() && s.k > events[ei].end_step) ++ei;
        const Event* ev = events.empty() ? nullptr : &events[ei];
        os << s.k << ',' << s.state.pos.x << ',' << s.state.pos.y << ',' << s.state.vel.x << ','
           << s.state.vel.y << ',' << (ev ? contact_type_name(ev->kind) : "FreeFall") << ','
           << (ev ? obj_ref_label(ev->object) : "-") << "\n";
    }
    return os.str();
}

}  // namespace bubble
