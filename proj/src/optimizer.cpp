#include "bubble/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace bubble {

namespace {

struct Scenery {
    // env plus frozen placements: everything static the chain can hit
    std::vector<ShapeGeom> geoms;
    std::vector<Pose> poses;
    std::vector<ObjRef> refs;
};

Scenery build_scenery(const RegionContext& ctx) {
    Scenery s;
    for (size_t q = 0; q < ctx.level->env.size(); ++q) {
        s.geoms.push_back(ctx.level->env[q].geom);
        s.poses.push_back(ctx.level->env[q].pose);
        s.refs.push_back(ObjRef::env(int(q)));
    }
    for (const PlacedBlock& e : ctx.frozen.entries) {
        const BlockTemplate* tpl = ctx.level->find_template(e.id);
        if (!tpl) continue;
        s.geoms.push_back(tpl->geom);
        s.poses.push_back(e.pose);
        s.refs.push_back(ObjRef::block(e.id));
    }
    return s;
}

double scenery_separation(const Scenery& s, const Vec2& p, double r, int* hit = nullptr) {
    double best = 1e18;
    for (size_t i = 0; i < s.geoms.size(); ++i) {
        double d = circle_block_separation(p, r, s.geoms[i], s.poses[i]);
        if (d < best) {
            best = d;
            if (hit) *hit = int(i);
        }
    }
    return best;
}

bool pose_overlaps_scenery(const RegionContext& ctx, const ShapeGeom& geom, const Pose& pose) {
    std::vector<Vec2> poly = world_polygon(geom, pose);
    for (const Vec2& v : poly)
        if (!ctx.level->bounds.contains(v)) return true;
    for (const EnvBlock& e : ctx.level->env)
        if (polygons_overlap_strict(poly, world_polygon(e.geom, e.pose))) return true;
    for (const PlacedBlock& e : ctx.frozen.entries) {
        const BlockTemplate* tpl = ctx.level->find_template(e.id);
        if (tpl && polygons_overlap_strict(poly, world_polygon(tpl->geom, e.pose))) return true;
    }
    if (circle_block_overlap_strict(ctx.level->ball_start.pos, ctx.level->ball_radius, geom,
                                    pose))
        return true;
    return false;
}

// drop the pose straight down onto the first resting contact, if any within range
Pose settle_pose(const RegionContext& ctx, const ShapeGeom& geom, Pose pose, double max_drop) {
    if (pose_overlaps_scenery(ctx, geom, pose)) return pose;  // caller filters
    double hit_dy = -1.0;
    for (double dy = 2.0; dy <= max_drop; dy += 2.0) {
        Pose probe = pose;
        probe.pos.y += dy;
        if (pose_overlaps_scenery(ctx, geom, probe)) {
            hit_dy = dy;
            break;
        }
    }
    if (hit_dy < 0.0) return pose;
    double lo = hit_dy - 2.0, hi = hit_dy;
    for (int it = 0; it < 24; ++it) {
        double mid = (lo + hi) / 2.0;
        Pose probe = pose;
        probe.pos.y += mid;
        if (pose_overlaps_scenery(ctx, geom, probe)) hi = mid;
        else lo = mid;
    }
    pose.pos.y += lo;
    return pose;
}

// first recorded trajectory sample touching the block, or -1
int first_contact_step(const RegionContext& ctx, const ShapeGeom& geom, const Pose& pose,
                       double capture) {
    double r = ctx.level->ball_radius;
    for (const TrajSample& s : *ctx.trajectory) {
        if (circle_block_separation(s.state.pos, r, geom, pose) <= capture) return s.k;
    }
    return -1;
}

}  // namespace

bool ScoredCandidate::operator<(const ScoredCandidate& o) const {
    if (cost != o.cost) return cost < o.cost;
    if (c.main_block != o.c.main_block) return c.main_block < o.c.main_block;
    if (c.e1 != o.c.e1) return c.e1 < o.c.e1;
    if (c.pose.pos.x != o.c.pose.pos.x) return c.pose.pos.x < o.c.pose.pos.x;
    if (c.pose.pos.y != o.c.pose.pos.y) return c.pose.pos.y < o.c.pose.pos.y;
    return c.pose.angle < o.c.pose.angle;
}

std::string candidate_key(const Candidate& c) {
    std::ostringstream os;
    os << c.main_block << '|' << std::llround(c.pose.pos.x * 10.0) << '|'
       << std::llround(c.pose.pos.y * 10.0) << '|' << std::llround(c.pose.angle * 1000.0);
    return os.str();
}

std::vector<Candidate> candidate_grid(const RegionContext& ctx,
                                      const std::vector<BlockTemplate>& inventory,
                                      GridResolution res, const Candidate* anchor,
                                      const OptimizerParams& params) {
    const LocalRegion& region = *ctx.region;
    std::vector<Candidate> out;
    std::set<std::string> seen;

    std::vector<int> e1s;
    if (res == GridResolution::Coarse) {
        const Vec2* last_pos = nullptr;
        for (size_t i = 0; i < region.gamma_in_loc.size(); i += params.coarse_e1_stride) {
            const TrajSample& s = region.gamma_in_loc[i];
            if (last_pos && dist(*last_pos, s.state.pos) < 3.0) continue;  // parked ball
            e1s.push_back(s.k);
            last_pos = &s.state.pos;
        }
    } else {
        int lo = anchor->e1 - params.coarse_e1_stride;
        int hi = anchor->e1 + params.coarse_e1_stride;
        for (const TrajSample& s : region.gamma_in_loc)
            if (s.k >= lo && s.k <= hi) e1s.push_back(s.k);
    }
    if (e1s.empty()) throw EmptyGridError("local region holds no trajectory samples");

    std::mt19937_64 rng(params.seed);
    auto jitter = [&](double scale) {
        if (!params.random_shooting) return 0.0;
        std::uniform_real_distribution<double> d(-scale / 2.0, scale / 2.0);
        return d(rng);
    };

    int loc_first = region.gamma_in_loc.front().k;
    int loc_last = region.gamma_in_loc.back().k;

    // settle and filter each pose once, then bind it to the e1 hypotheses
    // matching its actual first contact with the recorded path
    auto add_pose = [&](int l, const ShapeGeom& geom, Pose pose) {
        pose = settle_pose(ctx, geom, pose, params.settle_max_drop);
        if (!ctx.region->rect.contains(pose.pos)) return;
        if (pose_overlaps_scenery(ctx, geom, pose)) return;
        Candidate c{0, l, pose};
        std::string key = candidate_key(c);
        if (!seen.insert(key).second) return;
        int k_star = first_contact_step(ctx, geom, pose, params.contact_capture);
        if (k_star < loc_first || k_star > loc_last) return;
        int best_e1 = -1;
        for (int e1 : e1s)
            if (std::abs(e1 - k_star) <= params.e1_tolerance &&
                (best_e1 < 0 || std::abs(e1 - k_star) < std::abs(best_e1 - k_star)))
                best_e1 = e1;
        if (best_e1 < 0) return;
        c.e1 = best_e1;
        out.push_back(c);
    };

    if (res == GridResolution::Coarse) {
        for (const BlockTemplate& tpl : inventory) {
            bool sym = tpl.geom.kind != ShapeKind::CircleSeg;  // rectangles are pi-periodic
            double span = sym ? M_PI : 2.0 * M_PI;
            int n_angles = std::max(1, int(std::round(span / params.coarse_angle)));
            for (int ai = 0; ai < n_angles; ++ai) {
                double angle = ai * params.coarse_angle + jitter(params.coarse_angle);
                for (double y = region.rect.lo.y + params.coarse_xy / 2.0;
                     y < region.rect.hi.y; y += params.coarse_xy) {
                    for (double x = region.rect.lo.x + params.coarse_xy / 2.0;
                         x < region.rect.hi.x; x += params.coarse_xy) {
                        add_pose(tpl.id, tpl.geom,
                                 {{x + jitter(params.coarse_xy), y + jitter(params.coarse_xy)},
                                  angle});
                    }
                }
            }
        }
    } else {
        const BlockTemplate* tpl = ctx.level->find_template(anchor->main_block);
        if (!tpl) throw EmptyGridError("anchor template missing from the level inventory");
        // the anchor always survives into the fine grid
        out.push_back(*anchor);
        seen.insert(candidate_key(*anchor));
        for (double da = -3.0; da <= 3.0; da += 1.0) {
            double angle = anchor->pose.angle + da * params.fine_angle;
            for (double dy = -4.0; dy <= 4.0; dy += 1.0) {
                for (double dx = -4.0; dx <= 4.0; dx += 1.0) {
                    add_pose(anchor->main_block, tpl->geom,
                             {{anchor->pose.pos.x + dx * params.fine_xy,
                               anchor->pose.pos.y + dy * params.fine_xy},
                              angle});
                }
            }
        }
    }

    if (out.empty()) throw EmptyGridError("no feasible candidate in the local region");
    return out;
}

namespace {

struct ChainTracker {
    const RegionContext* ctx;
    double best_dist = 1e18;
    bool through_target = false;

    void visit(const Vec2& p) {
        double d = dist(p, ctx->target.center);
        if (d < best_dist) best_dist = d;
        if (ctx->target.contains(p)) through_target = true;
    }
};

// march a ballistic arc until it hits scenery, leaves the region, or times out
struct MarchResult {
    bool hit = false;
    bool through_main = false;  // predicted path re-enters the Main Block
    int scenery_index = -1;
    BallState state;  // at the hit or at the exit point
};

MarchResult march_freefall(const RegionContext& ctx, const Scenery& sc, const BallState& from,
                           const ShapeGeom* main_geom, const Pose* main_pose,
                           ChainTracker& track) {
    MarchResult res;
    double r = ctx.level->ball_radius;
    AABB roam = ctx.region->rect;
    roam.expand(150.0);

    auto state_at = [&](double t) {
        BallState s = from;
        s.pos.x += from.vel.x * t;
        s.pos.y += from.vel.y * t + 0.5 * kGravity * t * t;
        s.vel.y += kGravity * t;
        return s;
    };

    double t = 0.0;
    double arclen = 0.0;
    BallState prev = from;
    for (int i = 0; i < 2000; ++i) {
        double speed = std::max(prev.vel.norm(), 40.0);
        double dt_step = 5.0 / speed;
        t += dt_step;
        BallState cur = state_at(t);
        arclen += dist(prev.pos, cur.pos);
        track.visit(cur.pos);
        if (main_geom && arclen > 8.0 &&
            circle_block_separation(cur.pos, r, *main_geom, *main_pose) < -1.0) {
            // refine back to the touch instant
            double lo = t - dt_step, hi = t;
            for (int it = 0; it < 20; ++it) {
                double mid = (lo + hi) / 2.0;
                if (circle_block_separation(state_at(mid).pos, r, *main_geom, *main_pose) <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            res.through_main = true;
            res.state = state_at(lo);
            return res;
        }
        int hit = -1;
        if (scenery_separation(sc, cur.pos, r, &hit) <= 0.0) {
            // refine the contact instant
            double lo = t - dt_step, hi = t;
            for (int it = 0; it < 20; ++it) {
                double mid = (lo + hi) / 2.0;
                if (scenery_separation(sc, state_at(mid).pos, r) <= 0.0) hi = mid;
                else lo = mid;
            }
            res.hit = true;
            res.state = state_at(hi);
            scenery_separation(sc, res.state.pos, r, &res.scenery_index);
            return res;
        }
        if (!roam.contains(cur.pos)) {
            res.state = cur;
            return res;
        }
        prev = cur;
    }
    res.state = prev;
    return res;
}

// roll along a surface, truncated early if the path runs into other scenery
struct RollChain {
    BallState end;
    bool rest = false;
    bool interrupted = false;  // stopped by scenery contact mid-roll
    int scenery_index = -1;
};

RollChain roll_with_path(const RegionContext& ctx, const Scenery& sc, int skip_index,
                         const BallState& s, const Surface& surf, const KinParams& beta,
                         ChainTracker& track) {
    RollChain out;
    RollResult rr = predict_roll(s, surf, beta);
    out.end = rr.exit;
    out.rest = rr.rest;

    double r = ctx.level->ball_radius;
    double travel = dist(s.pos, rr.exit.pos);
    int steps = std::max(1, int(travel / 5.0));
    for (int i = 1; i <= steps; ++i) {
        double f = double(i) / steps;
        Vec2 p = s.pos + (rr.exit.pos - s.pos) * f;
        track.visit(p);
        int hit = -1;
        double best = 1e18;
        for (size_t q = 0; q < sc.geoms.size(); ++q) {
            if (int(q) == skip_index) continue;
            double d = circle_block_separation(p, r, sc.geoms[q], sc.poses[q]);
            if (d < best) {
                best = d;
                hit = int(q);
            }
        }
        if (best <= 0.0) {
            double v2 = s.vel.norm2() +
                        2.0 * (kGravity * surf.tangent().y - beta.a_roll) * travel * f;
            Vec2 dir = (rr.exit.pos - s.pos).normalized();
            out.end.pos = p;
            out.end.vel = dir * std::sqrt(std::max(v2, 0.0));
            out.interrupted = true;
            out.scenery_index = hit;
            return out;
        }
    }
    return out;
}

// smallest positive root of v t + a/2 t^2 = L, if any
std::optional<double> time_to_distance(double v, double a, double L) {
    if (std::abs(a) < 1e-12) {
        if (v <= 1e-12) return std::nullopt;
        return L / v;
    }
    double disc = v * v + 2.0 * a * L;
    if (disc < 0.0) return std::nullopt;
    double sq = std::sqrt(disc);
    double t1 = (-v - sq) / a, t2 = (-v + sq) / a;
    double best = 1e18;
    if (t1 > 1e-12) best = std::min(best, t1);
    if (t2 > 1e-12) best = std::min(best, t2);
    if (best == 1e18) return std::nullopt;
    return best;
}

struct MainContactOutcome {
    BallState exit;
    bool rest = false;
    bool airborne = false;
};

// forward-integrate the contact with the Main Block's face: closed-form
// bounce hops until the ball captures into rolling, leaves an end, or
// climbs away from the surface
MainContactOutcome main_segment_contact(const RegionContext& ctx, const Scenery& sc,
                                        const BallState& s_in, const Surface& surf,
                                        const KinParamsSet& beta, ChainTracker& track) {
    MainContactOutcome out;
    double r = ctx.level->ball_radius;
    const KinParams& bp = beta.for_type(ContactType::BounceOffSegment);
    Vec2 n = surf.normal;

    BallState state = s_in;
    for (int hop = 0; hop < 12; ++hop) {
        double approach = -state.vel.dot(n);
        if (approach < kBounceSpeedThreshold) {
            // captured: roll from here
            ContactType jr = classify(state, surf);
            if (jr == ContactType::RollOnSegment || jr == ContactType::SlideOnSegment) {
                RollChain rc = roll_with_path(ctx, sc, -1, state, surf, beta.for_type(jr), track);
                out.exit = rc.end;
                out.rest = rc.rest;
                out.airborne = !rc.rest;
                return out;
            }
            out.exit = state;
            out.airborne = true;
            return out;
        }

        // instantaneous bounce
        state = predict_bounce(state, surf, bp);
        track.visit(state.pos);
        double vn_out = state.vel.dot(n);
        double gn = kGravity * n.y;  // negative for an up-facing surface
        if (vn_out <= 1e-9 || gn >= -1e-6) {
            out.exit = state;
            out.airborne = true;
            return out;
        }

        Vec2 t = n.perp();
        double vt = state.vel.dot(t);
        if (vt < 0.0) {
            t = -t;
            vt = -vt;
        }
        double gt = kGravity * t.y;
        double t_return = 2.0 * vn_out / -gn;

        // does the hop carry the contact point past the segment end?
        Vec2 contact = closest_point_on_segment(state.pos, surf.a, surf.b);
        double ahead = std::max((surf.a - contact).dot(t), (surf.b - contact).dot(t));
        auto t_edge = time_to_distance(vt, gt, ahead);
        if (t_edge && *t_edge <= t_return) {
            double te = *t_edge;
            out.exit.pos = contact + t * ahead + n * (r + vn_out * te + 0.5 * gn * te * te);
            out.exit.vel = t * (vt + gt * te) + n * (vn_out + gn * te);
            out.airborne = true;
            track.visit(out.exit.pos);
            return out;
        }

        // re-landing state
        double ds = vt * t_return + 0.5 * gt * t_return * t_return;
        Vec2 new_contact = contact + t * ds;
        double apex_h = vn_out * vn_out / (2.0 * -gn);
        track.visit(contact + t * (ds / 2.0) + n * (r + apex_h));
        state.pos = new_contact + n * r;
        state.vel = t * (vt + gt * t_return) + n * -vn_out;
        track.visit(state.pos);
    }
    out.exit = state;
    out.rest = true;
    return out;
}

}  // namespace

EvalResult evaluate(const RegionContext& ctx, const Candidate& c,
                    const OptimizerParams& params) {
    EvalResult res;
    const Level& level = *ctx.level;
    const BlockTemplate* tpl = level.find_template(c.main_block);
    if (!tpl) return res;
    const std::vector<TrajSample>& traj = *ctx.trajectory;

    // first trajectory sample touching the block; contacts before the local
    // window would disturb the recorded approach
    int k_star = first_contact_step(ctx, tpl->geom, c.pose, params.contact_capture);
    if (k_star < 0) return res;  // never intersects the incoming path
    int loc_first = ctx.region->gamma_in_loc.front().k;
    int loc_last = ctx.region->gamma_in_loc.back().k;
    if (k_star < loc_first || k_star > loc_last) return res;
    if (std::abs(k_star - c.e1) > params.e1_tolerance) return res;
    res.contact_step = k_star;

    Scenery sc = build_scenery(ctx);
    ChainTracker track{&ctx};

    // event 1: the full interaction with the Main Block, allowing the ball
    // to leave and re-land on it a couple of times before it moves on
    BallState cur = traj[k_star].state;
    track.visit(cur.pos);
    bool ended = false;

    for (int episode = 0; episode < 3 && !ended; ++episode) {
        Surface surf_l = surface_at(tpl->geom, c.pose, cur.pos, ObjRef::block(c.main_block));
        ContactType j_l = classify(cur, surf_l);
        if (episode == 0) res.chain.push_back({j_l, cur});

        BallState s2;
        bool rest_after = false;
        if (j_l == ContactType::RollOnSegment || j_l == ContactType::SlideOnSegment) {
            RollChain rc = roll_with_path(ctx, sc, -1, cur, surf_l, ctx.beta.for_type(j_l), track);
            s2 = rc.end;
            rest_after = rc.rest;
        } else if (surf_l.geom == Surface::Geom::Segment) {
            MainContactOutcome out = main_segment_contact(ctx, sc, cur, surf_l, ctx.beta, track);
            s2 = out.exit;
            rest_after = out.rest;
        } else {
            s2 = predict_bounce(cur, surf_l, ctx.beta.for_type(j_l));
            if (s2.vel.dot(surf_l.normal) < 0.0) return res;  // wedged against the arc
        }
        track.visit(s2.pos);
        if (res.chain.size() < 2) res.chain.push_back({ContactType::FreeFall, s2});

        if (rest_after) break;  // degenerate chain: the ball parks on the block

        // event 2 -> 3: free fall; re-entering the Main Block starts another
        // contact episode instead of ending the chain
        MarchResult mr = march_freefall(ctx, sc, s2, &tpl->geom, &c.pose, track);
        if (mr.through_main) {
            cur = mr.state;
            continue;
        }
        if (!mr.hit) {
            res.chain.push_back({ContactType::FreeFall, mr.state});
        } else {
            BallState s3 = mr.state;
            const ShapeGeom& qgeom = sc.geoms[mr.scenery_index];
            const Pose& qpose = sc.poses[mr.scenery_index];
            Surface surf_q = surface_at(qgeom, qpose, s3.pos, sc.refs[mr.scenery_index]);
            ContactType j_q = classify(s3, surf_q);
            res.chain.push_back({j_q, s3});

            BallState s4;
            if (j_q == ContactType::RollOnSegment || j_q == ContactType::SlideOnSegment) {
                RollChain rc = roll_with_path(ctx, sc, mr.scenery_index, s3, surf_q,
                                              ctx.beta.for_type(j_q), track);
                s4 = rc.end;
            } else {
                s4 = predict_bounce(s3, surf_q, ctx.beta.for_type(j_q));
                if (scenery_separation(sc, s4.pos, ctx.level->ball_radius - 1.0) < -1.0)
                    return res;
            }
            track.visit(s4.pos);
            res.chain.push_back({ContactType::FreeFall, s4});
        }
        ended = true;
    }

    // the chain's achieved distance: its closest approach to the local
    // target, which equals the short-circuit value for through-chains and
    // never exceeds the final-state distance
    res.feasible = true;
    res.cost = track.best_dist;
    res.through_target = track.through_target;
    return res;
}

namespace {

std::vector<ScoredCandidate> rank_candidates(const RegionContext& ctx,
                                             const std::vector<Candidate>& cs,
                                             const OptimizerParams& params) {
    std::vector<ScoredCandidate> scored(cs.size());
    int jobs = std::max(1, params.jobs);
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            EvalResult r = evaluate(ctx, cs[i], params);
            scored[i] = {r.feasible ? r.cost : -1.0, cs[i]};
        }
    };
    if (jobs == 1 || cs.size() < 64) {
        work(0, cs.size());
    } else {
        std::vector<std::thread> threads;
        size_t chunk = (cs.size() + jobs - 1) / jobs;
        for (int t = 0; t < jobs; ++t) {
            size_t b = t * chunk, e = std::min(cs.size(), b + chunk);
            if (b < e) threads.emplace_back(work, b, e);
        }
        for (std::thread& t : threads) t.join();
    }
    std::vector<ScoredCandidate> feasible;
    for (const ScoredCandidate& s : scored)
        if (s.cost >= 0.0) feasible.push_back(s);
    std::sort(feasible.begin(), feasible.end());
    return feasible;
}

}  // namespace

LocalSolution solve_local(const RegionContext& ctx,
                          const std::vector<BlockTemplate>& inventory_remaining,
                          const OptimizerParams& params, const std::set<std::string>& banned) {
    using clock = std::chrono::steady_clock;
    if (inventory_remaining.empty())
        throw UnsolvableRegionError("no movable blocks left for this region");

    LocalSolution sol;

    // shared inventory minus the main block for support placement
    auto supports_for = [&](const Candidate& c,
                            int k_star) -> std::optional<std::vector<PlacedBlock>> {
        std::vector<BlockTemplate> rest;
        for (const BlockTemplate& t : inventory_remaining)
            if (t.id != c.main_block) rest.push_back(t);
        return place_supports(ctx, c, rest, k_star);
    };
    auto usable = [&](const ScoredCandidate& s, bool check_ban,
                      std::vector<PlacedBlock>& out_sup) {
        if (check_ban && banned.count(candidate_key(s.c))) return false;
        EvalResult ev = evaluate(ctx, s.c, params);
        if (!ev.feasible) return false;
        auto sup = supports_for(s.c, ev.contact_step);
        if (!sup) return false;
        Placement combined = ctx.frozen;
        combined.entries.push_back({s.c.main_block, s.c.pose});
        for (const PlacedBlock& p : *sup) combined.entries.push_back(p);
        if (!placement_feasible(combined, *ctx.level).ok) return false;
        out_sup = *sup;
        return true;
    };

    auto t0 = clock::now();
    std::vector<Candidate> coarse =
        candidate_grid(ctx, inventory_remaining, GridResolution::Coarse, nullptr, params);
    std::vector<ScoredCandidate> cg = rank_candidates(ctx, coarse, params);
    sol.cg_candidates = int(coarse.size());
    if (cg.empty()) {
        sol.cg_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        throw UnsolvableRegionError("every coarse candidate is infeasible in this region");
    }

    // the anchor is the best coarse candidate that is actually realizable
    const ScoredCandidate* anchor = nullptr;
    {
        std::vector<PlacedBlock> scratch;
        for (const ScoredCandidate& s : cg) {
            if (usable(s, false, scratch)) {
                anchor = &s;
                break;
            }
        }
    }
    sol.cg_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (!anchor)
        throw UnsolvableRegionError("no coarse candidate is supportable in this region");
    sol.cg_best_cost = anchor->cost;

    auto t1 = clock::now();
    std::vector<Candidate> fine =
        candidate_grid(ctx, inventory_remaining, GridResolution::Fine, &anchor->c, params);
    std::vector<ScoredCandidate> fg = rank_candidates(ctx, fine, params);
    sol.fg_candidates = int(fine.size());
    if (fg.empty()) throw UnsolvableRegionError("fine grid produced no feasible candidate");
    sol.fg_best_cost = fg.front().cost;

    const ScoredCandidate* chosen = nullptr;
    std::vector<PlacedBlock> supports;
    for (const ScoredCandidate& s : fg) {
        std::vector<PlacedBlock> sup;
        if (usable(s, true, sup)) {
            chosen = &s;
            supports = sup;
            break;
        }
    }
    // the fine grid can fail entirely on bans; fall back to coarse entries
    if (!chosen) {
        for (const ScoredCandidate& s : cg) {
            std::vector<PlacedBlock> sup;
            if (usable(s, true, sup)) {
                chosen = &s;
                supports = sup;
                break;
            }
        }
    }
    sol.fg_seconds = std::chrono::duration<double>(clock::now() - t1).count();
    if (!chosen)
        throw UnsolvableRegionError(
            "no candidate in this region is supportable and unbanned");

    sol.best = chosen->c;
    sol.cost = chosen->cost;
    sol.supporting = supports;
    sol.m0_patch = back_map(chosen->c, supports);
    return sol;
}

Placement back_map(const Candidate& main, const std::vector<PlacedBlock>& supports) {
    Placement p;
    p.entries.push_back({main.main_block, main.pose});
    for (const PlacedBlock& s : supports) p.entries.push_back(s);
    return p;
}

namespace {

// support points of a block resting on scenery: contact x-coords with
// upward-pushing normals, both corner-on-face and face-on-corner
std::vector<double> support_xs(const RegionContext& ctx, const ShapeGeom& geom,
                               const Pose& pose,
                               const std::vector<PlacedBlock>& extra) {
    std::vector<double> xs;
    std::vector<Vec2> poly = world_polygon(geom, pose);

    std::vector<std::pair<ShapeGeom, Pose>> others;
    for (const EnvBlock& e : ctx.level->env) others.push_back({e.geom, e.pose});
    for (const PlacedBlock& e : ctx.frozen.entries) {
        const BlockTemplate* tpl = ctx.level->find_template(e.id);
        if (tpl) others.push_back({tpl->geom, e.pose});
    }
    for (const PlacedBlock& e : extra) {
        const BlockTemplate* tpl = ctx.level->find_template(e.id);
        if (tpl) others.push_back({tpl->geom, e.pose});
    }

    const double touch = 0.8;
    for (const auto& [og, op] : others) {
        // block corners on the other's surface
        for (const Vec2& v : poly) {
            ClosestFeature f = closest_feature(og, op, v);
            if (std::abs(f.separation) <= touch && f.normal.y < -0.7) xs.push_back(v.x);
        }
        // the other's corners under the block's face
        for (const Vec2& u : world_polygon(og, op)) {
            ClosestFeature f = closest_feature(geom, pose, u);
            if (std::abs(f.separation) <= touch && f.normal.y > 0.7) xs.push_back(u.x);
        }
    }
    return xs;
}

Vec2 centroid_world(const ShapeGeom& geom, const Pose& pose) {
    std::vector<Vec2> poly = geom.local_polygon();
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        double cr = poly[i].cross(poly[(i + 1) % n]);
        a2 += cr;
        cx += (poly[i].x + poly[(i + 1) % n].x) * cr;
        cy += (poly[i].y + poly[(i + 1) % n].y) * cr;
    }
    return pose.to_world({cx / (3.0 * a2), cy / (3.0 * a2)});
}

bool stable_on(const std::vector<double>& xs, double com_x) {
    if (xs.empty()) return false;
    double lo = *std::min_element(xs.begin(), xs.end());
    double hi = *std::max_element(xs.begin(), xs.end());
    if (hi - lo < 2.0) return false;  // knife-edge balance does not count
    return com_x >= lo - 1.0 && com_x <= hi + 1.0;
}

// first scenery surface straight below a point
std::optional<double> surface_below(const RegionContext& ctx,
                                    const std::vector<PlacedBlock>& extra, const Vec2& p) {
    Scenery sc = build_scenery(ctx);
    for (const PlacedBlock& e : extra) {
        const BlockTemplate* tpl = ctx.level->find_template(e.id);
        if (!tpl) continue;
        sc.geoms.push_back(tpl->geom);
        sc.poses.push_back(e.pose);
        sc.refs.push_back(ObjRef::block(e.id));
    }
    auto inside = [&](const Vec2& q) {
        for (size_t i = 0; i < sc.geoms.size(); ++i) {
            if (signed_dist_point_polygon(q, world_polygon(sc.geoms[i], sc.poses[i])) <= 0.0)
                return true;
        }
        return false;
    };
    double limit = ctx.level->bounds.hi.y;
    for (double y = p.y + 0.5; y <= limit; y += 1.0) {
        if (inside({p.x, y})) {
            double lo = y - 1.0, hi = y;
            for (int it = 0; it < 20; ++it) {
                double mid = (lo + hi) / 2.0;
                if (inside({p.x, mid})) hi = mid;
                else lo = mid;
            }
            return lo;  // free side of the boundary
        }
    }
    return std::nullopt;
}

bool clears_approach(const RegionContext& ctx, const ShapeGeom& geom, const Pose& pose,
                     int first_contact_step) {
    double r = ctx.level->ball_radius;
    const std::vector<TrajSample>& traj = *ctx.trajectory;
    for (const TrajSample& s : traj) {
        if (s.k >= first_contact_step) break;
        if (circle_block_separation(s.state.pos, r, geom, pose) <= 0.5) return false;
    }
    return true;
}

}  // namespace

std::optional<std::vector<PlacedBlock>> place_supports(
    const RegionContext& ctx, const Candidate& main,
    const std::vector<BlockTemplate>& inventory_remaining, int first_contact_step) {
    const BlockTemplate* tpl = ctx.level->find_template(main.main_block);
    if (!tpl) return std::nullopt;

    std::vector<PlacedBlock> supports;
    Vec2 com = centroid_world(tpl->geom, main.pose);

    // smallest blocks first
    std::vector<BlockTemplate> pool = inventory_remaining;
    std::sort(pool.begin(), pool.end(), [](const BlockTemplate& a, const BlockTemplate& b) {
        double aa = a.geom.area(), ab = b.geom.area();
        if (aa != ab) return aa < ab;
        return a.id < b.id;
    });

    for (int round = 0; round < 2; ++round) {
        std::vector<double> xs = support_xs(ctx, tpl->geom, main.pose, supports);
        if (stable_on(xs, com.x)) return supports;

        // the unsupported side and its lowest hanging corner
        bool need_right = xs.empty() || com.x > *std::max_element(xs.begin(), xs.end());
        bool need_left = xs.empty() || com.x < *std::min_element(xs.begin(), xs.end());
        std::vector<Vec2> poly = world_polygon(tpl->geom, main.pose);
        const Vec2* corner = nullptr;
        for (const Vec2& v : poly) {
            bool on_side = xs.empty() ? true
                           : need_right ? v.x > com.x
                           : need_left  ? v.x < com.x
                                        : false;
            if (!on_side) continue;
            if (!corner || v.y > corner->y) corner = &v;
        }
        if (!corner) return std::nullopt;

        auto floor_y = surface_below(ctx, supports, *corner);
        if (!floor_y) return std::nullopt;
        double gap = *floor_y - corner->y;
        if (gap <= 0.8) {
            // effectively touching already; count it as a support point
            return supports;
        }

        bool placed = false;
        // single block, both orientations; the support sits outboard of the
        // corner so its edge carries it without poking into the block above
        double outboard = need_right && !need_left ? 1.0 : -1.0;
        for (const BlockTemplate& t : pool) {
            if (placed) break;
            bool used = false;
            for (const PlacedBlock& s : supports) used = used || s.id == t.id;
            if (used) continue;
            std::vector<std::pair<double, double>> options;  // (height, angle)
            options.push_back({t.geom.h, 0.0});
            if (t.geom.kind != ShapeKind::CircleSeg && t.geom.w != t.geom.h)
                options.push_back({t.geom.w, M_PI / 2.0});
            for (auto [h_eff, angle] : options) {
                if (h_eff < gap - 2.0 || h_eff > gap) continue;
                double w_eff = angle == 0.0 ? t.geom.w : t.geom.h;
                double cx = corner->x + outboard * (w_eff / 2.0 - 1.0);
                Pose sp{{cx, *floor_y - h_eff / 2.0 - 0.05}, angle};
                if (pose_overlaps_scenery(ctx, t.geom, sp)) continue;
                std::vector<Vec2> sp_poly = world_polygon(t.geom, sp);
                if (polygons_overlap_strict(sp_poly, poly)) continue;
                bool clash = false;
                for (const PlacedBlock& s : supports) {
                    const BlockTemplate* st = ctx.level->find_template(s.id);
                    if (st && polygons_overlap_strict(sp_poly, world_polygon(st->geom, s.pose)))
                        clash = true;
                }
                if (clash) continue;
                if (!clears_approach(ctx, t.geom, sp, first_contact_step)) continue;
                supports.push_back({t.id, sp});
                placed = true;
                break;
            }
        }
        // two-block stack fallback for taller gaps
        if (!placed && supports.empty() && pool.size() >= 2) {
            for (size_t i = 0; i < pool.size() && !placed; ++i) {
                for (size_t j = 0; j < pool.size() && !placed; ++j) {
                    if (i == j) continue;
                    double h1 = pool[i].geom.h, h2 = pool[j].geom.h;
                    if (h1 + h2 < gap - 2.0 || h1 + h2 > gap) continue;
                    double cx = corner->x + outboard * (pool[j].geom.w / 2.0 - 1.0);
                    Pose p1{{cx, *floor_y - h1 / 2.0 - 0.05}, 0.0};
                    Pose p2{{cx, *floor_y - h1 - h2 / 2.0 - 0.1}, 0.0};
                    if (pose_overlaps_scenery(ctx, pool[i].geom, p1)) continue;
                    if (pose_overlaps_scenery(ctx, pool[j].geom, p2)) continue;
                    if (!clears_approach(ctx, pool[i].geom, p1, first_contact_step)) continue;
                    if (!clears_approach(ctx, pool[j].geom, p2, first_contact_step)) continue;
                    supports.push_back({pool[i].id, p1});
                    supports.push_back({pool[j].id, p2});
                    placed = true;
                }
            }
        }
        if (!placed) return std::nullopt;
        if (supports.size() >= 2) {
            std::vector<double> xs2 = support_xs(ctx, tpl->geom, main.pose, supports);
            if (stable_on(xs2, com.x)) return supports;
            return std::nullopt;
        }
    }
    std::vector<double> xs = support_xs(ctx, tpl->geom, main.pose, supports);
    if (stable_on(xs, com.x)) return supports;
    return std::nullopt;
}

std::string candidates_to_csv(const RegionContext& ctx, const std::vector<Candidate>& cs,
                              const OptimizerParams& params) {
    std::ostringstream os;
    os << "e1,block,x,y,angle,cost\n";
    for (const Candidate& c : cs) {
        EvalResult r = evaluate(ctx, c, params);
        os << c.e1 << ',' << c.main_block << ',' << c.pose.pos.x << ',' << c.pose.pos.y << ','
           << c.pose.angle << ',';
        if (r.feasible) os << r.cost;
        else os << "infeasible";
        os << "\n";
    }
    return os.str();
}

}  // namespace bubble
