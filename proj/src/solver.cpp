#include "bubble/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bubble {

using json = nlohmann::json;

std::string solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Solved: return "solved";
        case SolveStatus::FailedNoRegion: return "failed(no-region)";
        case SolveStatus::FailedUnsolvableRegion: return "failed(unsolvable-region)";
        case SolveStatus::FailedBudget: return "failed(budget)";
    }
    return "?";
}

namespace {

int log_level() {
    const char* v = std::getenv("BUBBLE_LOG");
    return v ? std::atoi(v) : 0;
}

// closest approach of a trajectory to the final guide waypoint
double terminal_deviation(const std::vector<TrajSample>& traj, const GuidePath& guide) {
    double best = 1e18;
    for (const TrajSample& s : traj) best = std::min(best, dist(s.state.pos, guide.waypoints.back()));
    return best;
}

std::string rect_key(const AABB& r) {
    std::ostringstream os;
    os << std::llround(r.lo.x) << ',' << std::llround(r.lo.y) << ',' << std::llround(r.hi.x)
       << ',' << std::llround(r.hi.y);
    return os.str();
}

}  // namespace

std::pair<double, double> precontact_drift(const TrialRecord& tr, const Placement& p) {
    double max_pos = 0.0, max_ang = 0.0;
    for (const PlacedBlock& e : p.entries) {
        int bi = -1;
        for (size_t i = 0; i < tr.block_ids.size(); ++i)
            if (tr.block_ids[i] == e.id) bi = int(i);
        if (bi < 0) continue;

        int first_contact = int(tr.trajectory.size());
        for (size_t k = 0; k < tr.contacts.size(); ++k) {
            bool hit = false;
            for (const Contact& c : tr.contacts[k])
                if (c.b == ObjRef::block(e.id)) hit = true;
            if (hit) {
                first_contact = int(k);
                break;
            }
        }
        const BlockState& start = tr.block_history[0][bi];
        for (int k = 0; k < first_contact && k < int(tr.block_history.size()); ++k) {
            const BlockState& bs = tr.block_history[k][bi];
            max_pos = std::max(max_pos, dist(bs.pos, start.pos));
            max_ang = std::max(max_ang, std::abs(bs.angle - start.angle) * 180.0 / M_PI);
        }
    }
    return {max_pos, max_ang};
}

SolveReport solve(const Level& level, const SolverOptions& options) {
    using clock = std::chrono::steady_clock;
    auto t_start = clock::now();

    SolveReport rep;
    rep.level_name = level.name;
    rep.budget = options.budget;
    rep.seed = options.seed;
    rep.beta = KinParamsSet{};

    int verbose = log_level();

    // trial 0: the bare level, no blocks placed
    TrialRecord trial0 = simulate(level, Placement{}, options.sim);
    if (trial0.reached()) {
        rep.status = SolveStatus::Solved;
        rep.trials_used = 1;
        rep.final_trajectory = trial0.trajectory;
        rep.tau = trial0.tau;
        rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
        return rep;
    }

    try {
        rep.guide = plan_guide_path(level, options.guide);
    } catch (const NoPathError& e) {
        rep.status = SolveStatus::FailedNoRegion;
        rep.failure_reason = e.what();
        rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
        return rep;
    }

    std::vector<TrajSample> gamma_in = trial0.trajectory;
    double best_terminal = terminal_deviation(gamma_in, rep.guide);
    Placement frozen;
    KinParamsSet beta;
    std::map<std::string, std::set<std::string>> banned;  // per-region candidate history
    std::set<std::string> region_rects;  // distinct regions seen

    OptimizerParams opt = options.opt;
    opt.jobs = options.jobs;
    opt.random_shooting = options.random_shooting;
    opt.seed = options.seed;

    struct Snapshot {
        std::vector<TrajSample> gamma_in;
        Placement frozen;
        double best_terminal;
    };
    std::vector<Snapshot> accepted_stack;  // for backtracking out of dead ends

    int trials = 0;
    while (trials < options.budget) {
        auto region = compute_local_region(gamma_in, rep.guide, options.guide.eps1,
                                           options.guide.eps2, options.guide.margin);
        if (!region) {
            rep.status = SolveStatus::FailedNoRegion;
            rep.failure_reason =
                "trajectory deviation never enters the band and no fallback applies";
            break;
        }
        std::string rkey = rect_key(region->rect);
        region_rects.insert(rkey);

        RegionContext ctx;
        ctx.level = &level;
        ctx.region = &*region;
        ctx.target = local_target(*region, options.guide.local_target_eps);
        ctx.trajectory = &gamma_in;
        ctx.frozen = frozen;
        ctx.beta = beta;

        std::vector<BlockTemplate> remaining;
        for (const BlockTemplate& t : level.inventory)
            if (!frozen.uses(t.id)) remaining.push_back(t);

        LocalSolution sol;
        try {
            sol = solve_local(ctx, remaining, opt, banned[rkey]);
        } catch (const std::runtime_error& e) {
            if (!accepted_stack.empty()) {
                // dead end: give back the last accepted placement and try a
                // different candidate for its region
                Snapshot snap = std::move(accepted_stack.back());
                accepted_stack.pop_back();
                gamma_in = std::move(snap.gamma_in);
                frozen = std::move(snap.frozen);
                best_terminal = snap.best_terminal;
                if (verbose >= 1) std::cerr << "  backtracking a region\n";
                continue;
            }
            rep.status = SolveStatus::FailedUnsolvableRegion;
            rep.failure_reason = e.what();
            break;
        }

        if (!options.dump_dir.empty()) {
            std::string stem = options.dump_dir + "/" + level.name + "_trial" +
                               std::to_string(trials + 1);
            try {
                auto cg = candidate_grid(ctx, remaining, GridResolution::Coarse, nullptr, opt);
                std::ofstream(stem + "_cg.csv") << candidates_to_csv(ctx, cg, opt);
                auto fg = candidate_grid(ctx, remaining, GridResolution::Fine, &sol.best, opt);
                std::ofstream(stem + "_fg.csv") << candidates_to_csv(ctx, fg, opt);
            } catch (const std::exception&) {
                // grids can be empty here; dumps are best effort
            }
        }

        RegionAttempt att;
        att.trial = trials + 1;
        att.rect = region->rect;
        att.k_loc = region->k_loc;
        att.main_block = sol.best.main_block;
        att.pose = sol.best.pose;
        att.supports = sol.supporting;
        att.cg_best_cost = sol.cg_best_cost;
        att.fg_best_cost = sol.fg_best_cost;
        att.chosen_cost = sol.cost;
        att.cg_candidates = sol.cg_candidates;
        att.fg_candidates = sol.fg_candidates;
        att.cg_seconds = sol.cg_seconds;
        att.fg_seconds = sol.fg_seconds;

        Placement attempt = frozen;
        for (const PlacedBlock& e : sol.m0_patch.entries) attempt.entries.push_back(e);

        TrialRecord tr = simulate(level, attempt, options.sim);
        ++trials;
        banned[rkey].insert(candidate_key(sol.best));

        if (verbose >= 1) {
            std::cerr << "[trial " << trials << "] block " << sol.best.main_block << " at ("
                      << sol.best.pose.pos.x << "," << sol.best.pose.pos.y << ","
                      << sol.best.pose.angle << ") cost " << sol.cost << " -> "
                      << (tr.reached() ? "reached" : "missed") << "\n";
        }

        if (tr.reached()) {
            att.accepted = true;
            rep.attempts.push_back(att);
            rep.status = SolveStatus::Solved;
            rep.trials_used = trials;
            rep.regions_used = int(region_rects.size());
            rep.final_placement = attempt;
            rep.final_trajectory = tr.trajectory;
            rep.tau = tr.tau;
            rep.beta = beta;
            rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
            return rep;
        }

        // refit the contact parameters from this trial's events
        std::vector<EventSample> samples = extract_samples(tr);
        for (ContactType type :
             {ContactType::RollOnSegment, ContactType::BounceOffSegment,
              ContactType::BounceOffCircle, ContactType::SlideOnSegment}) {
            std::vector<EventSample> group;
            for (const EventSample& s : samples)
                if (s.type == type) group.push_back(s);
            if (group.empty()) continue;
            double ridge = group.size() < 2 ? 1.0 : 0.0;
            FitReport fr = fit(type, group, beta.for_type(type), ridge);
            FitLogEntry log;
            log.trial = trials;
            log.type = type;
            log.before = beta.for_type(type);
            log.after = fr.beta_new;
            log.residual_before = fr.residual_before;
            log.residual_after = fr.residual_after;
            log.n_samples = fr.n_samples;
            rep.fit_log.push_back(log);
            beta.for_type(type) = fr.beta_new;
        }

        auto [dpos, dang] = precontact_drift(tr, sol.m0_patch);
        if (dpos > options.drift_pos_tol || dang > options.drift_ang_tol) {
            att.drifted = true;
            rep.attempts.push_back(att);
            if (verbose >= 1)
                std::cerr << "  drift " << dpos << "px " << dang << "deg: candidate discarded\n";
            continue;  // candidate banned above; same region, next candidate
        }

        // accept the trial if it tightened the closest approach to the guide
        // end; otherwise its blocks go back in the tray and the same region
        // is re-optimized with the refit parameters
        double term = terminal_deviation(tr.trajectory, rep.guide);
        if (term < best_terminal - 1e-9) {
            att.accepted = true;
            accepted_stack.push_back({gamma_in, frozen, best_terminal});
            best_terminal = term;
            gamma_in = tr.trajectory;
            frozen = attempt;
        }
        rep.attempts.push_back(att);
    }

    if (rep.status != SolveStatus::FailedNoRegion &&
        rep.status != SolveStatus::FailedUnsolvableRegion) {
        rep.status = SolveStatus::FailedBudget;
        rep.failure_reason = "trial budget exhausted";
    }
    rep.trials_used = trials;
    rep.regions_used = int(region_rects.size());
    rep.final_placement = frozen;
    rep.final_trajectory = gamma_in;
    rep.beta = beta;
    rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    return rep;
}

namespace {

json vec2_json(const Vec2& v) { return {v.x, v.y}; }

json params_json(const KinParams& p) {
    return {{"e_n", p.e_n}, {"e_t", p.e_t}, {"a_roll", p.a_roll}};
}

json beta_json(const KinParamsSet& b) {
    return {{"RollOnSegment", params_json(b.roll)},
            {"BounceOffSegment", params_json(b.bounce_seg)},
            {"BounceOffCircle", params_json(b.bounce_circle)},
            {"SlideOnSegment", params_json(b.slide)}};
}

json placement_json(const Placement& p) {
    json arr = json::array();
    for (const PlacedBlock& e : p.entries) {
        arr.push_back(
            {{"id", e.id}, {"pos", vec2_json(e.pose.pos)}, {"angle", e.pose.angle}});
    }
    return arr;
}

}  // namespace

std::string report_to_json(const SolveReport& rep) {
    json j;
    j["level"] = rep.level_name;
    if (!rep.level_file.empty()) j["level_file"] = rep.level_file;
    j["status"] = solve_status_name(rep.status);
    if (!rep.failure_reason.empty()) j["failure_reason"] = rep.failure_reason;
    j["budget"] = rep.budget;
    j["seed"] = rep.seed;
    j["trials"] = rep.trials_used;
    j["regions"] = rep.regions_used;
    j["tau"] = rep.tau;

    json attempts = json::array();
    json timing_regions = json::array();
    for (const RegionAttempt& a : rep.attempts) {
        attempts.push_back({{"trial", a.trial},
                            {"rect", {a.rect.lo.x, a.rect.lo.y, a.rect.hi.x, a.rect.hi.y}},
                            {"k_loc", a.k_loc},
                            {"main_block", a.main_block},
                            {"pose", {a.pose.pos.x, a.pose.pos.y, a.pose.angle}},
                            {"supports", placement_json(Placement{a.supports})},
                            {"cg_best_cost", a.cg_best_cost},
                            {"fg_best_cost", a.fg_best_cost},
                            {"chosen_cost", a.chosen_cost},
                            {"cg_candidates", a.cg_candidates},
                            {"fg_candidates", a.fg_candidates},
                            {"accepted", a.accepted},
                            {"drifted", a.drifted}});
        timing_regions.push_back({{"cg_s", a.cg_seconds}, {"fg_s", a.fg_seconds}});
    }
    j["attempts"] = attempts;
    j["final_placement"] = {{"placement", placement_json(rep.final_placement)}};
    j["beta"] = beta_json(rep.beta);

    json guide = json::array();
    for (const Vec2& p : rep.guide.waypoints) guide.push_back(vec2_json(p));
    j["guide_path"] = guide;

    json traj = json::array();
    for (const TrajSample& s : rep.final_trajectory)
        traj.push_back({s.k, s.state.pos.x, s.state.pos.y, s.state.vel.x, s.state.vel.y});
    j["trajectory"] = traj;

    json fits = json::array();
    for (const FitLogEntry& f : rep.fit_log) {
        fits.push_back({{"trial", f.trial},
                        {"type", contact_type_name(f.type)},
                        {"beta_before", params_json(f.before)},
                        {"beta_after", params_json(f.after)},
                        {"residual_before", f.residual_before},
                        {"residual_after", f.residual_after},
                        {"n_samples", f.n_samples}});
    }
    j["fit_log"] = fits;

    j["timing"] = {{"total_s", rep.total_seconds}, {"regions", timing_regions}};
    return j.dump(2) + "\n";
}

std::string fit_log_to_jsonl(const std::vector<FitLogEntry>& log) {
    std::ostringstream os;
    for (const FitLogEntry& f : log) {
        json j = {{"trial", f.trial},
                  {"type", contact_type_name(f.type)},
                  {"beta_before", params_json(f.before)},
                  {"beta_after", params_json(f.after)},
                  {"residual_before", f.residual_before},
                  {"residual_after", f.residual_after},
                  {"n_samples", f.n_samples}};
        os << j.dump() << "\n";
    }
    return os.str();
}

}  // namespace bubble
