#pragma once

#include <string>
#include <vector>

#include "bubble/guide.hpp"
#include "bubble/learner.hpp"
#include "bubble/level.hpp"
#include "bubble/optimizer.hpp"
#include "bubble/physics.hpp"

namespace bubble {

enum class SolveStatus { Solved, FailedNoRegion, FailedUnsolvableRegion, FailedBudget };

std::string solve_status_name(SolveStatus s);

struct RegionAttempt {
    int trial = 0;  // trial index this attempt was simulated in
    AABB rect;
    int k_loc = 0;
    int main_block = 0;
    Pose pose;
    std::vector<PlacedBlock> supports;
    double cg_best_cost = 0.0, fg_best_cost = 0.0, chosen_cost = 0.0;
    int cg_candidates = 0, fg_candidates = 0;
    double cg_seconds = 0.0, fg_seconds = 0.0;
    bool accepted = false;   // the trial improved gamma_in and the blocks stayed
    bool drifted = false;    // discarded by the pre-contact drift check
};

struct FitLogEntry {
    int trial = 0;
    ContactType type = ContactType::RollOnSegment;
    KinParams before, after;
    double residual_before = 0.0, residual_after = 0.0;
    int n_samples = 0;
};

struct SolveReport {
    std::string level_name;
    std::string level_file;
    SolveStatus status = SolveStatus::FailedBudget;
    std::string failure_reason;
    int budget = 0;
    unsigned long long seed = 0;
    int trials_used = 0;
    int regions_used = 0;  // distinct region rectangles
    std::vector<RegionAttempt> attempts;
    Placement final_placement;
    KinParamsSet beta;
    GuidePath guide;
    std::vector<TrajSample> final_trajectory;
    int tau = -1;
    std::vector<FitLogEntry> fit_log;
    double total_seconds = 0.0;
};

struct SolverOptions {
    int budget = 10;
    unsigned long long seed = 0;
    int jobs = 1;
    bool random_shooting = false;
    std::string dump_dir;  // when set, per-candidate CSVs land here
    GuideParams guide;
    SimParams sim;
    OptimizerParams opt;
    double drift_pos_tol = 2.0;  // px
    double drift_ang_tol = 2.0;  // degrees
};

// iterative trial / region / optimize / learn loop
SolveReport solve(const Level& level, const SolverOptions& options = {});

// max pose drift of any placed block before its first ball contact
std::pair<double, double> precontact_drift(const TrialRecord& tr, const Placement& p);

// deterministic JSON form; all wall-clock values live under the "timing" key
std::string report_to_json(const SolveReport& rep);
std::string fit_log_to_jsonl(const std::vector<FitLogEntry>& log);

}  // namespace bubble
